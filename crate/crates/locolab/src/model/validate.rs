//! Structural diagnostics beyond what parsing enforces. Errors mean the
//! model cannot be simulated; warnings flag defaulted or suspicious fields.

use std::fmt;

use super::{JointKind, RobotModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Warning => write!(f, "WARNING"),
            Severity::Error => write!(f, "ERROR"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.severity, self.code, self.message)
    }
}

impl Diagnostic {
    fn warn(code: &'static str, message: String) -> Self {
        Diagnostic { severity: Severity::Warning, code, message }
    }
    fn error(code: &'static str, message: String) -> Self {
        Diagnostic { severity: Severity::Error, code, message }
    }
}

pub fn validate(model: &RobotModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    for (li, link) in model.links.iter().enumerate() {
        if link.mass < 0.0 {
            out.push(Diagnostic::error("BAD_MASS", format!("link '{}' has negative mass", link.name)));
        }
        let eig = link.inertia.symmetric_eigenvalues();
        let scale = eig.iter().fold(1.0_f64, |a, &b| a.max(b.abs()));
        let tol = 1e-9 * scale.max(1.0);
        if eig.iter().any(|&v| v < -tol) {
            out.push(Diagnostic::error(
                "BAD_INERTIA",
                format!("link '{}': negative principal moment", link.name),
            ));
        } else if link.mass > 0.0 {
            let (a, b, c) = (eig[0], eig[1], eig[2]);
            if a + b < c - tol || a + c < b - tol || b + c < a - tol {
                out.push(Diagnostic::error(
                    "BAD_INERTIA",
                    format!(
                        "link '{}': principal moments ({a:.4}, {b:.4}, {c:.4}) violate the triangle inequality",
                        link.name
                    ),
                ));
            }
        }
        let has_children = !model.child_joints_of(li).is_empty();
        if link.mass == 0.0 && has_children {
            out.push(Diagnostic::warn(
                "ZERO_MASS_LINK",
                format!("intermediate link '{}' has zero mass", link.name),
            ));
        }
        if link.mass > 0.0 && link.collision.is_none() {
            out.push(Diagnostic::warn(
                "MISSING_COLLISION",
                format!("link '{}' has mass but no collision shape", link.name),
            ));
        }
    }

    for joint in &model.joints {
        if joint.kind == JointKind::Fixed {
            continue;
        }
        if (joint.axis.norm() - 1.0).abs() > 1e-9 {
            out.push(Diagnostic::error(
                "BAD_AXIS",
                format!("joint '{}' axis is not unit length", joint.name),
            ));
        }
        if let Some((lo, hi)) = joint.limits {
            if lo >= hi {
                out.push(Diagnostic::error(
                    "BAD_LIMITS",
                    format!("joint '{}' has lower >= upper", joint.name),
                ));
            }
        } else if matches!(joint.kind, JointKind::Revolute | JointKind::Prismatic) {
            out.push(Diagnostic::warn(
                "LIMITS_DEFAULTED",
                format!("joint '{}' has no position limits; using defaults", joint.name),
            ));
        }
        if joint.damping < 0.0 {
            out.push(Diagnostic::error(
                "BAD_DAMPING",
                format!("joint '{}' has negative damping", joint.name),
            ));
        }
        if joint.effort_limit.is_none() {
            out.push(Diagnostic::warn(
                "EFFORT_DEFAULTED",
                format!(
                    "joint '{}' has no effort limit; using {} N*m",
                    joint.name,
                    super::DEFAULT_EFFORT_LIMIT
                ),
            ));
        } else if joint.effort_limit.unwrap() <= 0.0 {
            out.push(Diagnostic::error(
                "BAD_EFFORT",
                format!("joint '{}' has non-positive effort limit", joint.name),
            ));
        }
        if joint.velocity_limit.is_none() {
            out.push(Diagnostic::warn(
                "VELOCITY_DEFAULTED",
                format!(
                    "joint '{}' has no velocity limit; using {} rad/s",
                    joint.name,
                    super::DEFAULT_VELOCITY_LIMIT
                ),
            ));
        } else if joint.velocity_limit.unwrap() <= 0.0 {
            out.push(Diagnostic::error(
                "BAD_VELOCITY",
                format!("joint '{}' has non-positive velocity limit", joint.name),
            ));
        }
    }

    for joint in &model.joints {
        if !joint.is_actuated() {
            continue;
        }
        let child = &model.links[joint.child];
        let inertialess = child.inertia.iter().all(|v| *v == 0.0);
        if child.mass == 0.0 && inertialess {
            out.push(Diagnostic::error(
                "MASSLESS_ACTUATED",
                format!(
                    "joint '{}' actuates massless, inertialess link '{}' (singular dynamics)",
                    joint.name, child.name
                ),
            ));
        }
    }

    if model.dof() == 0 {
        out.push(Diagnostic::warn("NO_ACTUATION", "model has no actuated joints".into()));
    }

    out
}

/// True when no diagnostic is an error.
pub fn is_clean_of_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().all(|d| d.severity != Severity::Error)
}
