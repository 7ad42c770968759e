//! Robot model: a validated kinematic tree parsed from URDF, plus the
//! kinematics and structural-mutation operators used by morphology sweeps.

mod kinematics;
mod mutate;
mod parse;
mod validate;
mod write;

pub use kinematics::forward_kinematics;
pub use mutate::{glob_match, lock_joints, scale_links};
pub use parse::parse_urdf;
pub use validate::{is_clean_of_errors, validate, Diagnostic, Severity};
pub use write::to_urdf_string;

use nalgebra::{Isometry3, Matrix3, Translation3, UnitQuaternion, Vector3};
use thiserror::Error;

/// Default effort clamp for actuated joints that do not declare one.
pub const DEFAULT_EFFORT_LIMIT: f64 = 100.0;
/// Default velocity clamp for actuated joints that do not declare one.
pub const DEFAULT_VELOCITY_LIMIT: f64 = 20.0;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed XML: {0}")]
    XmlMalformed(String),
    #[error("expected exactly one root link, found {0}")]
    MissingRoot(usize),
    #[error("joint graph contains a cycle through link '{0}'")]
    CycleDetected(String),
    #[error("joint '{joint}' references unknown link '{link}'")]
    DanglingReference { joint: String, link: String },
    #[error("joint '{joint}' has unsupported type '{kind}'")]
    UnsupportedJointKind { joint: String, kind: String },
    #[error("link '{0}' has a bad inertia tensor: {1}")]
    BadInertia(String, String),
    #[error("link '{0}' uses mesh collision geometry, which is unsupported")]
    MeshGeometry(String),
    #[error("joint '{0}' has a zero-length axis")]
    BadAxis(String),
    #[error("joint '{0}' has limit_lower >= limit_upper")]
    BadLimit(String),
    #[error("pattern '{0}' matched nothing")]
    NoMatch(String),
    #[error("scale factor must be finite and > 0, got {0}")]
    BadFactor(f64),
    #[error("expected {expected} joint positions, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Position + orientation stored exactly as URDF writes it (xyz + rpy),
/// so serialize/parse round-trips are field-identical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub xyz: Vector3<f64>,
    pub rpy: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Pose { xyz: Vector3::zeros(), rpy: Vector3::zeros() }
    }

    pub fn new(xyz: Vector3<f64>, rpy: Vector3<f64>) -> Self {
        Pose { xyz, rpy }
    }

    /// Orientation as a unit quaternion (URDF fixed-axis roll, pitch, yaw).
    pub fn rotation(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_euler_angles(self.rpy.x, self.rpy.y, self.rpy.z)
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.xyz), self.rotation())
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Full extents along x, y, z.
    Box { size: Vector3<f64> },
    Sphere { radius: f64 },
    /// Axis along local z, `length` excludes nothing (full height).
    Cylinder { radius: f64, length: f64 },
    /// Axis along local z, `length` is the cylindrical section between caps.
    Capsule { radius: f64, length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collision {
    pub shape: Shape,
    pub origin: Pose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    pub mass: f64,
    /// Inertia about the inertial origin, expressed in the inertial frame.
    pub inertia: Matrix3<f64>,
    pub inertial_origin: Pose,
    pub collision: Option<Collision>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    Revolute,
    Continuous,
    Prismatic,
    Fixed,
}

impl JointKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            JointKind::Revolute => "revolute",
            JointKind::Continuous => "continuous",
            JointKind::Prismatic => "prismatic",
            JointKind::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub kind: JointKind,
    /// Index into `RobotModel::links`.
    pub parent: usize,
    pub child: usize,
    /// Joint frame in the parent link frame. The child link frame coincides
    /// with the joint frame after joint motion.
    pub origin: Pose,
    pub axis: Vector3<f64>,
    /// Position limits as declared; `None` means the file omitted them.
    pub limits: Option<(f64, f64)>,
    pub effort_limit: Option<f64>,
    pub velocity_limit: Option<f64>,
    pub damping: f64,
}

impl Joint {
    pub fn is_actuated(&self) -> bool {
        self.kind != JointKind::Fixed
    }

    /// Declared position limits, or a sane default for the joint kind.
    pub fn effective_limits(&self) -> Option<(f64, f64)> {
        match self.kind {
            JointKind::Fixed | JointKind::Continuous => None,
            JointKind::Revolute => {
                Some(self.limits.unwrap_or((-std::f64::consts::PI, std::f64::consts::PI)))
            }
            JointKind::Prismatic => Some(self.limits.unwrap_or((-0.5, 0.5))),
        }
    }

    pub fn effective_effort_limit(&self) -> f64 {
        self.effort_limit.unwrap_or(DEFAULT_EFFORT_LIMIT)
    }

    pub fn effective_velocity_limit(&self) -> f64 {
        self.velocity_limit.unwrap_or(DEFAULT_VELOCITY_LIMIT)
    }
}

/// Parsed kinematic tree. Construction validates tree shape; the model is
/// immutable afterwards and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub name: String,
    pub links: Vec<Link>,
    pub joints: Vec<Joint>,
    pub root_link: usize,
}

impl RobotModel {
    /// Builds a model from parts, checking the tree invariants: exactly one
    /// root, no cycles, no dangling references, one parent joint per link.
    pub fn assemble(name: String, links: Vec<Link>, joints: Vec<Joint>) -> Result<Self, ModelError> {
        let n = links.len();
        for j in &joints {
            if j.parent >= n {
                return Err(ModelError::DanglingReference {
                    joint: j.name.clone(),
                    link: format!("#{}", j.parent),
                });
            }
            if j.child >= n {
                return Err(ModelError::DanglingReference {
                    joint: j.name.clone(),
                    link: format!("#{}", j.child),
                });
            }
        }
        // Every non-root link must be the child of exactly one joint.
        let mut parent_joint = vec![usize::MAX; n];
        for (ji, j) in joints.iter().enumerate() {
            if parent_joint[j.child] != usize::MAX {
                return Err(ModelError::CycleDetected(links[j.child].name.clone()));
            }
            parent_joint[j.child] = ji;
        }
        // Walking up from each link must terminate; a loop never reaches a
        // parentless link, so it also swallows the root — check cycles first.
        for start in 0..n {
            let mut cur = start;
            let mut hops = 0;
            while parent_joint[cur] != usize::MAX {
                cur = joints[parent_joint[cur]].parent;
                hops += 1;
                if hops > n {
                    return Err(ModelError::CycleDetected(links[start].name.clone()));
                }
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&l| parent_joint[l] == usize::MAX).collect();
        if roots.len() != 1 {
            return Err(ModelError::MissingRoot(roots.len()));
        }
        Ok(RobotModel { name, links, joints, root_link: roots[0] })
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    /// Indices of non-fixed joints in document order; defines the layout of
    /// every q / qd / torque vector in the crate.
    pub fn actuated_joints(&self) -> Vec<usize> {
        (0..self.joints.len()).filter(|&i| self.joints[i].is_actuated()).collect()
    }

    pub fn dof(&self) -> usize {
        self.joints.iter().filter(|j| j.is_actuated()).count()
    }

    /// Joint that attaches `link` to its parent, if any.
    pub fn parent_joint_of(&self, link: usize) -> Option<usize> {
        self.joints.iter().position(|j| j.child == link)
    }

    /// Child joints of `link`, in document order.
    pub fn child_joints_of(&self, link: usize) -> Vec<usize> {
        (0..self.joints.len()).filter(|&i| self.joints[i].parent == link).collect()
    }

    /// Joint indices ordered root-outward (parents before children).
    pub fn topological_joints(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.joints.len());
        let mut stack = vec![self.root_link];
        while let Some(link) = stack.pop() {
            let children = self.child_joints_of(link);
            order.extend(children.iter().copied());
            for &ji in children.iter().rev() {
                stack.push(self.joints[ji].child);
            }
        }
        order
    }

    pub fn total_mass(&self) -> f64 {
        self.links.iter().map(|l| l.mass).sum()
    }
}
