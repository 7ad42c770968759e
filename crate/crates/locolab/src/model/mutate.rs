//! Structural mutation operators for morphology sweeps. Both return a new
//! model; the original is never edited in place.

use nalgebra::{Matrix3, Vector3};

use super::{JointKind, ModelError, RobotModel, Shape};

/// Minimal glob matcher: `*` matches any run of characters, `?` exactly one.
pub fn glob_match(pattern: &str, name: &str) -> bool {
    fn rec(p: &[u8], s: &[u8]) -> bool {
        match (p.first(), s.first()) {
            (None, None) => true,
            (Some(b'*'), _) => rec(&p[1..], s) || (!s.is_empty() && rec(p, &s[1..])),
            (Some(b'?'), Some(_)) => rec(&p[1..], &s[1..]),
            (Some(a), Some(b)) if a == b => rec(&p[1..], &s[1..]),
            _ => false,
        }
    }
    rec(pattern.as_bytes(), name.as_bytes())
}

/// Stretches every link matching `name_pattern` along its long axis:
/// the collision shape's long dimension and child-joint offsets scale by
/// `factor`, mass scales linearly with length, and the inertia follows the
/// slender-rod model (moments about axes perpendicular to the stretch scale
/// as m*l^2).
pub fn scale_links(
    model: &RobotModel,
    name_pattern: &str,
    factor: f64,
) -> Result<RobotModel, ModelError> {
    if !factor.is_finite() || factor <= 0.0 {
        return Err(ModelError::BadFactor(factor));
    }
    let matched: Vec<usize> = (0..model.links.len())
        .filter(|&i| glob_match(name_pattern, &model.links[i].name))
        .collect();
    if matched.is_empty() {
        return Err(ModelError::NoMatch(name_pattern.to_string()));
    }
    if factor == 1.0 {
        return Ok(model.clone());
    }

    let mut out = model.clone();
    for &li in &matched {
        let axis = long_axis(&out.links[li].collision.as_ref().map(|c| (c.shape, c.origin)));
        let link = &mut out.links[li];

        if let Some(col) = &mut link.collision {
            match &mut col.shape {
                Shape::Box { size } => {
                    let k = argmax3(size);
                    size[k] *= factor;
                }
                Shape::Sphere { radius } => *radius *= factor,
                Shape::Cylinder { length, .. } | Shape::Capsule { length, .. } => {
                    *length *= factor;
                }
            }
            col.origin.xyz = stretch_along(&col.origin.xyz, &axis, factor);
        }

        link.mass *= factor;
        link.inertial_origin.xyz = stretch_along(&link.inertial_origin.xyz, &axis, factor);
        // Inertia lives in the inertial frame; express the stretch axis there.
        let axis_inertial = link.inertial_origin.rotation().inverse() * axis;
        link.inertia = scale_inertia(&link.inertia, &axis_inertial, factor);

        for ji in out.joints.iter_mut().filter(|j| j.parent == li) {
            ji.origin.xyz = stretch_along(&ji.origin.xyz, &axis, factor);
        }
    }
    Ok(out)
}

/// Replaces every joint matching `name_pattern` with a fixed joint at q = 0.
pub fn lock_joints(model: &RobotModel, name_pattern: &str) -> Result<RobotModel, ModelError> {
    let matched: Vec<usize> = (0..model.joints.len())
        .filter(|&i| {
            model.joints[i].is_actuated() && glob_match(name_pattern, &model.joints[i].name)
        })
        .collect();
    if matched.is_empty() {
        return Err(ModelError::NoMatch(name_pattern.to_string()));
    }
    let mut out = model.clone();
    for ji in matched {
        out.joints[ji].kind = JointKind::Fixed;
    }
    Ok(out)
}

/// Unit direction of a shape's long dimension in the link frame. Links
/// without a collision shape stretch along their local z axis.
fn long_axis(collision: &Option<(Shape, super::Pose)>) -> Vector3<f64> {
    match collision {
        None => Vector3::z(),
        Some((shape, origin)) => {
            let local = match shape {
                Shape::Box { size } => {
                    let mut e = Vector3::zeros();
                    e[argmax3(size)] = 1.0;
                    e
                }
                Shape::Sphere { .. } => Vector3::z(),
                Shape::Cylinder { .. } | Shape::Capsule { .. } => Vector3::z(),
            };
            origin.rotation() * local
        }
    }
}

fn argmax3(v: &Vector3<f64>) -> usize {
    let mut k = 0;
    for i in 1..3 {
        if v[i] > v[k] {
            k = i;
        }
    }
    k
}

fn stretch_along(v: &Vector3<f64>, axis: &Vector3<f64>, factor: f64) -> Vector3<f64> {
    v + axis * ((factor - 1.0) * axis.dot(v))
}

/// Componentwise dimensional scaling in an orthonormal basis whose first
/// column is the stretch axis: m*r^2 terms scale by f, m*l*r by f^2, and
/// m*l^2 by f^3. The rule composes exactly: scaling by a then b equals
/// scaling by a*b.
fn scale_inertia(inertia: &Matrix3<f64>, axis: &Vector3<f64>, factor: f64) -> Matrix3<f64> {
    let basis = orthonormal_basis(axis);
    let mut local = basis.transpose() * inertia * basis;
    let f = factor;
    local[(0, 0)] *= f;
    local[(1, 1)] *= f * f * f;
    local[(2, 2)] *= f * f * f;
    for k in 1..3 {
        local[(0, k)] *= f * f;
        local[(k, 0)] *= f * f;
    }
    local[(1, 2)] *= f;
    local[(2, 1)] *= f;
    basis * local * basis.transpose()
}

fn orthonormal_basis(axis: &Vector3<f64>) -> Matrix3<f64> {
    let d = axis.normalize();
    // Seed with the world axis least aligned with d for a stable cross product.
    let seed = if d.x.abs() <= d.y.abs() && d.x.abs() <= d.z.abs() {
        Vector3::x()
    } else if d.y.abs() <= d.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = d.cross(&seed).normalize();
    let w = d.cross(&u);
    Matrix3::from_columns(&[d, u, w])
}
