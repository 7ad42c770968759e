//! Forward kinematics over the joint tree.

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Unit};

use super::{JointKind, ModelError, RobotModel};

/// World pose of every link with the base at identity. `q` holds one entry
/// per actuated joint in document order (rad for revolute/continuous,
/// m for prismatic).
pub fn forward_kinematics(
    model: &RobotModel,
    q: &[f64],
) -> Result<Vec<Isometry3<f64>>, ModelError> {
    if q.len() != model.dof() {
        return Err(ModelError::DimensionMismatch { expected: model.dof(), got: q.len() });
    }
    let mut dof_of_joint = vec![usize::MAX; model.joints.len()];
    for (di, ji) in model.actuated_joints().into_iter().enumerate() {
        dof_of_joint[ji] = di;
    }

    let mut poses = vec![Isometry3::identity(); model.links.len()];
    for ji in model.topological_joints() {
        let joint = &model.joints[ji];
        let motion = match joint.kind {
            JointKind::Fixed => Isometry3::identity(),
            JointKind::Revolute | JointKind::Continuous => {
                let angle = q[dof_of_joint[ji]];
                let rot = UnitQuaternion::from_axis_angle(&Unit::new_unchecked(joint.axis), angle);
                Isometry3::from_parts(Translation3::identity(), rot)
            }
            JointKind::Prismatic => {
                let d = q[dof_of_joint[ji]];
                Isometry3::from_parts(
                    Translation3::from(joint.axis * d),
                    UnitQuaternion::identity(),
                )
            }
        };
        poses[joint.child] = poses[joint.parent] * joint.origin.isometry() * motion;
    }
    Ok(poses)
}
