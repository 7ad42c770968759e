//! Reconstructs an approximate simulation state from wire state frames.
//! Base height comes from leg kinematics (feet assumed on the ground),
//! linear velocity from integrating the accelerometer. Both drift-prone
//! estimates reset with the episode.

use nalgebra::{DVector, Point3, Quaternion, UnitQuaternion, Vector3};

use super::wire::StatePayload;
use crate::model::{forward_kinematics, RobotModel};
use crate::physics::{sample_points, Contact, SimState};

/// Points closer to the ground than this count as contacts.
const CONTACT_BAND: f64 = 0.01;

pub struct StateEstimator {
    model: RobotModel,
    gravity: Vector3<f64>,
    v_world: Vector3<f64>,
    prev_t_us: Option<u64>,
}

impl StateEstimator {
    pub fn new(model: RobotModel, gravity: Vector3<f64>) -> Self {
        StateEstimator { model, gravity, v_world: Vector3::zeros(), prev_t_us: None }
    }

    pub fn reset(&mut self) {
        self.v_world = Vector3::zeros();
        self.prev_t_us = None;
    }

    /// Folds one state frame into a synthetic `SimState`.
    pub fn ingest(&mut self, payload: &StatePayload, t_us: u64) -> SimState {
        let q: DVector<f64> = DVector::from_iterator(
            payload.q.len(),
            payload.q.iter().map(|v| *v as f64),
        );
        let qd: DVector<f64> = DVector::from_iterator(
            payload.qd.len(),
            payload.qd.iter().map(|v| *v as f64),
        );
        let quat = UnitQuaternion::new_normalize(Quaternion::new(
            payload.base_quat[0] as f64,
            payload.base_quat[1] as f64,
            payload.base_quat[2] as f64,
            payload.base_quat[3] as f64,
        ));
        let gyro = Vector3::new(
            payload.gyro[0] as f64,
            payload.gyro[1] as f64,
            payload.gyro[2] as f64,
        );
        let accel = Vector3::new(
            payload.accel[0] as f64,
            payload.accel[1] as f64,
            payload.accel[2] as f64,
        );

        // Specific force -> world acceleration -> velocity estimate.
        let a_world = quat * accel + self.gravity;
        if let Some(prev) = self.prev_t_us {
            let dt = (t_us.saturating_sub(prev)) as f64 * 1e-6;
            self.v_world += a_world * dt;
        }
        self.prev_t_us = Some(t_us);

        // Height and contacts from kinematics under the measured attitude.
        let poses = forward_kinematics(&self.model, q.as_slice())
            .expect("payload joint count checked by caller");
        let mut min_z = f64::INFINITY;
        let mut link_min_z = vec![f64::INFINITY; self.model.links.len()];
        for (li, link) in self.model.links.iter().enumerate() {
            if let Some(col) = &link.collision {
                for p in sample_points(col) {
                    let world = quat * (poses[li] * Point3::from(p)).coords;
                    min_z = min_z.min(world.z);
                    link_min_z[li] = link_min_z[li].min(world.z);
                }
            }
        }
        let height = if min_z.is_finite() { -min_z } else { 0.0 };

        let mut contacts = Vec::new();
        for (li, z) in link_min_z.iter().enumerate() {
            if z.is_finite() && z + height <= CONTACT_BAND {
                contacts.push(Contact {
                    link: li,
                    point: Vector3::new(0.0, 0.0, 0.0),
                    normal: Vector3::z(),
                    force: Vector3::new(0.0, 0.0, 1.0),
                });
            }
        }

        let dof = q.len();
        SimState {
            base_pos: Vector3::new(0.0, 0.0, height),
            base_quat: quat,
            base_lin_vel: self.v_world,
            base_ang_vel: quat * gyro,
            q,
            qd,
            time: t_us as f64 * 1e-6,
            contacts,
            last_applied_torques: DVector::zeros(dof),
            base_lin_acc: a_world,
            fault: false,
        }
    }
}
