//! Reduced-coordinate articulated rigid-body simulation with a floating
//! base, PD joint actuation, penalty contacts against parametric terrain,
//! and fixed-step semi-implicit Euler integration.

mod contact;
mod dynamics;
pub mod spatial;
mod stepper;

pub use contact::{contact_forces, sample_points, terrain_height};
pub use dynamics::forward_dynamics_aba;
pub use stepper::{build_sim, pd_torques, step};

use nalgebra::{DVector, Isometry3, Matrix6, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{JointKind, RobotModel};


#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("model failed validation: {0}")]
    ModelInvalid(String),
    #[error("model has no actuated joints")]
    ZeroDof,
    #[error("expected vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),
}

/// Build-time randomization: one mass multiplier and one friction value are
/// drawn per instance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Randomization {
    /// Uniform mass multiplier range as a fraction, e.g. 0.1 for +/-10%.
    pub mass_pct: f64,
    pub friction_range: (f64, f64),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub gravity: [f64; 3],
    pub dt_physics: f64,
    pub substeps_per_control: u32,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub friction_mu: f64,
    pub randomization: Option<Randomization>,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            gravity: [0.0, 0.0, -9.81],
            dt_physics: 0.002,
            substeps_per_control: 10,
            contact_stiffness: 2e4,
            contact_damping: 2e2,
            friction_mu: 0.8,
            randomization: None,
        }
    }
}

impl SimParams {
    pub fn control_dt(&self) -> f64 {
        self.dt_physics * self.substeps_per_control as f64
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.dt_physics > 0.0) {
            return Err(PhysicsError::NonFiniteInput("dt_physics"));
        }
        if self.substeps_per_control < 1 {
            return Err(PhysicsError::NonFiniteInput("substeps_per_control"));
        }
        if self.contact_stiffness < 0.0 || self.contact_damping < 0.0 {
            return Err(PhysicsError::NonFiniteInput("contact gains"));
        }
        if !(0.0..=2.0).contains(&self.friction_mu) {
            return Err(PhysicsError::NonFiniteInput("friction_mu"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Terrain {
    Flat {
        #[serde(default)]
        friction: Option<f64>,
    },
    Stairs {
        step_rise: f64,
        step_run: f64,
        num_steps: u32,
        #[serde(default)]
        friction: Option<f64>,
    },
}

impl Default for Terrain {
    fn default() -> Self {
        Terrain::Flat { friction: None }
    }
}

impl Terrain {
    pub fn friction_override(&self) -> Option<f64> {
        match self {
            Terrain::Flat { friction } => *friction,
            Terrain::Stairs { friction, .. } => *friction,
        }
    }
}

/// How the PD servo interprets each channel of the command vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActuationMode {
    /// Command is a position target (rad | m).
    Position,
    /// Command is a velocity target (rad/s); used for wheel channels.
    Velocity,
}

/// Per-DOF servo configuration supplied at build time.
#[derive(Debug, Clone)]
pub struct Actuation {
    pub kp: Vec<f64>,
    pub kd: Vec<f64>,
    pub modes: Vec<ActuationMode>,
}

impl Actuation {
    /// Position servos with identical gains on every channel.
    pub fn uniform(dof: usize, kp: f64, kd: f64) -> Self {
        Actuation {
            kp: vec![kp; dof],
            kd: vec![kd; dof],
            modes: vec![ActuationMode::Position; dof],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub link: usize,
    /// World-frame contact point.
    pub point: Vector3<f64>,
    pub normal: Vector3<f64>,
    /// World-frame force applied to the link at `point`.
    pub force: Vector3<f64>,
}

/// Full dynamic state of one simulated robot instance. Owned by exactly one
/// rollout worker at a time; `step` never mutates in place.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub base_pos: Vector3<f64>,
    pub base_quat: UnitQuaternion<f64>,
    /// World-frame linear velocity of the base origin.
    pub base_lin_vel: Vector3<f64>,
    /// World-frame angular velocity.
    pub base_ang_vel: Vector3<f64>,
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub time: f64,
    pub contacts: Vec<Contact>,
    pub last_applied_torques: DVector<f64>,
    /// World-frame classical acceleration of the base origin from the last
    /// substep; what an accelerometer at the base would integrate.
    pub base_lin_acc: Vector3<f64>,
    /// Set once a NaN/Inf appears; the state froze at the last finite value.
    pub fault: bool,
}

impl SimState {
    /// Direction of gravity expressed in the base frame (unit vector).
    pub fn gravity_in_base(&self) -> Vector3<f64> {
        self.base_quat.inverse() * Vector3::new(0.0, 0.0, -1.0)
    }

    /// Angle between the base z axis and world up.
    pub fn tilt_angle(&self) -> f64 {
        let up = self.base_quat * Vector3::z();
        up.z.clamp(-1.0, 1.0).acos()
    }

    /// True if any recorded contact sits on `link`.
    pub fn link_in_contact(&self, link: usize) -> bool {
        self.contacts.iter().any(|c| c.link == link)
    }
}

pub(crate) struct JointSim {
    pub parent: usize,
    pub child: usize,
    pub origin: Isometry3<f64>,
    pub kind: JointKind,
    pub axis: Vector3<f64>,
    /// Index into q/qd for non-fixed joints.
    pub dof: Option<usize>,
}

/// Per-DOF limits resolved from the model.
#[derive(Debug, Clone)]
pub struct DofInfo {
    pub joint_idx: usize,
    pub limits: Option<(f64, f64)>,
    pub effort_limit: f64,
    pub velocity_limit: f64,
    pub damping: f64,
}

/// Immutable simulation setup shared by any number of threads. All mutable
/// state lives in `SimState`.
pub struct SimContext {
    pub model: RobotModel,
    pub params: SimParams,
    pub terrain: Terrain,
    pub dof: usize,
    pub dofs: Vec<DofInfo>,
    pub actuation: Actuation,
    /// Resolved friction coefficient (params, terrain override, then
    /// randomization, in increasing precedence).
    pub friction: f64,
    /// Mass multiplier drawn at build time (1.0 without randomization).
    pub mass_multiplier: f64,
    pub gravity: Vector3<f64>,
    /// When set, the base is welded to the world; used by validation rigs.
    pub fixed_base: bool,
    pub(crate) joints_topo: Vec<JointSim>,
    /// mass, com (link frame), inertia about com (link frame), all after the
    /// mass multiplier.
    pub(crate) bodies: Vec<BodyParams>,
    /// Collision sample points per link, in the link frame.
    pub(crate) samples: Vec<Vec<Vector3<f64>>>,
}

pub(crate) struct BodyParams {
    pub mass: f64,
    pub com: Vector3<f64>,
    pub spatial_inertia: Matrix6<f64>,
}

/// World pose and twist of every link, recomputed each substep.
pub(crate) struct LinkKinematics {
    pub pose: Vec<Isometry3<f64>>,
    /// World angular velocity per link.
    pub omega: Vec<Vector3<f64>>,
    /// World linear velocity of each link origin.
    pub vel: Vec<Vector3<f64>>,
}

impl SimContext {
    pub(crate) fn kinematics(&self, state: &SimState) -> LinkKinematics {
        let n = self.model.links.len();
        let mut pose = vec![Isometry3::identity(); n];
        let mut omega = vec![Vector3::zeros(); n];
        let mut vel = vec![Vector3::zeros(); n];
        let root = self.model.root_link;
        pose[root] = Isometry3::from_parts(state.base_pos.into(), state.base_quat);
        omega[root] = state.base_ang_vel;
        vel[root] = state.base_lin_vel;
        for js in &self.joints_topo {
            let parent_pose = pose[js.parent];
            let (motion, wj, vj) = match js.kind {
                JointKind::Fixed => (Isometry3::identity(), Vector3::zeros(), Vector3::zeros()),
                JointKind::Revolute | JointKind::Continuous => {
                    let d = js.dof.unwrap();
                    let rot = UnitQuaternion::from_axis_angle(
                        &nalgebra::Unit::new_unchecked(js.axis),
                        state.q[d],
                    );
                    (
                        Isometry3::from_parts(nalgebra::Translation3::identity(), rot),
                        js.axis * state.qd[d],
                        Vector3::zeros(),
                    )
                }
                JointKind::Prismatic => {
                    let d = js.dof.unwrap();
                    (
                        Isometry3::from_parts(
                            nalgebra::Translation3::from(js.axis * state.q[d]),
                            UnitQuaternion::identity(),
                        ),
                        Vector3::zeros(),
                        js.axis * state.qd[d],
                    )
                }
            };
            let child_pose = parent_pose * js.origin * motion;
            // Joint frame orientation in world: parent pose * origin rotation.
            let joint_rot = parent_pose.rotation * js.origin.rotation;
            let w_world = joint_rot * wj;
            let v_world = joint_rot * vj;
            pose[js.child] = child_pose;
            omega[js.child] = omega[js.parent] + w_world;
            let arm = child_pose.translation.vector - parent_pose.translation.vector;
            vel[js.child] = vel[js.parent] + omega[js.parent].cross(&arm) + v_world;
        }
        LinkKinematics { pose, omega, vel }
    }

    /// Lowest height of any collision sample point above the terrain.
    pub fn clearance(&self, state: &SimState) -> f64 {
        self.min_clearance(&self.kinematics(state))
    }

    pub(crate) fn min_clearance(&self, kin: &LinkKinematics) -> f64 {
        let mut min = f64::INFINITY;
        for (li, pts) in self.samples.iter().enumerate() {
            for p in pts {
                let w = kin.pose[li] * nalgebra::Point3::from(*p);
                let (h, _) = terrain_height(&self.terrain, w.x, w.y);
                min = min.min(w.z - h);
            }
        }
        min
    }
}
