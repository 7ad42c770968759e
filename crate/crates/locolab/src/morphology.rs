//! Auto-configuration: classify a robot's morphology, extract its leg and
//! wheel chains, derive the default pose, and fill a complete training
//! configuration for the selected motion mode.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{forward_kinematics, JointKind, RobotModel};
use crate::physics::sample_points;
use crate::reward::RewardWeights;

#[derive(Debug, Error)]
pub enum MorphologyError {
    #[error("model does not match the requested type: {0}")]
    StructureMismatch(String),
    #[error("task '{task}' is not in the menu for {robot_type}")]
    InvalidTask { robot_type: RobotType, task: Task },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RobotType {
    Biped,
    Quadruped,
    LegWheeled,
}

impl std::fmt::Display for RobotType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RobotType::Biped => write!(f, "biped"),
            RobotType::Quadruped => write!(f, "quadruped"),
            RobotType::LegWheeled => write!(f, "leg-wheeled"),
        }
    }
}

impl std::str::FromStr for RobotType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "biped" => Ok(RobotType::Biped),
            "quadruped" => Ok(RobotType::Quadruped),
            "leg-wheeled" | "legwheeled" | "leg_wheeled" => Ok(RobotType::LegWheeled),
            other => Err(format!("unknown robot type '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Walk,
    Run,
    Jump,
    Trot,
    Bound,
    Pronk,
    Drive,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Task::Walk => "walk",
            Task::Run => "run",
            Task::Jump => "jump",
            Task::Trot => "trot",
            Task::Bound => "bound",
            Task::Pronk => "pronk",
            Task::Drive => "drive",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "walk" => Ok(Task::Walk),
            "run" => Ok(Task::Run),
            "jump" => Ok(Task::Jump),
            "trot" => Ok(Task::Trot),
            "bound" => Ok(Task::Bound),
            "pronk" => Ok(Task::Pronk),
            "drive" => Ok(Task::Drive),
            other => Err(format!("unknown task '{other}'")),
        }
    }
}

impl Task {
    /// Periodic tasks carry a gait clock; jump and drive do not oscillate.
    pub fn is_periodic(&self) -> bool {
        matches!(self, Task::Walk | Task::Run | Task::Trot | Task::Bound | Task::Pronk)
    }
}

/// Motion modes available for a robot type.
pub fn task_menu(robot_type: RobotType) -> Vec<Task> {
    match robot_type {
        RobotType::Biped => vec![Task::Walk, Task::Run, Task::Jump],
        RobotType::Quadruped => vec![Task::Trot, Task::Bound, Task::Pronk],
        RobotType::LegWheeled => vec![Task::Drive, Task::Walk, Task::Jump],
    }
}

/// Classification verdict; `robot_type` is `None` when the structure fits
/// no known category. User selection always overrides the suggestion.
#[derive(Debug, Clone)]
pub struct Classification {
    pub robot_type: Option<RobotType>,
    pub rationale: String,
}

/// One leg: the chain of actuated joints from the base outward, the link
/// whose collision geometry touches the ground, and the roles assigned to
/// the chain's pitch joints.
#[derive(Debug, Clone)]
pub struct LegChain {
    /// Joint indices, base outward, non-fixed only.
    pub joints: Vec<usize>,
    pub foot_link: usize,
    /// DOF index of the hip pitch joint, if identified.
    pub hip_dof: Option<usize>,
    pub knee_dof: Option<usize>,
    /// DOF index of the terminal wheel joint, if this leg ends in one.
    pub wheel_dof: Option<usize>,
    /// Direction of hip motion that advances the foot (+x), and of knee
    /// motion that lifts it (+z), measured at the default pose.
    pub hip_sign: f64,
    pub knee_sign: f64,
}

#[derive(Debug, Clone)]
pub struct MorphologyProfile {
    pub robot_type: RobotType,
    /// Ordered front-to-back, left before right (FL, FR, RL, RR).
    pub legs: Vec<LegChain>,
    /// Joint indices of wheel joints across all legs.
    pub wheel_joints: Vec<usize>,
    pub foot_links: Vec<usize>,
    pub default_pose_q0: Vec<f64>,
    /// Base height above the lowest foot point at the default pose.
    pub standing_height: f64,
    /// Radius of the first wheel's collision shape (0 when wheelless).
    pub wheel_radius: f64,
}

impl MorphologyProfile {
    pub fn wheel_dofs(&self) -> Vec<usize> {
        self.legs.iter().filter_map(|l| l.wheel_dof).collect()
    }
}

struct RawChain {
    joints: Vec<usize>,
    foot_link: usize,
    foot_lowest_z: f64,
    ends_in_wheel: bool,
}

/// Walks every root-to-leaf path, collapsing fixed joints, and returns the
/// distinct actuated chains with their ground-end links.
fn raw_chains(model: &RobotModel) -> Vec<RawChain> {
    let zeros = vec![0.0; model.dof()];
    let poses = forward_kinematics(model, &zeros).expect("dof-sized zero vector");

    let lowest_z = |link: usize| -> f64 {
        match &model.links[link].collision {
            Some(col) => sample_points(col)
                .iter()
                .map(|p| (poses[link] * nalgebra::Point3::from(*p)).z)
                .fold(f64::INFINITY, f64::min),
            None => poses[link].translation.z,
        }
    };

    let leaves: Vec<usize> =
        (0..model.links.len()).filter(|&l| model.child_joints_of(l).is_empty()).collect();

    let mut chains: Vec<RawChain> = Vec::new();
    for leaf in leaves {
        let mut joints_up = Vec::new();
        let mut cur = leaf;
        while let Some(ji) = model.parent_joint_of(cur) {
            if model.joints[ji].is_actuated() {
                joints_up.push(ji);
            }
            cur = model.joints[ji].parent;
        }
        if joints_up.is_empty() {
            continue;
        }
        joints_up.reverse();
        let z = lowest_z(leaf);
        match chains.iter_mut().find(|c| c.joints == joints_up) {
            // Several leaves can hang off one actuated chain (foot plus a
            // sensor, say); keep the lowest one as the foot.
            Some(existing) => {
                if z < existing.foot_lowest_z {
                    existing.foot_link = leaf;
                    existing.foot_lowest_z = z;
                }
            }
            None => {
                let last = *joints_up.last().unwrap();
                let j = &model.joints[last];
                let axis_world = poses[j.parent].rotation * model.joints[last].origin.rotation()
                    * j.axis;
                let ends_in_wheel =
                    j.kind == JointKind::Continuous && axis_world.z.abs() <= 0.2;
                chains.push(RawChain {
                    joints: joints_up,
                    foot_link: leaf,
                    foot_lowest_z: z,
                    ends_in_wheel,
                });
            }
        }
    }
    chains
}

/// Heuristic morphology suggestion: counts actuated chains of length >= 2
/// that reach down to within 20% of the model's vertical extent of its
/// lowest point ("legs") and chains ending in a horizontal-axis continuous
/// joint ("wheels").
pub fn classify(model: &RobotModel) -> Classification {
    let zeros = vec![0.0; model.dof()];
    let poses = forward_kinematics(model, &zeros).expect("dof-sized zero vector");

    let mut z_min = f64::INFINITY;
    let mut z_max = f64::NEG_INFINITY;
    for (li, link) in model.links.iter().enumerate() {
        if let Some(col) = &link.collision {
            for p in sample_points(col) {
                let z = (poses[li] * nalgebra::Point3::from(p)).z;
                z_min = z_min.min(z);
                z_max = z_max.max(z);
            }
        }
    }
    if !z_min.is_finite() {
        return Classification {
            robot_type: None,
            rationale: "no collision geometry to stand on".into(),
        };
    }
    let extent = (z_max - z_min).max(1e-6);

    let chains = raw_chains(model);
    let legs = chains
        .iter()
        .filter(|c| c.joints.len() >= 2 && c.foot_lowest_z <= z_min + 0.2 * extent)
        .count();
    let wheels = chains.iter().filter(|c| c.ends_in_wheel).count();

    let rationale = format!("{legs} ground-reaching chains, {wheels} wheel chains");
    let robot_type = if wheels >= 2 {
        Some(RobotType::LegWheeled)
    } else if legs == 2 && wheels == 0 {
        Some(RobotType::Biped)
    } else if legs == 4 && wheels == 0 {
        Some(RobotType::Quadruped)
    } else {
        None
    };
    Classification { robot_type, rationale }
}

/// Extracts the leg/wheel structure required by `robot_type`, derives the
/// default pose (limit midpoints, knees biased 30% of range into flexion,
/// wheels at zero), and orders legs front-first then left-first by their
/// foot positions at that pose.
pub fn extract_profile(
    model: &RobotModel,
    robot_type: RobotType,
) -> Result<MorphologyProfile, MorphologyError> {
    let zeros = vec![0.0; model.dof()];
    let poses0 = forward_kinematics(model, &zeros).expect("dof-sized zero vector");

    let mut z_min = f64::INFINITY;
    let mut z_max = f64::NEG_INFINITY;
    for (li, link) in model.links.iter().enumerate() {
        if let Some(col) = &link.collision {
            for p in sample_points(col) {
                let z = (poses0[li] * nalgebra::Point3::from(p)).z;
                z_min = z_min.min(z);
                z_max = z_max.max(z);
            }
        }
    }
    let extent = (z_max - z_min).max(1e-6);

    let chains = raw_chains(model);
    let mut legs: Vec<RawChain> = chains
        .into_iter()
        .filter(|c| {
            c.joints.len() >= 2
                && (c.ends_in_wheel
                    || !z_min.is_finite()
                    || c.foot_lowest_z <= z_min + 0.2 * extent)
        })
        .collect();
    let wheels: usize = legs.iter().filter(|c| c.ends_in_wheel).count();

    let ok = match robot_type {
        RobotType::Biped => legs.len() == 2 && wheels == 0,
        RobotType::Quadruped => legs.len() == 4 && wheels == 0,
        RobotType::LegWheeled => legs.len() >= 2 && wheels >= 2,
    };
    if !ok {
        return Err(MorphologyError::StructureMismatch(format!(
            "found {} leg chains with {} wheels",
            legs.len(),
            wheels
        )));
    }

    let dof_of_joint: Vec<Option<usize>> = {
        let mut v = vec![None; model.joints.len()];
        for (d, ji) in model.actuated_joints().into_iter().enumerate() {
            v[ji] = Some(d);
        }
        v
    };

    // Pitch-axis joints (axis within 45 degrees of +/-y at q = 0) take the
    // hip and knee roles in chain order; the terminal continuous joint of a
    // wheel chain is the wheel.
    let mut leg_chains: Vec<LegChain> = legs
        .iter_mut()
        .map(|c| {
            let wheel_joint =
                if c.ends_in_wheel { Some(*c.joints.last().unwrap()) } else { None };
            let mut pitch = Vec::new();
            for &ji in &c.joints {
                if Some(ji) == wheel_joint {
                    continue;
                }
                let j = &model.joints[ji];
                let axis_world =
                    poses0[j.parent].rotation * j.origin.rotation() * j.axis;
                if axis_world.y.abs() >= std::f64::consts::FRAC_1_SQRT_2 {
                    pitch.push(ji);
                }
            }
            let (hip_j, knee_j) = match (pitch.first(), pitch.get(1)) {
                (Some(&h), Some(&k)) => (Some(h), Some(k)),
                _ => {
                    let non_wheel: Vec<usize> =
                        c.joints.iter().copied().filter(|&j| Some(j) != wheel_joint).collect();
                    (non_wheel.first().copied(), non_wheel.get(1).copied())
                }
            };
            LegChain {
                joints: c.joints.clone(),
                foot_link: c.foot_link,
                hip_dof: hip_j.and_then(|j| dof_of_joint[j]),
                knee_dof: knee_j.and_then(|j| dof_of_joint[j]),
                wheel_dof: wheel_joint.and_then(|j| dof_of_joint[j]),
                hip_sign: 1.0,
                knee_sign: 1.0,
            }
        })
        .collect();

    // Default pose from the limits rule.
    let wheel_dofs: Vec<usize> = leg_chains.iter().filter_map(|l| l.wheel_dof).collect();
    let knee_dofs: Vec<usize> = leg_chains.iter().filter_map(|l| l.knee_dof).collect();
    let mut q0 = vec![0.0; model.dof()];
    for (d, ji) in model.actuated_joints().into_iter().enumerate() {
        if wheel_dofs.contains(&d) {
            q0[d] = 0.0;
            continue;
        }
        let Some((lo, hi)) = model.joints[ji].effective_limits() else {
            q0[d] = 0.0;
            continue;
        };
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        q0[d] = if knee_dofs.contains(&d) {
            let dir = if mid >= 0.0 { 1.0 } else { -1.0 };
            (mid + dir * 0.3 * half).clamp(lo, hi)
        } else {
            mid
        };
    }

    let poses_q0 = forward_kinematics(model, &q0).expect("q0 sized by construction");

    // Order legs front-first (x descending), then left-first (y descending),
    // by foot link position at the default pose; names break exact ties so
    // the ordering is independent of URDF declaration order.
    leg_chains.sort_by(|a, b| {
        let pa = poses_q0[a.foot_link].translation.vector;
        let pb = poses_q0[b.foot_link].translation.vector;
        pb.x.partial_cmp(&pa.x)
            .unwrap()
            .then(pb.y.partial_cmp(&pa.y).unwrap())
            .then(model.links[a.foot_link].name.cmp(&model.links[b.foot_link].name))
    });

    // Swing direction signs from finite-difference sensitivities of the
    // foot's lowest collision point (the part that touches the ground).
    let eps = 1e-5;
    for leg in &mut leg_chains {
        let foot_point = lowest_local_point(model, &q0, leg.foot_link);
        if let Some(h) = leg.hip_dof {
            leg.hip_sign = fd_sign(model, &q0, h, leg.foot_link, &foot_point, 0, eps);
        }
        if let Some(k) = leg.knee_dof {
            leg.knee_sign = fd_sign(model, &q0, k, leg.foot_link, &foot_point, 2, eps);
        }
    }

    let foot_links: Vec<usize> = leg_chains.iter().map(|l| l.foot_link).collect();
    let mut foot_lowest = f64::INFINITY;
    for &fl in &foot_links {
        if let Some(col) = &model.links[fl].collision {
            for p in sample_points(col) {
                foot_lowest = foot_lowest.min((poses_q0[fl] * nalgebra::Point3::from(p)).z);
            }
        } else {
            foot_lowest = foot_lowest.min(poses_q0[fl].translation.z);
        }
    }
    let standing_height = -foot_lowest;

    let wheel_joints: Vec<usize> = leg_chains
        .iter()
        .filter_map(|l| l.wheel_dof)
        .map(|d| model.actuated_joints()[d])
        .collect();
    let wheel_radius = wheel_joints
        .first()
        .and_then(|&ji| model.links[model.joints[ji].child].collision.as_ref())
        .map(|c| match c.shape {
            crate::model::Shape::Cylinder { radius, .. }
            | crate::model::Shape::Capsule { radius, .. }
            | crate::model::Shape::Sphere { radius } => radius,
            crate::model::Shape::Box { size } => size.min() / 2.0,
        })
        .unwrap_or(0.0);

    Ok(MorphologyProfile {
        robot_type,
        legs: leg_chains,
        wheel_joints,
        foot_links,
        default_pose_q0: q0,
        standing_height,
        wheel_radius,
    })
}

/// Link-frame position of the lowest collision sample point at q0; the
/// link origin when the link has no collision shape.
fn lowest_local_point(model: &RobotModel, q0: &[f64], link: usize) -> nalgebra::Vector3<f64> {
    let poses = forward_kinematics(model, q0).unwrap();
    match &model.links[link].collision {
        Some(col) => sample_points(col)
            .into_iter()
            .min_by(|a, b| {
                let za = (poses[link] * nalgebra::Point3::from(*a)).z;
                let zb = (poses[link] * nalgebra::Point3::from(*b)).z;
                za.partial_cmp(&zb).unwrap()
            })
            .unwrap_or_else(nalgebra::Vector3::zeros),
        None => nalgebra::Vector3::zeros(),
    }
}

/// Sign of d(foot point[coord]) / d(q[dof]) at q0 via central differences.
fn fd_sign(
    model: &RobotModel,
    q0: &[f64],
    dof: usize,
    foot_link: usize,
    foot_point: &nalgebra::Vector3<f64>,
    coord: usize,
    eps: f64,
) -> f64 {
    let mut qp = q0.to_vec();
    let mut qm = q0.to_vec();
    qp[dof] += eps;
    qm[dof] -= eps;
    let pp = forward_kinematics(model, &qp).unwrap()[foot_link] * nalgebra::Point3::from(*foot_point);
    let pm = forward_kinematics(model, &qm).unwrap()[foot_link] * nalgebra::Point3::from(*foot_point);
    let d = pp[coord] - pm[coord];
    if d >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Gait feedforward parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FfParams {
    /// 0 for aperiodic modes (jump, drive).
    pub frequency_hz: f64,
    /// Fraction of the cycle each foot is scheduled in stance.
    pub duty_factor: f64,
    /// Per-DOF swing amplitudes (rad); zero outside hip/knee channels.
    pub amplitudes: Vec<f64>,
    /// Per-leg phase offsets in [0, 1).
    pub phase_offsets: Vec<f64>,
    /// Swing profile selector; 0 is the raised-cosine pulse.
    pub swing_shape: u8,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Curriculum {
    /// Blend step size per episode.
    pub eta: f64,
    /// Performance threshold gating progression.
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CommandRanges {
    pub vx: (f64, f64),
    pub vy: (f64, f64),
    pub yaw_rate: (f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PpoHyper {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_eps: f64,
    pub epochs: usize,
    pub minibatches: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub learning_rate: f64,
    pub num_envs: usize,
    pub steps_per_env: usize,
    pub hidden: (usize, usize),
    /// Rollout worker threads; results are identical for any value.
    pub workers: usize,
}

impl Default for PpoHyper {
    fn default() -> Self {
        PpoHyper {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_eps: 0.2,
            epochs: 5,
            minibatches: 4,
            entropy_coef: 0.005,
            value_coef: 0.5,
            learning_rate: 3e-4,
            num_envs: 16,
            steps_per_env: 256,
            hidden: (128, 128),
            workers: 4,
        }
    }
}

/// Everything the trainer needs for one (robot, task) pair. Produced by
/// `auto_configure`; any field may be overridden by the run config file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub task: Task,
    pub feedforward: FfParams,
    /// Per-DOF residual scale (rad; rad/s on wheel channels in drive mode).
    pub action_scale: Vec<f64>,
    pub kp: Vec<f64>,
    pub kd: Vec<f64>,
    pub reward_weights_init: RewardWeights,
    pub reward_weights_final: RewardWeights,
    pub curriculum: Curriculum,
    pub command_ranges: CommandRanges,
    /// When false (jump), the linear-velocity kernel tracks vx only.
    pub lin_vel_tracks_vy: bool,
    pub ppo: PpoHyper,
    pub episode_length_s: f64,
}

/// Fills every training field from the built-in per-task tables, scaled by
/// the robot's structure (PD gains from per-leg mass, wheels switched to
/// velocity channels in drive mode).
pub fn auto_configure(
    model: &RobotModel,
    profile: &MorphologyProfile,
    task: Task,
) -> Result<TrainConfig, MorphologyError> {
    if !task_menu(profile.robot_type).contains(&task) {
        return Err(MorphologyError::InvalidTask { robot_type: profile.robot_type, task });
    }
    let dof = model.dof();
    let n_legs = profile.legs.len();

    let (frequency_hz, duty_factor) = match task {
        Task::Walk | Task::Trot => (1.5, 0.6),
        Task::Run | Task::Bound => (2.5, 0.45),
        Task::Pronk => (2.0, 0.4),
        Task::Drive | Task::Jump => (0.0, 1.0),
    };

    let phase_offsets: Vec<f64> = match (task, n_legs) {
        (Task::Pronk, n) => vec![0.0; n],
        (Task::Bound, 4) => vec![0.0, 0.0, 0.5, 0.5],
        (Task::Trot, 4) => vec![0.0, 0.5, 0.5, 0.0],
        (Task::Walk | Task::Run, 2) => vec![0.0, 0.5],
        // Leg-wheeled walk reuses the gait for its leg count; anything else
        // alternates halves.
        (Task::Walk | Task::Run, 4) => vec![0.0, 0.5, 0.5, 0.0],
        (_, n) => (0..n).map(|i| if i % 2 == 0 { 0.0 } else { 0.5 }).collect(),
    };

    let mut amplitudes = vec![0.0; dof];
    for leg in &profile.legs {
        if let Some(h) = leg.hip_dof {
            amplitudes[h] = 0.3;
        }
        if let Some(k) = leg.knee_dof {
            amplitudes[k] = 0.5;
        }
    }

    let wheel_dofs = profile.wheel_dofs();
    let mut action_scale = vec![0.5; dof];
    if task == Task::Drive {
        for &d in &wheel_dofs {
            action_scale[d] = 5.0;
        }
    }

    let mass_per_leg = model.total_mass() / n_legs.max(1) as f64;
    let kp_val = 20.0 * mass_per_leg;
    let kp = vec![kp_val; dof];
    let kd = vec![kp_val / 20.0; dof];

    let periodic = task.is_periodic();
    let jump = task == Task::Jump;
    let reward_weights_init = RewardWeights {
        alive: 1.0,
        upright: 1.0,
        height: 0.5,
        lin_vel: 0.2,
        yaw_rate: 0.1,
        torque: 1e-4,
        action_rate: 0.01,
        gait_match: 0.0,
        jump_apex: 0.0,
    };
    let reward_weights_final = RewardWeights {
        alive: 0.5,
        upright: 0.5,
        height: 0.5,
        lin_vel: 1.5,
        yaw_rate: 0.75,
        torque: 1e-4,
        action_rate: 0.01,
        gait_match: if periodic { 0.5 } else { 0.0 },
        jump_apex: if jump { 2.0 } else { 0.0 },
    };
    // Jump starts with its apex bonus live so the curriculum has something
    // to work toward from the first episode.
    let reward_weights_init = if jump {
        RewardWeights { jump_apex: 0.5, ..reward_weights_init }
    } else {
        reward_weights_init
    };

    let command_ranges = match task {
        Task::Trot | Task::Walk => {
            CommandRanges { vx: (0.0, 0.6), vy: (-0.15, 0.15), yaw_rate: (-0.4, 0.4) }
        }
        Task::Run | Task::Bound => {
            CommandRanges { vx: (0.2, 0.8), vy: (-0.1, 0.1), yaw_rate: (-0.3, 0.3) }
        }
        Task::Pronk => CommandRanges { vx: (0.0, 0.4), vy: (-0.1, 0.1), yaw_rate: (-0.3, 0.3) },
        Task::Drive => CommandRanges { vx: (-1.0, 1.0), vy: (0.0, 0.0), yaw_rate: (-1.0, 1.0) },
        Task::Jump => CommandRanges { vx: (0.0, 0.0), vy: (0.0, 0.0), yaw_rate: (0.0, 0.0) },
    };

    Ok(TrainConfig {
        task,
        feedforward: FfParams {
            frequency_hz,
            duty_factor,
            amplitudes,
            phase_offsets,
            swing_shape: 0,
        },
        action_scale,
        kp,
        kd,
        reward_weights_init,
        reward_weights_final,
        curriculum: Curriculum { eta: 0.01, tau: 0.5 },
        command_ranges,
        lin_vel_tracks_vy: !jump,
        ppo: PpoHyper::default(),
        episode_length_s: 5.0,
    })
}

/// PD servo setup for a task: wheels become velocity channels in drive mode.
pub fn actuation_for(
    profile: &MorphologyProfile,
    config: &TrainConfig,
) -> crate::physics::Actuation {
    let dof = config.kp.len();
    let mut modes = vec![crate::physics::ActuationMode::Position; dof];
    if config.task == Task::Drive {
        for d in profile.wheel_dofs() {
            modes[d] = crate::physics::ActuationMode::Velocity;
        }
    }
    crate::physics::Actuation { kp: config.kp.clone(), kd: config.kd.clone(), modes }
}
