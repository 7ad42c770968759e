//! Feedforward reference motion and the action composition: the command
//! sent to the robot is the gait feedforward plus the policy residual
//! scaled per channel, clamped into the joint limits.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::model::ModelError;
use crate::morphology::{MorphologyProfile, Task, TrainConfig};
use crate::physics::{ActuationMode, DofInfo};

/// Velocity command the policy is asked to track.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub vx: f64,
    pub vy: f64,
    pub yaw_rate: f64,
}

impl Command {
    pub fn zero() -> Self {
        Command { vx: 0.0, vy: 0.0, yaw_rate: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpStage {
    Idle,
    Crouch,
    Extend,
    Flight,
    Land,
}

/// Jump stage durations in seconds; flight lasts until touchdown with a
/// failsafe cap, and idle pads the cycle to roughly two seconds.
pub const CROUCH_S: f64 = 0.3;
pub const EXTEND_S: f64 = 0.15;
pub const FLIGHT_MIN_S: f64 = 0.05;
pub const FLIGHT_MAX_S: f64 = 1.0;
pub const LAND_S: f64 = 0.3;
pub const IDLE_S: f64 = 1.0;

/// Phase state for the selected motion mode: a wrapping phase for periodic
/// gaits, a stage machine for jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitClock {
    /// In [0, 1); frozen when `frequency` is 0.
    pub phase: f64,
    pub frequency: f64,
    /// Seconds spent in the current jump stage.
    pub jump_timer: f64,
    pub jump_stage: JumpStage,
}

impl GaitClock {
    pub fn new(frequency: f64) -> Self {
        GaitClock { phase: 0.0, frequency, jump_timer: 0.0, jump_stage: JumpStage::Idle }
    }

    pub fn with_phase(frequency: f64, phase: f64) -> Self {
        GaitClock { phase: phase.rem_euclid(1.0), ..Self::new(frequency) }
    }
}

/// Advances the clock by `dt`. Periodic gaits wrap phase; the jump machine
/// walks idle -> crouch -> extend -> flight -> land -> idle, leaving flight
/// on touchdown (`grounded`) after a debounce, or at the failsafe timeout.
pub fn advance_clock(clock: &GaitClock, dt: f64, grounded: bool) -> GaitClock {
    let mut next = *clock;
    if dt <= 0.0 {
        return next;
    }
    next.phase = (clock.phase + clock.frequency * dt).rem_euclid(1.0);
    next.jump_timer += dt;
    let (stage, reset) = match clock.jump_stage {
        JumpStage::Idle if next.jump_timer >= IDLE_S => (JumpStage::Crouch, true),
        JumpStage::Crouch if next.jump_timer >= CROUCH_S => (JumpStage::Extend, true),
        JumpStage::Extend if next.jump_timer >= EXTEND_S => (JumpStage::Flight, true),
        JumpStage::Flight
            if (next.jump_timer >= FLIGHT_MIN_S && grounded)
                || next.jump_timer >= FLIGHT_MAX_S =>
        {
            (JumpStage::Land, true)
        }
        JumpStage::Land if next.jump_timer >= LAND_S => (JumpStage::Idle, true),
        stage => (stage, false),
    };
    next.jump_stage = stage;
    if reset {
        next.jump_timer = 0.0;
    }
    next
}

/// Joint-space reference for one control tick.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedforwardSignal {
    /// Position targets (rad | m); velocity targets (rad/s) on wheel
    /// channels in drive mode.
    pub q_ff: DVector<f64>,
    /// Expected stance flag per foot, in leg order.
    pub contact_schedule: Vec<bool>,
}

/// Raised-cosine pulse: 0 at the ends of the swing window, 1 at its middle.
fn swing_pulse(s: f64) -> f64 {
    0.5 * (1.0 - (2.0 * std::f64::consts::PI * s).cos())
}

/// Builds the feedforward targets for the current clock and command.
/// Periodic gaits hold the default pose in stance and pulse hip/knee
/// flexion in swing; drive streams wheel velocities; jump plays the stage
/// poses. Targets are clamped into the joint limits.
pub fn ff_signal(
    profile: &MorphologyProfile,
    config: &TrainConfig,
    clock: &GaitClock,
    command: Command,
    dof_limits: &[Option<(f64, f64)>],
) -> FeedforwardSignal {
    let dof = profile.default_pose_q0.len();
    let mut q_ff = DVector::from_column_slice(&profile.default_pose_q0);
    let mut schedule = vec![true; profile.legs.len()];
    let ff = &config.feedforward;

    match config.task {
        Task::Drive => {
            let wheel_speed = if profile.wheel_radius > 0.0 {
                command.vx / profile.wheel_radius
            } else {
                0.0
            };
            for d in profile.wheel_dofs() {
                q_ff[d] = wheel_speed;
            }
        }
        Task::Jump => {
            for leg in &profile.legs {
                let (hip_off, knee_off) = match clock.jump_stage {
                    JumpStage::Idle => (0.0, 0.0),
                    JumpStage::Crouch => (0.0, 1.0),
                    JumpStage::Extend => (0.0, -1.0),
                    JumpStage::Flight => (0.0, 0.5),
                    JumpStage::Land => (0.0, 0.25),
                };
                if let Some(h) = leg.hip_dof {
                    q_ff[h] += leg.hip_sign * hip_off * amp(ff, h);
                }
                if let Some(k) = leg.knee_dof {
                    q_ff[k] += leg.knee_sign * knee_off * amp(ff, k);
                }
            }
            let grounded = clock.jump_stage != JumpStage::Flight;
            schedule = vec![grounded; profile.legs.len()];
        }
        _ => {
            for (li, leg) in profile.legs.iter().enumerate() {
                let offset = ff.phase_offsets.get(li).copied().unwrap_or(0.0);
                let p = (clock.phase + offset).rem_euclid(1.0);
                let stance = p < ff.duty_factor;
                schedule[li] = stance;
                if !stance {
                    let s = (p - ff.duty_factor) / (1.0 - ff.duty_factor);
                    let w = swing_pulse(s);
                    if let Some(h) = leg.hip_dof {
                        q_ff[h] += leg.hip_sign * amp(ff, h) * w;
                    }
                    if let Some(k) = leg.knee_dof {
                        q_ff[k] += leg.knee_sign * amp(ff, k) * w;
                    }
                }
            }
        }
    }

    for d in 0..dof {
        if let Some((lo, hi)) = dof_limits[d] {
            q_ff[d] = q_ff[d].clamp(lo, hi);
        }
    }
    FeedforwardSignal { q_ff, contact_schedule: schedule }
}

fn amp(ff: &crate::morphology::FfParams, dof: usize) -> f64 {
    ff.amplitudes.get(dof).copied().unwrap_or(0.0)
}

/// q_target = clamp(q_ff + alpha .* policy_out). Position channels clamp to
/// the joint limits; velocity channels clamp to the velocity limit.
pub fn compose_action(
    ff: &FeedforwardSignal,
    policy_out: &[f64],
    alpha: &[f64],
    dofs: &[DofInfo],
    modes: &[ActuationMode],
) -> Result<DVector<f64>, ModelError> {
    let n = ff.q_ff.len();
    if policy_out.len() != n || alpha.len() != n || dofs.len() != n || modes.len() != n {
        return Err(ModelError::DimensionMismatch { expected: n, got: policy_out.len() });
    }
    let mut target = DVector::zeros(n);
    for i in 0..n {
        let raw = ff.q_ff[i] + alpha[i] * policy_out[i];
        target[i] = match modes[i] {
            ActuationMode::Position => match dofs[i].limits {
                Some((lo, hi)) => raw.clamp(lo, hi),
                None => raw,
            },
            ActuationMode::Velocity => {
                raw.clamp(-dofs[i].velocity_limit, dofs[i].velocity_limit)
            }
        };
    }
    Ok(target)
}
