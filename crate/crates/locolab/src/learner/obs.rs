//! Observation construction: fixed channel layout of length 3n + 14 for n
//! actuated DOF.

use nalgebra::DVector;

use super::net::ObsNorm;
use crate::gait::{Command, GaitClock};
use crate::physics::SimState;

pub fn obs_dim(dof: usize) -> usize {
    3 * dof + 14
}

/// Raw (unnormalized) observation: gravity direction in the base frame,
/// base angular and linear velocity in the base frame, q - q0, qd, the
/// previous policy output, clock features, and the velocity command.
pub fn raw_obs(
    state: &SimState,
    clock: &GaitClock,
    command: Command,
    prev_policy_out: &[f64],
    q0: &[f64],
) -> DVector<f64> {
    let n = state.q.len();
    assert_eq!(prev_policy_out.len(), n);
    assert_eq!(q0.len(), n);
    let mut obs = DVector::zeros(obs_dim(n));
    let rot_inv = state.base_quat.inverse();
    let grav = state.gravity_in_base();
    let w = rot_inv * state.base_ang_vel;
    let v = rot_inv * state.base_lin_vel;
    let mut i = 0;
    for k in 0..3 {
        obs[i] = grav[k];
        i += 1;
    }
    for k in 0..3 {
        obs[i] = w[k];
        i += 1;
    }
    for k in 0..3 {
        obs[i] = v[k];
        i += 1;
    }
    for k in 0..n {
        obs[i] = state.q[k] - q0[k];
        i += 1;
    }
    for k in 0..n {
        obs[i] = state.qd[k];
        i += 1;
    }
    for k in 0..n {
        obs[i] = prev_policy_out[k];
        i += 1;
    }
    let two_pi_phase = 2.0 * std::f64::consts::PI * clock.phase;
    obs[i] = two_pi_phase.sin();
    obs[i + 1] = two_pi_phase.cos();
    obs[i + 2] = command.vx;
    obs[i + 3] = command.vy;
    obs[i + 4] = command.yaw_rate;
    obs
}

/// Normalized observation with non-finite inputs rejected.
pub fn build_obs(
    state: &SimState,
    clock: &GaitClock,
    command: Command,
    prev_policy_out: &[f64],
    q0: &[f64],
    norm: &ObsNorm,
) -> Result<DVector<f64>, super::LearnerError> {
    let raw = raw_obs(state, clock, command, prev_policy_out, q0);
    if !raw.iter().all(|v| v.is_finite()) {
        return Err(super::LearnerError::NonFiniteInput("observation"));
    }
    Ok(norm.normalize(&raw))
}
