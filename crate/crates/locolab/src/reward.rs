//! Reward terms computed from simulation state, and the adaptive curriculum
//! that blends reward weights from a stability-heavy initial mix toward the
//! task-heavy final mix as performance crosses a threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gait::Command;
use crate::physics::{terrain_height, SimState, Terrain};

#[derive(Debug, Error)]
pub enum RewardError {
    #[error("expected vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("curriculum parameter out of range: {0}")]
    BadRange(&'static str),
}

/// Per-term weights. Penalty terms (torque, action_rate) carry negative
/// term values, so their weights stay non-negative too.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    pub alive: f64,
    pub upright: f64,
    pub height: f64,
    pub lin_vel: f64,
    pub yaw_rate: f64,
    pub torque: f64,
    pub action_rate: f64,
    pub gait_match: f64,
    pub jump_apex: f64,
}

impl RewardWeights {
    pub fn zeros() -> Self {
        RewardWeights {
            alive: 0.0,
            upright: 0.0,
            height: 0.0,
            lin_vel: 0.0,
            yaw_rate: 0.0,
            torque: 0.0,
            action_rate: 0.0,
            gait_match: 0.0,
            jump_apex: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 9] {
        [
            self.alive,
            self.upright,
            self.height,
            self.lin_vel,
            self.yaw_rate,
            self.torque,
            self.action_rate,
            self.gait_match,
            self.jump_apex,
        ]
    }

    /// Largest attainable per-tick bonus under these weights; the kernel
    /// terms saturate at 1 and the jump apex is capped at 1 m for the
    /// purpose of normalizing returns.
    pub fn max_tick_bonus(&self) -> f64 {
        self.alive
            + self.upright
            + self.height
            + self.lin_vel
            + self.yaw_rate
            + self.gait_match
            + self.jump_apex
    }
}

/// Values of each term plus their weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub alive: f64,
    pub upright: f64,
    pub height: f64,
    pub lin_vel: f64,
    pub yaw_rate: f64,
    pub torque: f64,
    pub action_rate: f64,
    pub gait_match: f64,
    pub jump_apex: f64,
    pub total: f64,
    #[serde(skip)]
    pub weights_used: RewardWeights,
}

impl RewardBreakdown {
    pub fn terms(&self) -> [f64; 9] {
        [
            self.alive,
            self.upright,
            self.height,
            self.lin_vel,
            self.yaw_rate,
            self.torque,
            self.action_rate,
            self.gait_match,
            self.jump_apex,
        ]
    }
}

/// Everything the reward needs beyond the raw simulation state.
pub struct RewardInputs<'a> {
    pub state: &'a SimState,
    pub prev_action: &'a [f64],
    pub action: &'a [f64],
    pub command: Command,
    /// Expected stance flag per foot from the gait schedule.
    pub contact_schedule: &'a [bool],
    /// Link indices of the feet, matching `contact_schedule` order.
    pub foot_links: &'a [usize],
    /// True while the jump clock is in its flight stage.
    pub in_flight: bool,
    pub standing_height: f64,
    pub terrain: &'a Terrain,
    /// When false, the linear-velocity kernel tracks vx only.
    pub track_vy: bool,
}

pub fn compute_reward(
    inputs: &RewardInputs,
    weights: &RewardWeights,
) -> Result<RewardBreakdown, RewardError> {
    let s = inputs.state;
    if inputs.action.len() != inputs.prev_action.len() {
        return Err(RewardError::DimensionMismatch {
            expected: inputs.action.len(),
            got: inputs.prev_action.len(),
        });
    }
    if inputs.contact_schedule.len() != inputs.foot_links.len() {
        return Err(RewardError::DimensionMismatch {
            expected: inputs.foot_links.len(),
            got: inputs.contact_schedule.len(),
        });
    }

    let v_base = s.base_quat.inverse() * s.base_lin_vel;
    let w_base = s.base_quat.inverse() * s.base_ang_vel;

    let mut vel_err = (inputs.command.vx - v_base.x).powi(2);
    if inputs.track_vy {
        vel_err += (inputs.command.vy - v_base.y).powi(2);
    }
    let lin_vel = (-vel_err / 0.25).exp();
    let yaw_rate = (-(inputs.command.yaw_rate - w_base.z).powi(2) / 0.25).exp();

    let tilt = s.tilt_angle();
    let upright = (-tilt * tilt / 0.1).exp();

    let (ground, _) = terrain_height(inputs.terrain, s.base_pos.x, s.base_pos.y);
    let h = s.base_pos.z - ground;
    let height = (-(h - inputs.standing_height).powi(2) / 0.01).exp();

    let alive = 1.0;
    let torque = -s.last_applied_torques.iter().map(|t| t * t).sum::<f64>();
    let action_rate = -inputs
        .action
        .iter()
        .zip(inputs.prev_action)
        .map(|(a, p)| (a - p).powi(2))
        .sum::<f64>();

    let gait_match = if inputs.foot_links.is_empty() {
        0.0
    } else {
        let matched = inputs
            .foot_links
            .iter()
            .zip(inputs.contact_schedule)
            .filter(|(&fl, &sched)| s.link_in_contact(fl) == sched)
            .count();
        matched as f64 / inputs.foot_links.len() as f64
    };

    let jump_apex = if inputs.in_flight { (h - inputs.standing_height).max(0.0) } else { 0.0 };

    let terms = [
        alive, upright, height, lin_vel, yaw_rate, torque, action_rate, gait_match, jump_apex,
    ];
    let w = weights.as_array();
    let total: f64 = terms.iter().zip(&w).map(|(t, w)| t * w).sum();

    Ok(RewardBreakdown {
        alive,
        upright,
        height,
        lin_vel,
        yaw_rate,
        torque,
        action_rate,
        gait_match,
        jump_apex,
        total,
        weights_used: *weights,
    })
}

/// Blend state of the adaptive curriculum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurriculumState {
    /// Weight blend in [0, 1]; 0 selects the initial mix, 1 the final mix.
    pub lambda: f64,
    /// Exponential moving average of normalized episode returns (decay 0.99).
    pub perf_ema: f64,
    pub episodes_seen: u64,
}

impl Default for CurriculumState {
    fn default() -> Self {
        CurriculumState { lambda: 0.0, perf_ema: 0.0, episodes_seen: 0 }
    }
}

/// One curriculum update per completed episode: the EMA tracks normalized
/// returns and lambda drifts toward 1 while the EMA beats the threshold.
pub fn update_curriculum(
    cs: &CurriculumState,
    episode_return_normalized: f64,
    eta: f64,
    tau: f64,
) -> Result<CurriculumState, RewardError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(RewardError::BadRange("eta must be in [0, 1]"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(RewardError::BadRange("tau must be in (0, 1)"));
    }
    if !(0.0..=1.0).contains(&episode_return_normalized) {
        return Err(RewardError::BadRange("normalized return must be in [0, 1]"));
    }
    let perf_ema = 0.99 * cs.perf_ema + 0.01 * episode_return_normalized;
    let lambda = (cs.lambda + eta * (perf_ema - tau)).clamp(0.0, 1.0);
    Ok(CurriculumState { lambda, perf_ema, episodes_seen: cs.episodes_seen + 1 })
}

/// Elementwise convex blend of the weight tables at the current lambda.
pub fn current_weights(
    cs: &CurriculumState,
    init: &RewardWeights,
    fin: &RewardWeights,
) -> RewardWeights {
    let l = cs.lambda;
    let blend = |a: f64, b: f64| (1.0 - l) * a + l * b;
    RewardWeights {
        alive: blend(init.alive, fin.alive),
        upright: blend(init.upright, fin.upright),
        height: blend(init.height, fin.height),
        lin_vel: blend(init.lin_vel, fin.lin_vel),
        yaw_rate: blend(init.yaw_rate, fin.yaw_rate),
        torque: blend(init.torque, fin.torque),
        action_rate: blend(init.action_rate, fin.action_rate),
        gait_match: blend(init.gait_match, fin.gait_match),
        jump_apex: blend(init.jump_apex, fin.jump_apex),
    }
}

/// Episode return divided by the best attainable bonus over its length,
/// clamped into [0, 1] for the curriculum update.
pub fn normalized_return(episode_return: f64, ticks: usize, weights: &RewardWeights) -> f64 {
    let cap = ticks as f64 * weights.max_tick_bonus();
    if cap <= 0.0 {
        return 0.0;
    }
    (episode_return / cap).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DVector, UnitQuaternion, Vector3};
    use crate::physics::SimState;

    fn state_at(vx: f64, height: f64) -> SimState {
        SimState {
            base_pos: Vector3::new(0.0, 0.0, height),
            base_quat: UnitQuaternion::identity(),
            base_lin_vel: Vector3::new(vx, 0.0, 0.0),
            base_ang_vel: Vector3::zeros(),
            q: DVector::zeros(2),
            qd: DVector::zeros(2),
            time: 0.0,
            contacts: Vec::new(),
            last_applied_torques: DVector::zeros(2),
            base_lin_acc: Vector3::zeros(),
            fault: false,
        }
    }

    fn inputs<'a>(state: &'a SimState, terrain: &'a Terrain) -> RewardInputs<'a> {
        RewardInputs {
            state,
            prev_action: &[0.0, 0.0],
            action: &[0.0, 0.0],
            command: Command { vx: 0.5, vy: 0.0, yaw_rate: 0.0 },
            contact_schedule: &[],
            foot_links: &[],
            in_flight: false,
            standing_height: 0.38,
            terrain,
            track_vy: true,
        }
    }

    #[test]
    fn perfect_tracking_saturates_kernels() {
        let state = state_at(0.5, 0.38);
        let terrain = Terrain::default();
        let weights = RewardWeights { lin_vel: 1.0, yaw_rate: 1.0, ..RewardWeights::zeros() };
        let b = compute_reward(&inputs(&state, &terrain), &weights).unwrap();
        assert!((b.lin_vel - 1.0).abs() < 1e-12);
        assert!((b.yaw_rate - 1.0).abs() < 1e-12);
        assert!((b.upright - 1.0).abs() < 1e-12);
        assert!(b.torque == 0.0);
    }

    #[test]
    fn velocity_error_kernel_value() {
        let state = state_at(0.3, 0.38);
        let terrain = Terrain::default();
        let weights = RewardWeights { lin_vel: 1.0, ..RewardWeights::zeros() };
        let b = compute_reward(&inputs(&state, &terrain), &weights).unwrap();
        // exp(-(0.5-0.3)^2 / 0.25) = exp(-0.16)
        let expected = (-0.16f64).exp();
        assert!((b.lin_vel - expected).abs() < 1e-12, "{} vs {expected}", b.lin_vel);
        assert!((b.total - expected).abs() < 1e-12);
    }

    #[test]
    fn total_is_weighted_dot_product() {
        let state = state_at(0.2, 0.3);
        let terrain = Terrain::default();
        let weights = RewardWeights {
            alive: 1.0,
            upright: 0.9,
            height: 0.5,
            lin_vel: 1.2,
            yaw_rate: 0.3,
            torque: 1e-4,
            action_rate: 0.01,
            gait_match: 0.4,
            jump_apex: 2.0,
        };
        let b = compute_reward(&inputs(&state, &terrain), &weights).unwrap();
        let dot: f64 = b.terms().iter().zip(weights.as_array()).map(|(t, w)| t * w).sum();
        assert!((b.total - dot).abs() < 1e-12);
        // kernel terms in (0, 1], penalties <= 0
        assert!(b.lin_vel > 0.0 && b.lin_vel <= 1.0);
        assert!(b.upright > 0.0 && b.upright <= 1.0);
        assert!(b.height > 0.0 && b.height <= 1.0);
        assert!(b.torque <= 0.0 && b.action_rate <= 0.0);
    }

    #[test]
    fn curriculum_pinned_performance_is_monotone() {
        let mut cs = CurriculumState { lambda: 0.0, perf_ema: 1.0, episodes_seen: 0 };
        let mut last = 0.0;
        for _ in 0..50 {
            cs = update_curriculum(&cs, 1.0, 0.01, 0.5).unwrap();
            assert!(cs.lambda >= last);
            last = cs.lambda;
        }
        assert!(cs.lambda > 0.0);

        // At the threshold with the EMA pinned there, lambda freezes.
        let mut cs = CurriculumState { lambda: 0.3, perf_ema: 0.5, episodes_seen: 0 };
        for _ in 0..20 {
            cs = update_curriculum(&cs, 0.5, 0.01, 0.5).unwrap();
            assert!((cs.lambda - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn curriculum_matches_scalar_recurrence() {
        // Alternating returns against an independent recomputation.
        let eta = 0.01;
        let tau = 0.5;
        let mut cs = CurriculumState { lambda: 0.0, perf_ema: 0.5, episodes_seen: 0 };
        let mut ema = 0.5f64;
        let mut lambda = 0.0f64;
        for k in 0..200 {
            let r = if k % 2 == 0 { 0.0 } else { 1.0 };
            cs = update_curriculum(&cs, r, eta, tau).unwrap();
            ema = 0.99 * ema + 0.01 * r;
            lambda = (lambda + eta * (ema - tau)).clamp(0.0, 1.0);
            assert!((cs.perf_ema - ema).abs() < 1e-12);
            assert!((cs.lambda - lambda).abs() < 1e-12);
        }
        assert_eq!(cs.episodes_seen, 200);
    }

    #[test]
    fn curriculum_rejects_bad_ranges() {
        let cs = CurriculumState::default();
        assert!(update_curriculum(&cs, 0.5, -0.1, 0.5).is_err());
        assert!(update_curriculum(&cs, 0.5, 0.01, 1.0).is_err());
        assert!(update_curriculum(&cs, 1.5, 0.01, 0.5).is_err());
    }

    #[test]
    fn weight_blend_endpoints_and_convexity() {
        let init = RewardWeights { lin_vel: 0.2, ..RewardWeights::zeros() };
        let fin = RewardWeights { lin_vel: 1.5, ..RewardWeights::zeros() };
        let w0 = current_weights(&CurriculumState { lambda: 0.0, perf_ema: 0.0, episodes_seen: 0 }, &init, &fin);
        assert_eq!(w0, init);
        let w1 = current_weights(&CurriculumState { lambda: 1.0, perf_ema: 0.0, episodes_seen: 0 }, &init, &fin);
        assert_eq!(w1, fin);
        let w = current_weights(&CurriculumState { lambda: 0.25, perf_ema: 0.0, episodes_seen: 0 }, &init, &fin);
        assert!((w.lin_vel - 0.525).abs() < 1e-12);
        for l in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let w = current_weights(&CurriculumState { lambda: l, perf_ema: 0.0, episodes_seen: 0 }, &init, &fin);
            assert!(w.lin_vel >= 0.2 && w.lin_vel <= 1.5);
        }
    }

    #[test]
    fn normalized_return_is_clamped() {
        let w = RewardWeights { alive: 1.0, upright: 1.0, ..RewardWeights::zeros() };
        assert!((normalized_return(100.0, 100, &w) - 0.5).abs() < 1e-12);
        assert_eq!(normalized_return(1e9, 100, &w), 1.0);
        assert_eq!(normalized_return(-5.0, 100, &w), 0.0);
        assert_eq!(normalized_return(1.0, 0, &w), 0.0);
    }
}
