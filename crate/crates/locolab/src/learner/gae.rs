//! Generalized advantage estimation.

use super::LearnerError;

/// Backward-recursive GAE over one trajectory:
/// delta_t = r_t + gamma*V_{t+1}*(1-done_t) - V_t,
/// A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}, returns = A + V.
/// `bootstrap_value` stands in for V at the step past the end.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), LearnerError> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(LearnerError::DimensionMismatch { expected: n, got: values.len().min(dones.len()) });
    }
    if !(0.0..=1.0).contains(&gamma) || !(0.0..=1.0).contains(&lambda) {
        return Err(LearnerError::BadHyper("gamma and lambda must lie in [0, 1]"));
    }
    let mut advantages = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = bootstrap_value;
    for t in (0..n).rev() {
        let not_done = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * not_done - values[t];
        next_adv = delta + gamma * lambda * not_done * next_adv;
        advantages[t] = next_adv;
        next_value = values[t];
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((advantages, returns))
}
