//! Clipped-surrogate PPO update with hand-written backprop and Adam.
//!
//! Gradient sums are chunked at a fixed size and reduced in chunk order, so
//! the result is bitwise independent of how many worker threads execute the
//! chunks.

use nalgebra::DVector;
use rand::seq::SliceRandom;

use super::net::{entropy, Adam, PolicyParams, LOG2PI};
use super::rollout::RolloutBuffer;
use super::{streams, LearnerError};
use crate::morphology::PpoHyper;

/// Samples per gradient chunk; fixed so the reduction tree never depends on
/// the worker count.
const GRAD_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, Default)]
pub struct PpoStats {
    pub loss_pi: f64,
    pub loss_v: f64,
    pub approx_kl: f64,
    pub entropy: f64,
    pub clip_frac: f64,
    /// Minibatches skipped because a gradient went non-finite.
    pub skipped_minibatches: u64,
}

struct ChunkResult {
    grads: Vec<f64>,
    loss_pi: f64,
    loss_v: f64,
    kl: f64,
    clipped: f64,
}

/// One PPO update over the buffer: E epochs of M minibatches with a fixed
/// shuffle drawn from the run seed. Parameters and optimizer state are
/// snapped to the f32 grid afterwards so checkpoints round-trip exactly.
pub fn ppo_update(
    params: &mut PolicyParams,
    adam: &mut Adam,
    buffer: &RolloutBuffer,
    hyper: &PpoHyper,
    seed: u64,
    iter: u64,
    workers: usize,
) -> Result<PpoStats, LearnerError> {
    let n = buffer.len();
    if n == 0 {
        return Err(LearnerError::BadHyper("empty rollout buffer"));
    }
    if buffer.advantages.len() != n {
        return Err(LearnerError::BadHyper("advantages missing; run gae first"));
    }

    // Advantage normalization over the whole buffer.
    let mean_adv = buffer.advantages.iter().sum::<f64>() / n as f64;
    let var_adv =
        buffer.advantages.iter().map(|a| (a - mean_adv).powi(2)).sum::<f64>() / n as f64;
    let std_adv = var_adv.sqrt().max(1e-8);
    let norm_adv: Vec<f64> =
        buffer.advantages.iter().map(|a| (a - mean_adv) / std_adv).collect();

    let mut rng = streams::shuffle_stream(seed, iter);
    let mut stats = PpoStats::default();
    let mut batches_seen = 0.0;

    let mb_size = n.div_ceil(hyper.minibatches.max(1));
    let mut indices: Vec<usize> = (0..n).collect();

    for _epoch in 0..hyper.epochs {
        indices.shuffle(&mut rng);
        for mb in indices.chunks(mb_size) {
            let flat = params.flatten();
            let (grads, mb_stats) =
                minibatch_grads(params, buffer, &norm_adv, mb, hyper, workers);
            if !grads.iter().all(|g| g.is_finite()) {
                stats.skipped_minibatches += 1;
                continue;
            }
            let mut flat_next = flat;
            adam.step(&mut flat_next, &grads);
            params.unflatten(&flat_next);
            params.clamp_log_std();

            stats.loss_pi += mb_stats.loss_pi;
            stats.loss_v += mb_stats.loss_v;
            stats.approx_kl += mb_stats.kl;
            stats.clip_frac += mb_stats.clipped;
            batches_seen += 1.0;
        }
    }

    params.quantize_all();
    adam.quantize_all();

    if batches_seen > 0.0 {
        stats.loss_pi /= batches_seen;
        stats.loss_v /= batches_seen;
        stats.approx_kl /= batches_seen;
        stats.clip_frac /= batches_seen;
    }
    stats.entropy = entropy(&params.log_std);
    Ok(stats)
}

/// Gradient of the total loss over one minibatch:
/// L = -mean(min(rho*A, clip(rho)*A)) + c_v*mean((V-R)^2) - c_e*H.
fn minibatch_grads(
    params: &PolicyParams,
    buffer: &RolloutBuffer,
    norm_adv: &[f64],
    mb: &[usize],
    hyper: &PpoHyper,
    workers: usize,
) -> (Vec<f64>, ChunkStatsOut) {
    let n_mb = mb.len();
    let chunks: Vec<&[usize]> = mb.chunks(GRAD_CHUNK).collect();
    let mut results: Vec<Option<ChunkResult>> = (0..chunks.len()).map(|_| None).collect();

    let workers = workers.clamp(1, chunks.len().max(1));
    std::thread::scope(|scope| {
        let mut rest: &mut [Option<ChunkResult>] = &mut results;
        let mut next = 0usize;
        let per = chunks.len().div_ceil(workers);
        while next < chunks.len() {
            let take = per.min(chunks.len() - next);
            let (head, tail) = rest.split_at_mut(take);
            rest = tail;
            let my_chunks = &chunks[next..next + take];
            scope.spawn(move || {
                for (slot, chunk) in head.iter_mut().zip(my_chunks) {
                    *slot = Some(chunk_grads(params, buffer, norm_adv, chunk, hyper));
                }
            });
            next += take;
        }
    });

    let pcount = params.param_count();
    let mut grads = vec![0.0; pcount];
    let mut loss_pi = 0.0;
    let mut loss_v = 0.0;
    let mut kl = 0.0;
    let mut clipped = 0.0;
    for r in results.into_iter().map(|r| r.expect("chunk computed")) {
        for (g, c) in grads.iter_mut().zip(&r.grads) {
            *g += c;
        }
        loss_pi += r.loss_pi;
        loss_v += r.loss_v;
        kl += r.kl;
        clipped += r.clipped;
    }
    let inv = 1.0 / n_mb as f64;
    for g in grads.iter_mut() {
        *g *= inv;
    }
    // Entropy bonus: state-independent, so its gradient lands once per
    // minibatch on the log_std block (the last act_dim slots).
    let act = params.act_dim;
    for k in 0..act {
        grads[pcount - act + k] -= hyper.entropy_coef;
    }
    (
        grads,
        ChunkStatsOut {
            loss_pi: loss_pi * inv,
            loss_v: loss_v * inv,
            kl: kl * inv,
            clipped: clipped * inv,
        },
    )
}

struct ChunkStatsOut {
    loss_pi: f64,
    loss_v: f64,
    kl: f64,
    clipped: f64,
}

/// Per-sample gradients accumulated over one chunk, in sample order.
fn chunk_grads(
    params: &PolicyParams,
    buffer: &RolloutBuffer,
    norm_adv: &[f64],
    chunk: &[usize],
    hyper: &PpoHyper,
) -> ChunkResult {
    let od = buffer.obs_dim;
    let ad = buffer.act_dim;
    let mut g_policy = params.policy.grads_zero();
    let mut g_value = params.value.grads_zero();
    let mut g_logstd = DVector::<f64>::zeros(ad);
    let mut loss_pi = 0.0;
    let mut loss_v = 0.0;
    let mut kl = 0.0;
    let mut clipped = 0.0;

    for &idx in chunk {
        let obs = DVector::from_column_slice(&buffer.obs[idx * od..(idx + 1) * od]);
        let action = &buffer.actions[idx * ad..(idx + 1) * ad];
        let adv = norm_adv[idx];
        let ret = buffer.returns[idx];
        let logp_old = buffer.logp[idx];

        let (mean, pcache) = params.policy.forward(&obs);
        let (vout, vcache) = params.value.forward(&obs);
        let v = vout[0];

        // New log density and ratio.
        let mut logp_new = 0.0;
        for i in 0..ad {
            let ls = params.log_std[i];
            let std = ls.exp();
            let z = (action[i] - mean[i]) / std;
            logp_new += -0.5 * z * z - ls - 0.5 * LOG2PI;
        }
        let rho = (logp_new - logp_old).exp();
        let unclipped = rho * adv;
        let clip_rho = rho.clamp(1.0 - hyper.clip_eps, 1.0 + hyper.clip_eps);
        let surrogate = unclipped.min(clip_rho * adv);
        loss_pi += -surrogate;
        loss_v += (v - ret).powi(2);
        kl += (rho - 1.0) - rho.ln();
        if (rho - 1.0).abs() > hyper.clip_eps {
            clipped += 1.0;
        }

        // d(-surrogate)/d(rho): active only on the unclipped branch.
        let g_rho = if unclipped <= clip_rho * adv { -adv } else { 0.0 };
        if g_rho != 0.0 {
            let g_logp = g_rho * rho;
            let mut g_mean = DVector::zeros(ad);
            for i in 0..ad {
                let std = params.log_std[i].exp();
                let diff = action[i] - mean[i];
                g_mean[i] = g_logp * diff / (std * std);
                g_logstd[i] += g_logp * (diff * diff / (std * std) - 1.0);
            }
            params.policy.backward(&pcache, &g_mean, &mut g_policy);
        }
        let g_v = DVector::from_element(1, 2.0 * hyper.value_coef * (v - ret));
        params.value.backward(&vcache, &g_v, &mut g_value);
    }

    // Flatten in the same tensor order as PolicyParams::flatten.
    let mut grads = Vec::with_capacity(params.param_count());
    for g in [&g_policy, &g_value] {
        for l in 0..3 {
            grads.extend(g.w[l].transpose().iter());
            grads.extend(g.b[l].iter());
        }
    }
    grads.extend(g_logstd.iter());

    ChunkResult { grads, loss_pi, loss_v, kl, clipped }
}

/// Total PPO loss at the given parameters; the reference for the
/// finite-difference gradient check.
pub fn ppo_loss(
    params: &PolicyParams,
    buffer: &RolloutBuffer,
    norm_adv: &[f64],
    mb: &[usize],
    hyper: &PpoHyper,
) -> f64 {
    let od = buffer.obs_dim;
    let ad = buffer.act_dim;
    let mut loss = 0.0;
    for &idx in mb {
        let obs = DVector::from_column_slice(&buffer.obs[idx * od..(idx + 1) * od]);
        let action = &buffer.actions[idx * ad..(idx + 1) * ad];
        let (mean, _) = params.policy.forward(&obs);
        let (vout, _) = params.value.forward(&obs);
        let mut logp_new = 0.0;
        for i in 0..ad {
            let ls = params.log_std[i];
            let std = ls.exp();
            let z = (action[i] - mean[i]) / std;
            logp_new += -0.5 * z * z - ls - 0.5 * LOG2PI;
        }
        let rho = (logp_new - buffer.logp[idx]).exp();
        let clip_rho = rho.clamp(1.0 - hyper.clip_eps, 1.0 + hyper.clip_eps);
        let surrogate = (rho * norm_adv[idx]).min(clip_rho * norm_adv[idx]);
        loss += -surrogate + hyper.value_coef * (vout[0] - buffer.returns[idx]).powi(2);
    }
    loss / mb.len() as f64 - hyper.entropy_coef * entropy(&params.log_std)
}

/// Raw analytic gradient of `ppo_loss` over a minibatch, in flattened
/// parameter order; exposed for the finite-difference check.
pub fn ppo_grads(
    params: &PolicyParams,
    buffer: &RolloutBuffer,
    norm_adv: &[f64],
    mb: &[usize],
    hyper: &PpoHyper,
) -> Vec<f64> {
    minibatch_grads(params, buffer, norm_adv, mb, hyper, 1).0
}

/// Normalized advantages as `ppo_update` computes them; exposed for the
/// gradient check.
pub fn normalized_advantages(buffer: &RolloutBuffer) -> Vec<f64> {
    let n = buffer.len();
    let mean = buffer.advantages.iter().sum::<f64>() / n as f64;
    let var = buffer.advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n as f64;
    let std = var.sqrt().max(1e-8);
    buffer.advantages.iter().map(|a| (a - mean) / std).collect()
}
