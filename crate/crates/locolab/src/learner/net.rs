//! Fixed-topology MLP policy/value networks with hand-rolled backprop and
//! an Adam optimizer. Keeping autodiff in-module makes the gradients
//! directly checkable against finite differences.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const LOG_STD_MIN: f64 = -4.0;
pub const LOG_STD_MAX: f64 = 1.0;
pub const LOG2PI: f64 = 1.8378770664093453;

/// Three-layer perceptron: in -> h1 -> h2 -> out with tanh hidden
/// activations and an optional tanh on the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub w: Vec<DMatrix<f64>>,
    pub b: Vec<DVector<f64>>,
    pub squash_output: bool,
}

pub struct MlpCache {
    x: DVector<f64>,
    h: Vec<DVector<f64>>,
    out: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub w: Vec<DMatrix<f64>>,
    pub b: Vec<DVector<f64>>,
}

impl Mlp {
    pub fn zeros(dims: &[usize; 4], squash_output: bool) -> Self {
        let w = (0..3).map(|i| DMatrix::zeros(dims[i + 1], dims[i])).collect();
        let b = (0..3).map(|i| DVector::zeros(dims[i + 1])).collect();
        Mlp { w, b, squash_output }
    }

    /// Xavier-uniform init; the final layer is shrunk so the policy starts
    /// close to the pure feedforward gait.
    pub fn init(dims: &[usize; 4], squash_output: bool, final_gain: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut net = Self::zeros(dims, squash_output);
        for l in 0..3 {
            let (fan_out, fan_in) = (dims[l + 1], dims[l]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt()
                * if l == 2 { final_gain } else { 1.0 };
            for r in 0..fan_out {
                for c in 0..fan_in {
                    net.w[l][(r, c)] = rng.gen_range(-limit..limit);
                }
            }
        }
        net
    }

    pub fn forward(&self, x: &DVector<f64>) -> (DVector<f64>, MlpCache) {
        let h1 = (&self.w[0] * x + &self.b[0]).map(f64::tanh);
        let h2 = (&self.w[1] * &h1 + &self.b[1]).map(f64::tanh);
        let z3 = &self.w[2] * &h2 + &self.b[2];
        let out = if self.squash_output { z3.map(f64::tanh) } else { z3 };
        (out.clone(), MlpCache { x: x.clone(), h: vec![h1, h2], out })
    }

    /// Backprop of dL/d(output) through the net, accumulating into `grads`.
    pub fn backward(&self, cache: &MlpCache, g_out: &DVector<f64>, grads: &mut MlpGrads) {
        let g_z3 = if self.squash_output {
            g_out.zip_map(&cache.out, |g, o| g * (1.0 - o * o))
        } else {
            g_out.clone()
        };
        let mut g = g_z3;
        for l in (0..3).rev() {
            let input = if l == 0 { &cache.x } else { &cache.h[l - 1] };
            grads.w[l].ger(1.0, &g, input, 1.0);
            grads.b[l] += &g;
            if l > 0 {
                let g_h = self.w[l].tr_mul(&g);
                g = g_h.zip_map(&cache.h[l - 1], |gh, h| gh * (1.0 - h * h));
            }
        }
    }

    pub fn grads_zero(&self) -> MlpGrads {
        MlpGrads {
            w: self.w.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect(),
            b: self.b.iter().map(|b| DVector::zeros(b.len())).collect(),
        }
    }

    fn param_count(&self) -> usize {
        self.w.iter().map(|w| w.len()).sum::<usize>() + self.b.iter().map(|b| b.len()).sum::<usize>()
    }
}

/// Running per-channel observation statistics (population variance).
/// Values are kept on the f32 grid after every update so checkpoints store
/// them losslessly.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsNorm {
    pub mean: DVector<f64>,
    pub var: DVector<f64>,
    pub count: f64,
}

impl ObsNorm {
    pub fn new(dim: usize) -> Self {
        ObsNorm { mean: DVector::zeros(dim), var: DVector::from_element(dim, 1.0), count: 0.0 }
    }

    /// Normalize and clamp one observation with the current (frozen) stats.
    pub fn normalize(&self, raw: &DVector<f64>) -> DVector<f64> {
        if self.count < 2.0 {
            return raw.map(|v| v.clamp(-10.0, 10.0));
        }
        let mut out = DVector::zeros(raw.len());
        for i in 0..raw.len() {
            out[i] = ((raw[i] - self.mean[i]) / (self.var[i] + 1e-8).sqrt()).clamp(-10.0, 10.0);
        }
        out
    }

    /// Merge a batch of raw observations (row-major `dim`-sized chunks)
    /// using the parallel combine rule, then snap to the f32 grid. Inputs
    /// are clamped so one diverging environment cannot push the variance
    /// accumulator to infinity.
    pub fn update_batch(&mut self, rows: &[f64], dim: usize) {
        let n = rows.len() / dim;
        if n == 0 {
            return;
        }
        let clip = |v: f64| v.clamp(-1e6, 1e6);
        let nb = n as f64;
        let mut mean_b = DVector::zeros(dim);
        for r in 0..n {
            for c in 0..dim {
                mean_b[c] += clip(rows[r * dim + c]);
            }
        }
        mean_b /= nb;
        let mut m2_b = DVector::zeros(dim);
        for r in 0..n {
            for c in 0..dim {
                let d = clip(rows[r * dim + c]) - mean_b[c];
                m2_b[c] += d * d;
            }
        }
        let ca = self.count;
        let cn = ca + nb;
        let delta = &mean_b - &self.mean;
        let new_mean = &self.mean + delta.scale(nb / cn);
        let m2_a = self.var.scale(ca);
        let m2 = m2_a + m2_b + delta.component_mul(&delta).scale(ca * nb / cn);
        self.mean = new_mean.map(quantize);
        self.var = (m2 / cn).map(quantize);
        self.count = cn;
    }
}

/// Round-trip through f32 so the checkpoint payload is lossless.
pub fn quantize(v: f64) -> f64 {
    v as f32 as f64
}

/// Policy and value networks plus the state-independent log standard
/// deviation and observation normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub hidden: (usize, usize),
    pub policy: Mlp,
    pub value: Mlp,
    pub log_std: DVector<f64>,
    pub obs_norm: ObsNorm,
}

impl PolicyParams {
    pub fn init(obs_dim: usize, act_dim: usize, hidden: (usize, usize), rng: &mut ChaCha8Rng) -> Self {
        let pd = [obs_dim, hidden.0, hidden.1, act_dim];
        let vd = [obs_dim, hidden.0, hidden.1, 1];
        let mut p = PolicyParams {
            obs_dim,
            act_dim,
            hidden,
            policy: Mlp::init(&pd, true, 0.01, rng),
            value: Mlp::init(&vd, false, 1.0, rng),
            log_std: DVector::from_element(act_dim, -1.0),
            obs_norm: ObsNorm::new(obs_dim),
        };
        p.quantize_all();
        p
    }

    pub fn zeros(obs_dim: usize, act_dim: usize, hidden: (usize, usize)) -> Self {
        PolicyParams {
            obs_dim,
            act_dim,
            hidden,
            policy: Mlp::zeros(&[obs_dim, hidden.0, hidden.1, act_dim], true),
            value: Mlp::zeros(&[obs_dim, hidden.0, hidden.1, 1], false),
            log_std: DVector::zeros(act_dim),
            obs_norm: ObsNorm::new(obs_dim),
        }
    }

    /// Trainable parameter count (networks + log_std).
    pub fn param_count(&self) -> usize {
        self.policy.param_count() + self.value.param_count() + self.log_std.len()
    }

    /// Flatten trainable parameters in checkpoint tensor order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for net in [&self.policy, &self.value] {
            for l in 0..3 {
                out.extend(net.w[l].transpose().iter());
                out.extend(net.b[l].iter());
            }
        }
        out.extend(self.log_std.iter());
        out
    }

    /// Inverse of `flatten`.
    pub fn unflatten(&mut self, flat: &[f64]) {
        let mut i = 0;
        for net in [&mut self.policy, &mut self.value] {
            for l in 0..3 {
                let (r, c) = (net.w[l].nrows(), net.w[l].ncols());
                // Row-major on disk and in the flat vector.
                for rr in 0..r {
                    for cc in 0..c {
                        net.w[l][(rr, cc)] = flat[i];
                        i += 1;
                    }
                }
                for rr in 0..r {
                    net.b[l][rr] = flat[i];
                    i += 1;
                }
            }
        }
        for k in 0..self.log_std.len() {
            self.log_std[k] = flat[i];
            i += 1;
        }
        debug_assert_eq!(i, flat.len());
    }

    pub fn quantize_all(&mut self) {
        for net in [&mut self.policy, &mut self.value] {
            for l in 0..3 {
                net.w[l].apply(|v| *v = quantize(*v));
                net.b[l].apply(|v| *v = quantize(*v));
            }
        }
        self.log_std.apply(|v| *v = quantize(*v));
    }

    pub fn clamp_log_std(&mut self) {
        self.log_std.apply(|v| *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX));
    }
}

/// Deterministic forward pass: squashed action mean and state value.
pub fn policy_forward(params: &PolicyParams, obs: &DVector<f64>) -> (DVector<f64>, f64) {
    assert_eq!(obs.len(), params.obs_dim, "observation length mismatch");
    let (mean, _) = params.policy.forward(obs);
    let (v, _) = params.value.forward(obs);
    (mean, v[0])
}

/// Diagonal Gaussian sample around the squashed mean, with its log density.
pub fn sample_action(
    mean: &DVector<f64>,
    log_std: &DVector<f64>,
    rng: &mut ChaCha8Rng,
) -> (DVector<f64>, f64) {
    let mut action = DVector::zeros(mean.len());
    for i in 0..mean.len() {
        let eps: f64 = rng.sample(rand_distr::StandardNormal);
        action[i] = mean[i] + log_std[i].exp() * eps;
    }
    let logp = log_prob(&action, mean, log_std);
    (action, logp)
}

/// Log density of `action` under the diagonal Gaussian.
pub fn log_prob(action: &DVector<f64>, mean: &DVector<f64>, log_std: &DVector<f64>) -> f64 {
    let mut lp = 0.0;
    for i in 0..mean.len() {
        let std = log_std[i].exp();
        let z = (action[i] - mean[i]) / std;
        lp += -0.5 * z * z - log_std[i] - 0.5 * LOG2PI;
    }
    lp
}

/// Gaussian entropy (state independent).
pub fn entropy(log_std: &DVector<f64>) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 * (LOG2PI + 1.0)).sum()
}

/// Adam over the flattened parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(param_count: usize, lr: f64) -> Self {
        Adam {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), grads.len());
        assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t as i32);
        let b2t = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let mh = self.m[i] / b1t;
            let vh = self.v[i] / b2t;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }

    pub fn quantize_all(&mut self) {
        for x in self.m.iter_mut().chain(self.v.iter_mut()) {
            *x = quantize(*x);
        }
    }
}
