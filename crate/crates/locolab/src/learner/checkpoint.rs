//! Binary checkpoint format (little-endian):
//! magic "URLPCKPT" | u32 version = 1 | u32 header_length | UTF-8 JSON
//! header | raw f32 payload, tensors concatenated in header order.
//!
//! The header lists every tensor with its shape, the optimizer-state
//! tensors, and the curriculum state. In-memory values are kept on the f32
//! grid between updates, so save/load round-trips bit-exactly and a resumed
//! run replays the uninterrupted metrics stream.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::net::{Adam, ObsNorm, PolicyParams};
use super::LearnerError;
use crate::reward::CurriculumState;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"URLPCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorMeta {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    tensors: Vec<TensorMeta>,
    lambda: f64,
    perf_ema: f64,
    episodes_seen: u64,
    iter: u64,
    env_steps: u64,
    obs_dim: usize,
    act_dim: usize,
    hidden: (usize, usize),
    adam_step: u64,
    adam_lr: f64,
    obs_count: f64,
}

/// Everything that persists across a training interruption.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub params: PolicyParams,
    pub adam: Adam,
    pub curriculum: CurriculumState,
    pub iter: u64,
    pub env_steps: u64,
}

fn tensor_list(p: &PolicyParams) -> Vec<TensorMeta> {
    let mut t = Vec::new();
    let mut net = |prefix: &str, mlp: &super::net::Mlp| {
        for l in 0..3 {
            t.push(TensorMeta {
                name: format!("{prefix}.w{l}"),
                shape: vec![mlp.w[l].nrows(), mlp.w[l].ncols()],
            });
            t.push(TensorMeta { name: format!("{prefix}.b{l}"), shape: vec![mlp.b[l].len()] });
        }
    };
    net("policy", &p.policy);
    net("value", &p.value);
    t.push(TensorMeta { name: "log_std".into(), shape: vec![p.log_std.len()] });
    t.push(TensorMeta { name: "obs_mean".into(), shape: vec![p.obs_norm.mean.len()] });
    t.push(TensorMeta { name: "obs_var".into(), shape: vec![p.obs_norm.var.len()] });
    let pc = p.param_count();
    t.push(TensorMeta { name: "adam.m".into(), shape: vec![pc] });
    t.push(TensorMeta { name: "adam.v".into(), shape: vec![pc] });
    t
}

/// Serializes and writes atomically (temp file + rename), so an interrupted
/// run never leaves a checkpoint that loads.
pub fn save_checkpoint(path: &Path, state: &TrainState) -> Result<(), LearnerError> {
    let p = &state.params;
    let header = Header {
        tensors: tensor_list(p),
        lambda: state.curriculum.lambda,
        perf_ema: state.curriculum.perf_ema,
        episodes_seen: state.curriculum.episodes_seen,
        iter: state.iter,
        env_steps: state.env_steps,
        obs_dim: p.obs_dim,
        act_dim: p.act_dim,
        hidden: p.hidden,
        adam_step: state.adam.t,
        adam_lr: state.adam.lr,
        obs_count: p.obs_norm.count,
    };
    let header_json =
        serde_json::to_vec(&header).map_err(|e| LearnerError::Checkpoint(e.to_string()))?;

    let mut payload: Vec<f64> = p.flatten();
    payload.extend(p.obs_norm.mean.iter());
    payload.extend(p.obs_norm.var.iter());
    payload.extend(state.adam.m.iter());
    payload.extend(state.adam.v.iter());

    let mut bytes =
        Vec::with_capacity(16 + header_json.len() + payload.len() * 4);
    bytes.extend_from_slice(CHECKPOINT_MAGIC);
    bytes.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&header_json);
    for v in payload {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }

    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<TrainState, LearnerError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 16 {
        return Err(LearnerError::Checkpoint("file shorter than fixed header".into()));
    }
    if &bytes[0..8] != CHECKPOINT_MAGIC {
        return Err(LearnerError::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(LearnerError::Checkpoint(format!("unsupported version {version}")));
    }
    let header_len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if bytes.len() < 16 + header_len {
        return Err(LearnerError::Checkpoint("truncated header".into()));
    }
    let header: Header = serde_json::from_slice(&bytes[16..16 + header_len])
        .map_err(|e| LearnerError::Checkpoint(format!("bad header: {e}")))?;

    let expected: usize = header.tensors.iter().map(|t| t.shape.iter().product::<usize>()).sum();
    let payload = &bytes[16 + header_len..];
    if payload.len() != expected * 4 {
        return Err(LearnerError::Checkpoint(format!(
            "payload is {} bytes, expected {}",
            payload.len(),
            expected * 4
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();

    let mut params = PolicyParams::zeros(header.obs_dim, header.act_dim, header.hidden);
    let pc = params.param_count();
    let od = header.obs_dim;
    if values.len() != pc + 2 * od + 2 * pc {
        return Err(LearnerError::Checkpoint("tensor list inconsistent with dims".into()));
    }
    params.unflatten(&values[..pc]);
    let mut norm = ObsNorm::new(od);
    norm.mean.copy_from_slice(&values[pc..pc + od]);
    norm.var.copy_from_slice(&values[pc + od..pc + 2 * od]);
    norm.count = header.obs_count;
    params.obs_norm = norm;

    let mut adam = Adam::new(pc, header.adam_lr);
    adam.m.copy_from_slice(&values[pc + 2 * od..pc + 2 * od + pc]);
    adam.v.copy_from_slice(&values[pc + 2 * od + pc..]);
    adam.t = header.adam_step;

    Ok(TrainState {
        params,
        adam,
        curriculum: CurriculumState {
            lambda: header.lambda,
            perf_ema: header.perf_ema,
            episodes_seen: header.episodes_seen,
        },
        iter: header.iter,
        env_steps: header.env_steps,
    })
}
