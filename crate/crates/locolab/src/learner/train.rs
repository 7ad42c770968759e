//! The training loop: rollout -> GAE -> PPO update -> curriculum update ->
//! metrics, checkpointed every few iterations and resumable bit-exactly.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use super::checkpoint::{load_checkpoint, save_checkpoint, TrainState};
use super::net::{Adam, PolicyParams};
use super::ppo::ppo_update;
use super::rollout::{rollout, BackendFactory, EnvSetup};
use super::{obs::obs_dim, streams, LearnerError};
use crate::reward::{current_weights, normalized_return, update_curriculum, CurriculumState};

pub struct TrainSession {
    pub setup: EnvSetup,
    pub total_env_steps: u64,
    pub out_dir: PathBuf,
    /// Intermediate checkpoint cadence in iterations (0 disables).
    pub checkpoint_every: u64,
    pub resume_from: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermMeans {
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

/// One metrics line per iteration, streamed as JSONL.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub iter: u64,
    pub env_steps: u64,
    pub mean_return: f64,
    pub mean_ep_len: f64,
    pub terms: TermMeans,
    pub lambda: f64,
    pub loss_pi: f64,
    pub loss_v: f64,
    pub kl: f64,
    pub entropy: f64,
    pub clip_frac: f64,
}

pub struct TrainOutcome {
    pub iterations: u64,
    pub env_steps: u64,
    pub final_checkpoint: PathBuf,
    pub metrics_path: PathBuf,
    pub curriculum: CurriculumState,
}

/// Runs training to the step budget. Writes `metrics.jsonl`,
/// `ckpt_<iter>.bin` at the checkpoint cadence, and `final.bin`.
pub fn train(session: &TrainSession, make_backend: BackendFactory) -> Result<TrainOutcome, LearnerError> {
    let setup = &session.setup;
    let hyper = &setup.config.ppo;
    let dof = setup.dof();
    let od = obs_dim(dof);

    fs::create_dir_all(&session.out_dir)?;
    let metrics_path = session.out_dir.join("metrics.jsonl");

    let mut state = match &session.resume_from {
        Some(path) => {
            let st = load_checkpoint(path)?;
            if st.params.obs_dim != od || st.params.act_dim != dof {
                return Err(LearnerError::Checkpoint(format!(
                    "checkpoint dims ({}, {}) do not match robot ({}, {})",
                    st.params.obs_dim, st.params.act_dim, od, dof
                )));
            }
            st
        }
        None => {
            let mut rng = streams::init_stream(setup.seed);
            let params = PolicyParams::init(od, dof, hyper.hidden, &mut rng);
            let pc = params.param_count();
            TrainState {
                params,
                adam: Adam::new(pc, hyper.learning_rate),
                curriculum: CurriculumState::default(),
                iter: 0,
                env_steps: 0,
            }
        }
    };

    let mut metrics = fs::OpenOptions::new()
        .create(true)
        .append(session.resume_from.is_some())
        .truncate(session.resume_from.is_none())
        .write(true)
        .open(&metrics_path)?;

    let steps_per_iter = (hyper.num_envs * hyper.steps_per_env) as u64;
    while state.env_steps < session.total_env_steps {
        let iter = state.iter + 1;
        let weights = current_weights(
            &state.curriculum,
            &setup.config.reward_weights_init,
            &setup.config.reward_weights_final,
        );

        let mut buffer = rollout(
            setup,
            &state.params,
            &weights,
            iter,
            hyper.num_envs,
            hyper.steps_per_env,
            hyper.workers,
            make_backend,
        )?;
        buffer.run_gae(hyper.gamma, hyper.gae_lambda)?;

        let stats = ppo_update(
            &mut state.params,
            &mut state.adam,
            &buffer,
            hyper,
            setup.seed,
            iter,
            hyper.workers,
        )?;

        // Normalization stats move after the update, in env-major order.
        state.params.obs_norm.update_batch(&buffer.raw_obs, od);

        // One curriculum step per completed episode, env-index order.
        for ep in &buffer.episodes {
            let r = normalized_return(ep.ep_return, ep.len, &weights);
            state.curriculum = update_curriculum(
                &state.curriculum,
                r,
                setup.config.curriculum.eta,
                setup.config.curriculum.tau,
            )
            .map_err(|e| LearnerError::BadHyper(match e {
                crate::reward::RewardError::BadRange(m) => m,
                _ => "curriculum update failed",
            }))?;
        }

        state.iter = iter;
        state.env_steps += steps_per_iter;

        let (mean_return, mean_ep_len) = if buffer.episodes.is_empty() {
            // No episode closed this iteration; report running partials.
            let per_env: Vec<f64> = (0..buffer.num_envs)
                .map(|e| {
                    buffer.rewards[e * buffer.steps..(e + 1) * buffer.steps].iter().sum::<f64>()
                })
                .collect();
            (
                per_env.iter().sum::<f64>() / buffer.num_envs.max(1) as f64,
                buffer.steps as f64,
            )
        } else {
            let n = buffer.episodes.len() as f64;
            (
                buffer.episodes.iter().map(|e| e.ep_return).sum::<f64>() / n,
                buffer.episodes.iter().map(|e| e.len as f64).sum::<f64>() / n,
            )
        };

        let nt = buffer.len() as f64;
        let t = &buffer.term_sums;
        let row = MetricsRow {
            iter,
            env_steps: state.env_steps,
            mean_return,
            mean_ep_len,
            terms: TermMeans {
                alive: t[0] / nt,
                upright: t[1] / nt,
                height: t[2] / nt,
                lin_vel: t[3] / nt,
                yaw_rate: t[4] / nt,
                torque: t[5] / nt,
                action_rate: t[6] / nt,
                gait_match: t[7] / nt,
                jump_apex: t[8] / nt,
            },
            lambda: state.curriculum.lambda,
            loss_pi: stats.loss_pi,
            loss_v: stats.loss_v,
            kl: stats.approx_kl,
            entropy: stats.entropy,
            clip_frac: stats.clip_frac,
        };
        let line = serde_json::to_string(&row).map_err(|e| LearnerError::Checkpoint(e.to_string()))?;
        writeln!(metrics, "{line}")?;
        metrics.flush()?;

        if session.checkpoint_every > 0 && iter % session.checkpoint_every == 0 {
            save_checkpoint(&session.out_dir.join(format!("ckpt_{iter}.bin")), &state)?;
        }
    }

    let final_path = session.out_dir.join("final.bin");
    save_checkpoint(&final_path, &state)?;
    Ok(TrainOutcome {
        iterations: state.iter,
        env_steps: state.env_steps,
        final_checkpoint: final_path,
        metrics_path,
        curriculum: state.curriculum,
    })
}
