//! PPO with generalized advantage estimation over CPU-parallel environment
//! rollouts. The trainer is deterministic: a (seed, config) pair fixes the
//! metrics stream regardless of worker count.

mod checkpoint;
mod gae;
pub mod net;
mod obs;
mod ppo;
mod rollout;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, TrainState, CHECKPOINT_MAGIC};
pub use gae::gae;
pub use net::{
    entropy, log_prob, policy_forward, sample_action, Adam, Mlp, ObsNorm, PolicyParams,
};
pub use obs::{build_obs, obs_dim, raw_obs};
pub use ppo::{normalized_advantages, ppo_grads, ppo_loss, ppo_update, PpoStats};
pub use rollout::{
    evaluate, local_backend_factory, rollout, BackendFactory, EnvRunner, EnvSetup, EpisodeStat,
    EvalSummary, LocalBackend, RobotBackend, RolloutBuffer,
};
pub use train::{train, MetricsRow, TrainOutcome, TrainSession};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("expected vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad hyperparameter: {0}")]
    BadHyper(&'static str),
    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Seed-stream layout: every consumer of randomness derives its own ChaCha
/// stream from the run seed, so adding consumers never disturbs others.
pub(crate) mod streams {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Per-environment stream for iteration `iter`, environment `env`.
    pub fn env_stream(seed: u64, iter: u64, env: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((iter << 24) | (env as u64 & 0xff_ffff));
        rng
    }

    /// Minibatch shuffle stream for iteration `iter`.
    pub fn shuffle_stream(seed: u64, iter: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((1 << 62) | iter);
        rng
    }

    /// Parameter initialization stream.
    pub fn init_stream(seed: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1 << 61);
        rng
    }

    /// Deterministic evaluation episode stream.
    pub fn eval_stream(seed: u64, episode: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((1 << 60) | episode);
        rng
    }
}
