//! Sim-to-real bridge: a binary UDP protocol for streaming motor commands
//! and robot state, a policy-serving loop, a loopback mock robot, the
//! state-alignment analyzer, and an environment backend that lets the
//! trainer run against a live robot.

mod align;
mod estimator;
mod mock;
mod online;
mod serve;
pub mod wire;

pub use align::{align_states, load_session_channels, AlignmentReport, ChannelAlignment};
pub use estimator::StateEstimator;
pub use mock::{spawn_mock, MockRobot, MockRobotConfig};
pub use online::{online_env, OnlineBackend};
pub use serve::{serve_policy, PolicySession, ServeOptions, ServeReport};
pub use wire::{
    crc32, decode_frame, encode_frame, CommandPayload, FrameType, StatePayload, WireError,
    WireFrame,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Sim2RealError {
    #[error("timeout: {0}")]
    Timeout(String),
    #[error("failed to bind {addr}: {err}")]
    BindFailure { addr: String, err: String },
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("insufficient overlap: {got} ticks, need {need}")]
    InsufficientOverlap { got: usize, need: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Session(String),
}

/// One line of a session log: timestamps in microseconds since session
/// start, the frame sequence number, the stream kind ("command" | "state"),
/// and the channel values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionRow {
    pub t_us: u64,
    pub seq: u32,
    pub kind: String,
    pub values: Vec<f64>,
}
