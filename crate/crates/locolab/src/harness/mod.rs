//! Configuration, artifacts, and the operations behind the CLI verbs.

mod artifacts;
mod commands;
mod config;

pub use artifacts::{write_atomic, write_json_atomic};
pub use commands::{
    cmd_align, cmd_import, cmd_mock, cmd_play, cmd_serve, cmd_sweep, cmd_train,
    load_policy_session, MockArgs, PlayArgs, ServeArgs, SweepOutcome, SweepRow, TrainArgs,
};
pub use config::{
    absolute_path, load_robot, prepare_run, read_config_file, tuned_sim_params, variant_seed, ConfigFile,
    FlagOverrides, PpoOverrides, PreparedRun, ResolvedConfig, RunConfig, SweepAxis, SweepSpec,
    TrainOverrides,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("robot error: {0}")]
    Robot(String),
    #[error("training error: {0}")]
    Train(String),
    #[error("sim2real error: {0}")]
    Sim2Real(String),
    #[error("io error: {0}")]
    Io(String),
}

impl HarnessError {
    /// CLI exit code: 2 for I/O problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io(_) => 2,
            _ => 1,
        }
    }
}
