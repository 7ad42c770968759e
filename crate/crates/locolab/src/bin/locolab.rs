//! Thin command-line front end; all behavior lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use locolab::gait::Command as VelocityCommand;
use locolab::harness::{
    cmd_align, cmd_import, cmd_mock, cmd_play, cmd_serve, cmd_sweep, cmd_train, FlagOverrides,
    HarnessError, MockArgs, PlayArgs, ServeArgs, SweepSpec, TrainArgs,
};
use locolab::morphology::{RobotType, Task};

#[derive(Parser)]
#[command(name = "locolab", version, about = "Train locomotion policies for URDF robots")]
struct Cli {
    #[command(subcommand)]
    command: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Parse and validate a URDF, print diagnostics and a morphology suggestion.
    Import {
        urdf_path: String,
        #[arg(long = "type")]
        robot_type: Option<RobotType>,
    },
    /// Train a policy end to end (one command from URDF to checkpoint).
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        robot: Option<String>,
        #[arg(long = "type")]
        robot_type: Option<RobotType>,
        #[arg(long)]
        task: Option<Task>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        envs: Option<usize>,
        #[arg(long)]
        steps_per_env: Option<usize>,
        #[arg(long)]
        checkpoint_every: Option<u64>,
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Deterministic playback of a checkpoint with an evaluation summary.
    Play {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        episodes: usize,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        vx: f64,
        #[arg(long, default_value_t = 0.0)]
        vy: f64,
        #[arg(long, default_value_t = 0.0)]
        yaw: f64,
        #[arg(long)]
        record: Option<PathBuf>,
        /// Zero the residual scale: play the pure gait feedforward.
        #[arg(long)]
        ff_only: bool,
    },
    /// Train and evaluate structural variants, writing sweep_report.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stream a trained policy to a robot endpoint over UDP.
    Serve {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        endpoint: String,
        #[arg(long, default_value_t = 50.0)]
        rate: f64,
        #[arg(long, default_value_t = 30.0)]
        duration: f64,
        #[arg(long, default_value_t = 0.0)]
        vx: f64,
        #[arg(long, default_value_t = 0.0)]
        vy: f64,
        #[arg(long, default_value_t = 0.0)]
        yaw: f64,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run the loopback mock robot.
    Mock {
        #[arg(long)]
        robot: String,
        #[arg(long = "type")]
        robot_type: Option<RobotType>,
        #[arg(long)]
        task: Option<Task>,
        #[arg(long, default_value = "127.0.0.1:7447")]
        listen: String,
        #[arg(long, default_value_t = 50.0)]
        rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Lag-corrected per-channel comparison of two session logs.
    Align {
        #[arg(long)]
        sim: PathBuf,
        #[arg(long)]
        real: PathBuf,
        #[arg(long, default_value = "state")]
        kind: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<i32, HarnessError> {
    let mut stdout = std::io::stdout();
    match cli.command {
        Verb::Import { urdf_path, robot_type } => cmd_import(&mut stdout, &urdf_path, robot_type),
        Verb::Train {
            config,
            robot,
            robot_type,
            task,
            seed,
            steps,
            out,
            workers,
            envs,
            steps_per_env,
            checkpoint_every,
            resume,
        } => {
            let args = TrainArgs {
                config_path: config,
                flags: FlagOverrides {
                    robot_path: robot,
                    robot_type,
                    task,
                    seed,
                    total_env_steps: steps,
                    out_dir: out,
                    workers,
                    num_envs: envs,
                    steps_per_env,
                    checkpoint_every,
                },
                resume_from: resume,
            };
            let (prepared, outcome) = cmd_train(&args)?;
            println!(
                "trained {} iterations / {} env steps -> {}",
                outcome.iterations,
                outcome.env_steps,
                outcome.final_checkpoint.display()
            );
            println!(
                "out_dir: {}  lambda: {:.4}",
                prepared.out_dir.display(),
                outcome.curriculum.lambda
            );
            Ok(0)
        }
        Verb::Play { ckpt, config, episodes, steps, vx, vy, yaw, record, ff_only } => {
            let summary = cmd_play(&PlayArgs {
                checkpoint: ckpt,
                config_path: config,
                episodes,
                max_ticks: steps,
                command: VelocityCommand { vx, vy, yaw_rate: yaw },
                record,
                ff_only,
            })?;
            println!(
                "episodes: {}  ticks: {}  mean velocity: {:.4} m/s  mean return: {:.4}  falls: {} ({:.0}%)",
                summary.episodes,
                summary.ticks,
                summary.mean_velocity,
                summary.mean_return,
                summary.fall_count,
                summary.fall_rate * 100.0
            );
            Ok(0)
        }
        Verb::Sweep { config, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| HarnessError::Io(format!("{}: {e}", config.display())))?;
            let spec: SweepSpec = serde_json::from_str(&text)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", config.display())))?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from("sweep_out"));
            let outcome = cmd_sweep(&mut stdout, &spec, &out_dir)?;
            println!("wrote {}", outcome.csv_path.display());
            Ok(0)
        }
        Verb::Serve { ckpt, config, endpoint, rate, duration, vx, vy, yaw, log } => {
            let report = cmd_serve(&ServeArgs {
                checkpoint: ckpt,
                config_path: config,
                endpoint,
                rate_hz: rate,
                duration_s: duration,
                command: VelocityCommand { vx, vy, yaw_rate: yaw },
                log_path: log,
            })?;
            println!(
                "sent {} commands, saw {} states, {} crc failures, {} stale dropped, {} safe-stop ticks in {:.1} s",
                report.commands_sent,
                report.states_received,
                report.crc_failures,
                report.stale_dropped,
                report.safe_stop_ticks,
                report.elapsed_s
            );
            Ok(0)
        }
        Verb::Mock { robot, robot_type, task, listen, rate, seed, duration } => {
            cmd_mock(
                &mut stdout,
                &MockArgs {
                    robot_path: robot,
                    robot_type,
                    task,
                    listen,
                    rate_hz: rate,
                    seed,
                    duration_s: duration,
                },
            )?;
            Ok(0)
        }
        Verb::Align { sim, real, kind } => {
            cmd_align(&mut stdout, &sim, &real, &kind)?;
            Ok(0)
        }
    }
}
