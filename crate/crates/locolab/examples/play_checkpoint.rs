//! Train briefly, then play the checkpoint back deterministically and
//! record a trajectory JSONL for external plotting.
//!
//!   cargo run --release -p locolab --example play_checkpoint

use locolab::gait::Command;
use locolab::harness::{cmd_play, cmd_train, FlagOverrides, PlayArgs, TrainArgs};
use locolab::morphology::Task;

fn main() {
    let out = std::env::temp_dir().join("locolab_example_play");
    let _ = std::fs::remove_dir_all(&out);
    let robot = format!("{}/assets/quadruped_min.urdf", env!("CARGO_MANIFEST_DIR"));

    let (_, outcome) = cmd_train(&TrainArgs {
        config_path: None,
        flags: FlagOverrides {
            robot_path: Some(robot),
            task: Some(Task::Trot),
            seed: Some(1),
            total_env_steps: Some(16_000),
            out_dir: Some(out.clone()),
            ..Default::default()
        },
        resume_from: None,
    })
    .expect("training runs");

    let traj = out.join("trajectory.jsonl");
    let summary = cmd_play(&PlayArgs {
        checkpoint: outcome.final_checkpoint,
        config_path: None,
        episodes: 5,
        max_ticks: None,
        command: Command { vx: 0.4, vy: 0.0, yaw_rate: 0.0 },
        record: Some(traj.clone()),
        ff_only: false,
    })
    .expect("playback runs");

    println!(
        "{} episodes, {} ticks: mean velocity {:.3} m/s, mean return {:.1}, falls {}",
        summary.episodes, summary.ticks, summary.mean_velocity, summary.mean_return, summary.fall_count
    );
    println!("trajectory rows: {}", std::fs::read_to_string(&traj).unwrap().lines().count());
    println!("wrote {}", traj.display());
}
