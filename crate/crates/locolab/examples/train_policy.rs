//! One-command training, scripted: import the bundled quadruped, auto-
//! configure a trot, and run a short PPO session. Expect ~a minute; bump
//! --steps for a policy that actually tracks commands.
//!
//!   cargo run --release -p locolab --example train_policy
//!   cargo run --release -p locolab --example train_policy -- 100000

use locolab::harness::{cmd_train, FlagOverrides, TrainArgs};
use locolab::morphology::Task;

fn main() {
    let steps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30_000);
    let out = std::env::temp_dir().join("locolab_example_train");
    let _ = std::fs::remove_dir_all(&out);

    let robot = format!("{}/assets/quadruped_min.urdf", env!("CARGO_MANIFEST_DIR"));
    let (prepared, outcome) = cmd_train(&TrainArgs {
        config_path: None,
        flags: FlagOverrides {
            robot_path: Some(robot),
            task: Some(Task::Trot),
            seed: Some(7),
            total_env_steps: Some(steps),
            out_dir: Some(out.clone()),
            ..Default::default()
        },
        resume_from: None,
    })
    .expect("training runs");

    println!("robot type: {}", prepared.resolved.robot_type);
    println!(
        "{} iterations, {} env steps, curriculum lambda {:.3}",
        outcome.iterations, outcome.env_steps, outcome.curriculum.lambda
    );
    println!("final checkpoint: {}", outcome.final_checkpoint.display());
    println!("metrics: {}", outcome.metrics_path.display());

    // Show the last metrics line.
    let metrics = std::fs::read_to_string(&outcome.metrics_path).unwrap();
    if let Some(last) = metrics.lines().last() {
        println!("last iteration: {last}");
    }
}
