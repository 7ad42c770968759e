//! Structure optimization: train the same task across leg-length variants
//! and collect a CSV mapping the design parameter to performance.
//!
//!   cargo run --release -p locolab --example morphology_sweep

use locolab::gait::Command;
use locolab::harness::{cmd_sweep, RunConfig, SweepAxis, SweepSpec, TrainOverrides};
use locolab::morphology::Task;

fn main() {
    let out = std::env::temp_dir().join("locolab_example_sweep");
    let _ = std::fs::remove_dir_all(&out);

    // Small budgets so the example finishes in about a minute; raise
    // steps_per_variant for a real design study.
    let mut overrides = TrainOverrides::default();
    overrides.ppo.num_envs = Some(8);
    overrides.ppo.steps_per_env = Some(64);

    let spec = SweepSpec {
        base: RunConfig {
            robot_path: format!("{}/assets/quadruped_min.urdf", env!("CARGO_MANIFEST_DIR")),
            robot_type: None,
            task: Task::Trot,
            seed: 11,
            total_env_steps: 0,
            terrain: Default::default(),
            sim: None,
            out_dir: None,
            checkpoint_every: 0,
            overrides,
        },
        axis: SweepAxis::LinkScale { pattern: "*_lower".into(), factors: vec![0.8, 1.0, 1.2] },
        steps_per_variant: 4096,
        eval_episodes: Some(5),
        eval_command: Some(Command { vx: 0.4, vy: 0.0, yaw_rate: 0.0 }),
    };

    let mut stdout = std::io::stdout();
    let outcome = cmd_sweep(&mut stdout, &spec, &out).expect("sweep runs");
    println!("\n{}", std::fs::read_to_string(&outcome.csv_path).unwrap());
    println!("wrote {}", outcome.csv_path.display());
}
