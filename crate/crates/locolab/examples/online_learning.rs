//! Online learning: run the PPO trainer against a robot endpoint instead of
//! the local simulator. Here the endpoint is the loopback mock; point it at
//! real hardware that speaks the same protocol and nothing else changes.
//!
//!   cargo run --release -p locolab --example online_learning

use locolab::assets;
use locolab::harness::tuned_sim_params;
use locolab::learner::{train, EnvSetup, RobotBackend, TrainSession};
use locolab::morphology::{auto_configure, extract_profile, RobotType, Task};
use locolab::physics::Terrain;
use locolab::sim2real::{online_env, spawn_mock, MockRobotConfig};

fn setup(seed: u64) -> EnvSetup {
    let model = assets::quadruped_min();
    let profile = extract_profile(&model, RobotType::Quadruped).unwrap();
    let mut config = auto_configure(&model, &profile, Task::Trot).unwrap();
    // One real robot = one environment; keep the session short.
    config.ppo.num_envs = 1;
    config.ppo.steps_per_env = 128;
    config.ppo.hidden = (32, 32);
    config.ppo.workers = 1;
    config.episode_length_s = 2.0;
    let sim = tuned_sim_params(&model);
    EnvSetup::new(model, profile, config, sim, Terrain::default(), seed)
}

fn main() {
    let model = assets::quadruped_min();
    let profile = extract_profile(&model, RobotType::Quadruped).unwrap();
    let config = auto_configure(&model, &profile, Task::Trot).unwrap();
    let mock = spawn_mock(
        MockRobotConfig {
            model: model.clone(),
            profile,
            config,
            terrain: Terrain::default(),
            sim: tuned_sim_params(&model),
            seed: 0,
        },
        "127.0.0.1:0",
        200.0,
    )
    .expect("mock robot binds");
    let endpoint = mock.addr().to_string();
    println!("training against {endpoint} (wire protocol, no local physics)");

    let out = std::env::temp_dir().join("locolab_example_online");
    let _ = std::fs::remove_dir_all(&out);
    let session = TrainSession {
        setup: setup(3),
        total_env_steps: 512,
        out_dir: out.clone(),
        checkpoint_every: 0,
        resume_from: None,
    };
    let ep = endpoint.clone();
    let factory = move |_env: usize| -> Box<dyn RobotBackend> {
        Box::new(online_env(&setup(3), &ep).expect("backend connects"))
    };
    let outcome = train(&session, &factory).expect("online training completes");
    mock.stop();

    println!(
        "collected {} real-robot transitions over {} iterations",
        outcome.env_steps, outcome.iterations
    );
    println!("metrics: {}", outcome.metrics_path.display());
}
