//! Full sim2real loop on one machine: spawn the mock robot on a UDP port,
//! then stream a policy to it at 50 Hz and report the session statistics.
//!
//!   cargo run --release -p locolab --example sim2real_loopback

use locolab::assets;
use locolab::gait::Command;
use locolab::harness::tuned_sim_params;
use locolab::learner::{obs_dim, EnvSetup, PolicyParams};
use locolab::morphology::{auto_configure, extract_profile, RobotType, Task};
use locolab::physics::Terrain;
use locolab::sim2real::{serve_policy, spawn_mock, MockRobotConfig, PolicySession, ServeOptions};

fn main() {
    let model = assets::quadruped_min();
    let profile = extract_profile(&model, RobotType::Quadruped).unwrap();
    let config = auto_configure(&model, &profile, Task::Trot).unwrap();
    let sim = tuned_sim_params(&model);

    let mock = spawn_mock(
        MockRobotConfig {
            model: model.clone(),
            profile: profile.clone(),
            config: config.clone(),
            terrain: Terrain::default(),
            sim,
            seed: 0,
        },
        "127.0.0.1:0",
        50.0,
    )
    .expect("mock robot binds");
    println!("mock robot on {}", mock.addr());

    // An untrained policy: near-zero residual around the gait feedforward.
    let setup = EnvSetup::new(model, profile, config, sim, Terrain::default(), 0);
    let dof = setup.dof();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let params = PolicyParams::init(obs_dim(dof), dof, (32, 32), &mut rng);
    let session = PolicySession { setup, params };

    let log = std::env::temp_dir().join("locolab_loopback_session.jsonl");
    let report = serve_policy(
        &session,
        &mock.addr().to_string(),
        &ServeOptions { rate_hz: 50.0, duration_s: 5.0, command: Command::zero(), ..Default::default() },
        Some(&log),
    )
    .expect("session completes");
    mock.stop();

    println!(
        "sent {} commands, received {} states, {} crc failures, {} stale frames dropped",
        report.commands_sent, report.states_received, report.crc_failures, report.stale_dropped
    );
    println!(
        "effective rate {:.2} Hz over {:.1} s",
        report.commands_sent as f64 / report.tick_loop_s,
        report.tick_loop_s
    );
    println!("session log: {}", log.display());
}
