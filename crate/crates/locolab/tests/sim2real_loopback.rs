//! Desk-scale sim2real checks over loopback UDP: the mock robot, the
//! serving loop, state alignment, and online training.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use locolab::assets;
use locolab::gait::Command;
use locolab::harness::tuned_sim_params;
use locolab::learner::{obs_dim, train, EnvSetup, PolicyParams, RobotBackend, TrainSession};
use locolab::morphology::{auto_configure, extract_profile, RobotType, Task};
use locolab::physics::Terrain;
use locolab::sim2real::{
    align_states, online_env, serve_policy, spawn_mock, MockRobot, MockRobotConfig, PolicySession,
    ServeOptions,
};

fn quadruped_setup(seed: u64) -> EnvSetup {
    let model = assets::quadruped_min();
    let profile = extract_profile(&model, RobotType::Quadruped).unwrap();
    let mut config = auto_configure(&model, &profile, Task::Trot).unwrap();
    config.ppo.hidden = (16, 16);
    config.ppo.num_envs = 1;
    config.ppo.steps_per_env = 64;
    config.ppo.workers = 1;
    config.episode_length_s = 2.0;
    let sim = tuned_sim_params(&model);
    EnvSetup::new(model, profile, config, sim, Terrain::default(), seed)
}

fn start_mock(rate_hz: f64) -> MockRobot {
    let model = assets::quadruped_min();
    let profile = extract_profile(&model, RobotType::Quadruped).unwrap();
    let config = auto_configure(&model, &profile, Task::Trot).unwrap();
    spawn_mock(
        MockRobotConfig {
            model: model.clone(),
            profile,
            config,
            terrain: Terrain::default(),
            sim: tuned_sim_params(&model),
            seed: 0,
        },
        "127.0.0.1:0",
        rate_hz,
    )
    .expect("mock binds")
}

/// Default-pose commands keep the mock robot standing; RESET restores the
/// default pose.
#[test]
fn mock_robot_stands_and_resets() {
    let setup = quadruped_setup(1);
    let mock = start_mock(50.0);
    let endpoint = mock.addr().to_string();

    let mut backend = online_env(&setup, &endpoint).expect("connects");
    let state = backend.reset(0).expect("reset answered");
    let q0 = &setup.profile.default_pose_q0;
    for d in 0..setup.dof() {
        assert!(
            (state.q[d] - q0[d]).abs() < 0.05,
            "fresh instance near the default pose (joint {d})"
        );
    }

    // Stream default-pose commands for 3 seconds of robot time.
    let target = nalgebra::DVector::from_column_slice(q0);
    let mut last = state;
    for _ in 0..150 {
        last = backend.step(&target).expect("state flows");
    }
    assert!(
        last.base_pos.z >= 0.9 * setup.profile.standing_height,
        "still standing at {:.3} of {:.3}",
        last.base_pos.z,
        setup.profile.standing_height
    );

    // RESET returns to the default pose.
    let mut nudged = target.clone();
    nudged[0] += 0.3;
    for _ in 0..25 {
        backend.step(&nudged).unwrap();
    }
    let fresh = backend.reset(0).expect("reset");
    for d in 0..setup.dof() {
        assert!((fresh.q[d] - q0[d]).abs() < 0.05, "joint {d} back at default");
    }
    mock.stop();
}

/// Serve a policy against the mock at 50 Hz: commands flow, no CRC
/// failures, both streams land in the session log.
#[test]
fn serve_policy_over_loopback() {
    let setup = quadruped_setup(2);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let params = PolicyParams::init(obs_dim(setup.dof()), setup.dof(), (16, 16), &mut rng);
    let mock = start_mock(50.0);
    let endpoint = mock.addr().to_string();

    let log_path = std::env::temp_dir().join(format!("serve_log_{}.jsonl", std::process::id()));
    let session = PolicySession { setup, params };
    let opts = ServeOptions {
        rate_hz: 50.0,
        duration_s: 3.0,
        command: Command::zero(),
        ..Default::default()
    };
    let report = serve_policy(&session, &endpoint, &opts, Some(&log_path)).expect("serves");
    mock.stop();

    assert!(report.commands_sent >= 145, "{} commands over 3 s at 50 Hz", report.commands_sent);
    assert_eq!(report.crc_failures, 0);
    assert!(report.states_received >= 100);

    let text = std::fs::read_to_string(&log_path).unwrap();
    let mut commands = 0;
    let mut states = 0;
    for line in text.lines() {
        let row: locolab::sim2real::SessionRow = serde_json::from_str(line).unwrap();
        match row.kind.as_str() {
            "command" => commands += 1,
            "state" => states += 1,
            other => panic!("unexpected kind {other}"),
        }
    }
    assert!(commands >= 145 && states >= 100);
    let _ = std::fs::remove_file(&log_path);
}

#[test]
fn serve_without_endpoint_times_out() {
    let setup = quadruped_setup(3);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let params = PolicyParams::init(obs_dim(setup.dof()), setup.dof(), (16, 16), &mut rng);
    let session = PolicySession { setup, params };
    // A bound-but-silent socket: nothing will ever answer.
    let silent = std::net::UdpSocket::bind("127.0.0.1:0").unwrap();
    let endpoint = silent.local_addr().unwrap().to_string();
    let start = std::time::Instant::now();
    let err = serve_policy(&session, &endpoint, &ServeOptions::default(), None).unwrap_err();
    assert!(matches!(err, locolab::sim2real::Sim2RealError::Timeout(_)));
    assert!(start.elapsed().as_secs_f64() < 3.0, "timeout fires at ~1 s");
}

// ---------------------------------------------------------------------------
// Alignment
// ---------------------------------------------------------------------------

fn sine_log(n: usize, shift: i64, noise: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|t| {
            let tt = (t as i64 - shift) as f64;
            vec![
                (0.07 * tt).sin() + noise * rng.gen_range(-1.0..1.0),
                (0.03 * tt).cos() + noise * rng.gen_range(-1.0..1.0),
            ]
        })
        .collect()
}

#[test]
fn identical_logs_align_at_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let log = sine_log(400, 0, 0.0, &mut rng);
    let report = align_states(&log, &log).unwrap();
    for c in &report.channels {
        assert_eq!(c.lag, 0);
        assert!(c.rmse < 1e-12);
    }
    assert!(report.mean_rmse < 1e-12);
}

#[test]
fn shifted_log_reports_exact_lag() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sim = sine_log(500, 0, 0.0, &mut rng);
    for shift in [5i64, -7, 31] {
        let real = sine_log(500, shift, 0.0, &mut rng);
        let report = align_states(&sim, &real).unwrap();
        for c in &report.channels {
            assert_eq!(c.lag, shift, "channel {} lag", c.channel);
            assert!(c.rmse < 1e-9, "lag-corrected rmse ~0, got {}", c.rmse);
        }
    }
}

/// Uncorrelated unit-variance noise: lag-corrected RMSE approaches
/// sqrt(2) * sigma.
#[test]
fn white_noise_rmse_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sigma = 0.4;
    let n = 20_000;
    let a: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![sigma * rng.sample::<f64, _>(rand_distr::StandardNormal)])
        .collect();
    let b: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![sigma * rng.sample::<f64, _>(rand_distr::StandardNormal)])
        .collect();
    let report = align_states(&a, &b).unwrap();
    let expected = (2.0f64).sqrt() * sigma;
    let rel = (report.mean_rmse - expected).abs() / expected;
    assert!(rel < 0.05, "rmse {} vs sqrt(2)*sigma {expected}", report.mean_rmse);
}

#[test]
fn alignment_input_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let short = sine_log(50, 0, 0.0, &mut rng);
    assert!(matches!(
        align_states(&short, &short),
        Err(locolab::sim2real::Sim2RealError::InsufficientOverlap { .. })
    ));
    let a = sine_log(200, 0, 0.0, &mut rng);
    let mut b = sine_log(200, 0, 0.0, &mut rng);
    b[3] = vec![0.0; 5];
    assert!(matches!(
        align_states(&a, &b),
        Err(locolab::sim2real::Sim2RealError::SchemaMismatch(_))
    ));
}

// ---------------------------------------------------------------------------
// Online learning
// ---------------------------------------------------------------------------

/// The trainer runs unchanged against the wire backend: one env, 2048
/// transitions, metrics written.
#[test]
fn online_training_against_mock() {
    let mock = start_mock(200.0);
    let endpoint = mock.addr().to_string();

    let mut setup = quadruped_setup(9);
    setup.config.ppo.num_envs = 1;
    setup.config.ppo.steps_per_env = 256;
    setup.config.ppo.epochs = 2;
    let out_dir = std::env::temp_dir().join(format!("online_train_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&out_dir);
    let session = TrainSession {
        setup,
        total_env_steps: 2048,
        out_dir: out_dir.clone(),
        checkpoint_every: 0,
        resume_from: None,
    };
    let endpoint_for_factory = endpoint.clone();
    let factory = move |_env: usize| -> Box<dyn RobotBackend> {
        Box::new(online_env(&session_setup_ref(), &endpoint_for_factory).expect("connects"))
    };
    // The factory needs setup access; rebuild one locally (identical config).
    fn session_setup_ref() -> EnvSetup {
        let model = assets::quadruped_min();
        let profile = extract_profile(&model, RobotType::Quadruped).unwrap();
        let config = auto_configure(&model, &profile, Task::Trot).unwrap();
        let sim = tuned_sim_params(&model);
        EnvSetup::new(model, profile, config, sim, Terrain::default(), 9)
    }

    let outcome = train(&session, &factory).expect("online training completes");
    mock.stop();
    assert_eq!(outcome.env_steps, 2048, "8 iterations x 256 transitions");
    let metrics = std::fs::read_to_string(PathBuf::from(&outcome.metrics_path)).unwrap();
    assert_eq!(metrics.lines().count(), 8);
    let _ = std::fs::remove_dir_all(&out_dir);
}

/// Reset over the wire answers within the latency budget.
#[test]
fn online_reset_latency() {
    let setup = quadruped_setup(10);
    let mock = start_mock(100.0);
    let endpoint = mock.addr().to_string();
    let mut backend = online_env(&setup, &endpoint).unwrap();
    let _ = backend.reset(0).unwrap();
    let start = std::time::Instant::now();
    let _ = backend.reset(1).unwrap();
    let elapsed = start.elapsed();
    mock.stop();
    assert!(elapsed.as_millis() < 100, "reset latency {} ms", elapsed.as_millis());
}
