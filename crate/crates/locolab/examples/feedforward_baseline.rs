//! Run the pure gait feedforward (zero policy residual) on the bundled
//! quadruped and report how long it stays upright while trotting in place.
//!
//!   cargo run -p locolab --example feedforward_baseline

use locolab::assets;
use locolab::gait::{advance_clock, compose_action, ff_signal, Command, GaitClock};
use locolab::learner::EnvSetup;
use locolab::morphology::{auto_configure, extract_profile, RobotType, Task};
use locolab::physics::{build_sim, step, terrain_height, Terrain};

fn main() {
    let model = assets::quadruped_min();
    let profile = extract_profile(&model, RobotType::Quadruped).expect("quadruped profile");
    let config = auto_configure(&model, &profile, Task::Trot).expect("trot config");
    let sim = locolab::harness::tuned_sim_params(&model);
    let setup = EnvSetup::new(
        model.clone(),
        profile.clone(),
        config.clone(),
        sim,
        Terrain::default(),
        0,
    );

    let actuation = locolab::morphology::actuation_for(&profile, &config);
    let (ctx, mut state) = build_sim(
        &model,
        &profile.default_pose_q0,
        Terrain::default(),
        sim,
        actuation,
        0,
        false,
    )
    .expect("sim builds");

    let command = Command { vx: 0.0, vy: 0.0, yaw_rate: 0.0 };
    let mut clock = GaitClock::new(config.feedforward.frequency_hz);
    let zeros = vec![0.0; setup.dof()];
    let dt = sim.control_dt();

    let seconds = 10.0;
    let ticks = (seconds / dt) as usize;
    let mut fell_at = None;
    for t in 0..ticks {
        let ff = ff_signal(&profile, &config, &clock, command, &setup.limits);
        let target = compose_action(&ff, &zeros, &config.action_scale, &setup.dofs, &setup.modes)
            .expect("compose");
        state = step(&ctx, &state, &target);
        let grounded = profile.foot_links.iter().any(|&fl| state.link_in_contact(fl));
        clock = advance_clock(&clock, dt, grounded);

        let (ground, _) = terrain_height(&Terrain::default(), state.base_pos.x, state.base_pos.y);
        let height = state.base_pos.z - ground;
        if t % 50 == 0 {
            println!(
                "t={:>5.2}s height={:.3} m ({}% of standing) tilt={:>5.1} deg x={:+.3}",
                state.time,
                height,
                (100.0 * height / profile.standing_height) as i32,
                state.tilt_angle().to_degrees(),
                state.base_pos.x
            );
        }
        if height < 0.5 * profile.standing_height && fell_at.is_none() {
            fell_at = Some(state.time);
        }
    }

    match fell_at {
        Some(t) => println!("fell below 50% standing height at t = {t:.2} s"),
        None => println!("stayed up for the full {seconds} s"),
    }
}
