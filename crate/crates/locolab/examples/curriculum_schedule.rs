//! The adaptive reward curriculum in isolation: feed a synthetic stream of
//! normalized episode returns and watch the blend move the weights from
//! the stability-heavy mix toward the task-heavy mix.
//!
//!   cargo run -p locolab --example curriculum_schedule

use locolab::reward::{current_weights, update_curriculum, CurriculumState, RewardWeights};

fn main() {
    let init = RewardWeights {
        alive: 1.0,
        upright: 1.0,
        height: 0.5,
        lin_vel: 0.2,
        yaw_rate: 0.1,
        torque: 1e-4,
        action_rate: 0.01,
        gait_match: 0.0,
        jump_apex: 0.0,
    };
    let fin = RewardWeights {
        alive: 0.5,
        upright: 0.5,
        height: 0.5,
        lin_vel: 1.5,
        yaw_rate: 0.75,
        torque: 1e-4,
        action_rate: 0.01,
        gait_match: 0.5,
        jump_apex: 0.0,
    };

    let mut cs = CurriculumState::default();
    println!("{:>8} {:>9} {:>8} {:>8} {:>10}", "episode", "perf_ema", "lambda", "lin_vel", "gait_match");
    for episode in 0..2000u32 {
        // An agent that starts badly and steadily improves.
        let skill = (episode as f64 / 600.0).min(1.0);
        let ret = 0.25 + 0.65 * skill;
        cs = update_curriculum(&cs, ret, 0.01, 0.5).expect("valid ranges");
        if episode % 250 == 0 || episode == 1999 {
            let w = current_weights(&cs, &init, &fin);
            println!(
                "{:>8} {:>9.3} {:>8.3} {:>8.3} {:>10.3}",
                episode, cs.perf_ema, cs.lambda, w.lin_vel, w.gait_match
            );
        }
    }
    println!("\nweights are a convex blend: velocity tracking ramps up only after");
    println!("the return EMA clears the threshold, and never overshoots the final table.");
}
