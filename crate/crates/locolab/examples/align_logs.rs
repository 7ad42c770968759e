//! State alignment: build two synthetic state streams where the "real"
//! robot lags the simulation by a known number of ticks, then recover the
//! lag and the lag-corrected error per channel.
//!
//!   cargo run -p locolab --example align_logs

use locolab::sim2real::align_states;

fn main() {
    let n = 600;
    let true_lag = 5i64;
    let sim: Vec<Vec<f64>> = (0..n)
        .map(|t| {
            let tt = t as f64;
            vec![(0.04 * tt).sin(), 0.5 * (0.09 * tt).cos(), 0.1 * (0.02 * tt).sin()]
        })
        .collect();
    let real: Vec<Vec<f64>> = (0..n)
        .map(|t| {
            let tt = (t as i64 - true_lag) as f64;
            vec![
                (0.04 * tt).sin() + 0.005,
                0.5 * (0.09 * tt).cos(),
                0.1 * (0.02 * tt).sin() - 0.002,
            ]
        })
        .collect();

    let report = align_states(&sim, &real).expect("alignment runs");
    println!("constructed lag: {true_lag} ticks");
    for c in &report.channels {
        println!("channel {}: lag {:>3} ticks, lag-corrected rmse {:.5}", c.channel, c.lag, c.rmse);
    }
    println!("mean rmse: {:.5}", report.mean_rmse);
}
