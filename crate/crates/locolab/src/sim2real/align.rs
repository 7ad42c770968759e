//! State alignment: lag-corrected per-channel comparison of two session
//! logs via cross-correlation.

use std::path::Path;

use super::{SessionRow, Sim2RealError};

pub const MAX_LAG: i64 = 50;
pub const MIN_OVERLAP: usize = 100;

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ChannelAlignment {
    pub channel: usize,
    /// Ticks by which the real stream trails the sim stream at peak
    /// correlation.
    pub lag: i64,
    pub rmse: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AlignmentReport {
    pub channels: Vec<ChannelAlignment>,
    pub mean_rmse: f64,
}

/// Reads the channel matrix (one row per tick) for rows of `kind` from a
/// session log.
pub fn load_session_channels(path: &Path, kind: &str) -> Result<Vec<Vec<f64>>, Sim2RealError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: SessionRow = serde_json::from_str(line)
            .map_err(|e| Sim2RealError::Session(format!("{}:{}: {e}", path.display(), ln + 1)))?;
        if row.kind == kind {
            rows.push(row.values);
        }
    }
    Ok(rows)
}

/// Cross-correlates each channel over lags within +/-`MAX_LAG` ticks and
/// reports the best lag plus the RMSE after shifting by it.
pub fn align_states(sim: &[Vec<f64>], real: &[Vec<f64>]) -> Result<AlignmentReport, Sim2RealError> {
    let n_sim = sim.len();
    let n_real = real.len();
    let overlap = n_sim.min(n_real);
    if overlap < MIN_OVERLAP {
        return Err(Sim2RealError::InsufficientOverlap { got: overlap, need: MIN_OVERLAP });
    }
    let channels = sim[0].len();
    if channels == 0 {
        return Err(Sim2RealError::SchemaMismatch("empty channel rows".into()));
    }
    for (i, r) in sim.iter().enumerate() {
        if r.len() != channels {
            return Err(Sim2RealError::SchemaMismatch(format!(
                "sim row {i} has {} channels, expected {channels}",
                r.len()
            )));
        }
    }
    for (i, r) in real.iter().enumerate() {
        if r.len() != channels {
            return Err(Sim2RealError::SchemaMismatch(format!(
                "real row {i} has {} channels, expected {channels}",
                r.len()
            )));
        }
    }

    let mut out = Vec::with_capacity(channels);
    let mut rmse_sum = 0.0;
    for c in 0..channels {
        let a: Vec<f64> = sim.iter().map(|r| r[c]).collect();
        let b: Vec<f64> = real.iter().map(|r| r[c]).collect();
        let best_lag = best_lag(&a, &b);
        let rmse = rmse_at_lag(&a, &b, best_lag);
        rmse_sum += rmse;
        out.push(ChannelAlignment { channel: c, lag: best_lag, rmse });
    }

    Ok(AlignmentReport { mean_rmse: rmse_sum / channels as f64, channels: out })
}

/// Lag maximizing the normalized cross-correlation of a against b shifted
/// by the lag (real[t + lag] against sim[t]). Flat channels report lag 0.
fn best_lag(a: &[f64], b: &[f64]) -> i64 {
    let mut best = 0i64;
    let mut best_corr = f64::NEG_INFINITY;
    let mut any = false;
    for lag in -MAX_LAG..=MAX_LAG {
        if let Some(corr) = correlation_at(a, b, lag) {
            any = true;
            if corr > best_corr || (corr == best_corr && lag.abs() < best.abs()) {
                best_corr = corr;
                best = lag;
            }
        }
    }
    if any {
        best
    } else {
        0
    }
}

/// Pearson correlation of sim[t] with real[t + lag] over their overlap.
fn correlation_at(a: &[f64], b: &[f64], lag: i64) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for t in 0..a.len() {
        let u = t as i64 + lag;
        if u >= 0 && (u as usize) < b.len() {
            xs.push(a[t]);
            ys.push(b[u as usize]);
        }
    }
    let n = xs.len();
    if n < MIN_OVERLAP / 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn rmse_at_lag(a: &[f64], b: &[f64], lag: i64) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for t in 0..a.len() {
        let u = t as i64 + lag;
        if u >= 0 && (u as usize) < b.len() {
            let d = a[t] - b[u as usize];
            sum += d * d;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}
