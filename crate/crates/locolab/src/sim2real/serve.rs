//! Deterministic policy serving over the wire protocol: one receive loop
//! feeding a latest-value mailbox, one transmit loop running the policy at
//! a fixed rate.

use std::io::Write;
use std::net::UdpSocket;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use nalgebra::DVector;

use super::estimator::StateEstimator;
use super::wire::{decode_frame, encode_frame, CommandPayload, FrameType, StatePayload};
use super::{SessionRow, Sim2RealError};
use crate::gait::{advance_clock, compose_action, ff_signal, Command, GaitClock};
use crate::learner::{policy_forward, EnvSetup, PolicyParams};
use crate::morphology::Task;

/// A loaded policy plus the run description it was trained under.
pub struct PolicySession {
    pub setup: EnvSetup,
    pub params: PolicyParams,
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub rate_hz: f64,
    pub duration_s: f64,
    pub command: Command,
    /// Consecutive ticks without a fresh state before streaming the default
    /// pose instead of policy output.
    pub safe_stop_after: u32,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions {
            rate_hz: 50.0,
            duration_s: 30.0,
            command: Command { vx: 0.0, vy: 0.0, yaw_rate: 0.0 },
            safe_stop_after: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ServeReport {
    pub commands_sent: u64,
    pub states_received: u64,
    pub crc_failures: u64,
    pub stale_dropped: u64,
    pub safe_stop_ticks: u64,
    pub elapsed_s: f64,
    /// Wall time of the command loop itself; commands_sent / tick_loop_s is
    /// the achieved rate.
    pub tick_loop_s: f64,
}

struct Mailbox {
    latest: Mutex<Option<(u32, StatePayload, u64)>>,
    states: AtomicU64,
    crc_failures: AtomicU64,
    stale: AtomicU64,
}

/// Streams policy commands to `endpoint` at the configured rate, logging
/// both directions as JSONL when `log_path` is given. Sends RESET first;
/// runs the policy deterministically (mean action); tolerates
/// `safe_stop_after` missed states before holding the default pose; aborts
/// with `Timeout` after a full second without state.
pub fn serve_policy(
    session: &PolicySession,
    endpoint: &str,
    opts: &ServeOptions,
    log_path: Option<&Path>,
) -> Result<ServeReport, Sim2RealError> {
    let setup = &session.setup;
    let params = &session.params;
    let socket = UdpSocket::bind("0.0.0.0:0").map_err(|e| Sim2RealError::BindFailure {
        addr: "0.0.0.0:0".into(),
        err: e.to_string(),
    })?;
    socket
        .connect(endpoint)
        .map_err(|e| Sim2RealError::Session(format!("cannot reach {endpoint}: {e}")))?;

    let mailbox = Arc::new(Mailbox {
        latest: Mutex::new(None),
        states: AtomicU64::new(0),
        crc_failures: AtomicU64::new(0),
        stale: AtomicU64::new(0),
    });
    let stop = Arc::new(AtomicBool::new(false));
    let t0 = Instant::now();

    let rx_socket = socket.try_clone()?;
    rx_socket.set_read_timeout(Some(Duration::from_millis(20)))?;
    let rx_mailbox = mailbox.clone();
    let rx_stop = stop.clone();
    let rx = std::thread::spawn(move || {
        let mut buf = [0u8; 2048];
        while !rx_stop.load(Ordering::Relaxed) {
            match rx_socket.recv(&mut buf) {
                Ok(n) => match decode_frame(&buf[..n]) {
                    Ok(frame) if frame.frame_type == FrameType::State => {
                        match StatePayload::decode(&frame.payload) {
                            Ok(payload) => {
                                let mut slot = rx_mailbox.latest.lock().unwrap();
                                let fresh = slot
                                    .as_ref()
                                    .map(|(seq, _, _)| frame.sequence > *seq)
                                    .unwrap_or(true);
                                if fresh {
                                    *slot = Some((
                                        frame.sequence,
                                        payload,
                                        t0.elapsed().as_micros() as u64,
                                    ));
                                    rx_mailbox.states.fetch_add(1, Ordering::Relaxed);
                                } else {
                                    rx_mailbox.stale.fetch_add(1, Ordering::Relaxed);
                                }
                            }
                            Err(_) => {
                                rx_mailbox.crc_failures.fetch_add(1, Ordering::Relaxed);
                            }
                        }
                    }
                    Ok(_) => {}
                    Err(_) => {
                        rx_mailbox.crc_failures.fetch_add(1, Ordering::Relaxed);
                    }
                },
                Err(_) => {}
            }
        }
    });

    let mut log = match log_path {
        Some(p) => Some(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => None,
    };
    let write_row = |log: &mut Option<std::io::BufWriter<std::fs::File>>,
                         row: &SessionRow|
     -> Result<(), Sim2RealError> {
        if let Some(w) = log {
            let line = serde_json::to_string(row).map_err(|e| Sim2RealError::Session(e.to_string()))?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    };

    let run = (|| -> Result<ServeReport, Sim2RealError> {
        let mut report = ServeReport::default();
        let mut seq = 1u32;
        let reset = encode_frame(FrameType::Reset, seq, 0, &[])?;
        socket.send(&reset)?;

        // Wait for the first state.
        let wait_start = Instant::now();
        loop {
            if mailbox.latest.lock().unwrap().is_some() {
                break;
            }
            if wait_start.elapsed() > Duration::from_secs(1) {
                return Err(Sim2RealError::Timeout("no state within 1 s of RESET".into()));
            }
            std::thread::sleep(Duration::from_millis(2));
        }

        let dof = setup.dof();
        let q0 = DVector::from_column_slice(&setup.profile.default_pose_q0);
        let mut estimator =
            StateEstimator::new(setup.model.clone(), nalgebra::Vector3::new(0.0, 0.0, -9.81));
        let mut clock = GaitClock::new(setup.config.feedforward.frequency_hz);
        let mut prev_out = DVector::zeros(dof);
        let mut last_seen_seq = 0u32;
        let mut last_fresh = Instant::now();
        let mut missed = 0u32;

        let period = Duration::from_secs_f64(1.0 / opts.rate_hz);
        let ticks = (opts.duration_s * opts.rate_hz).round() as u64;
        let loop_start = Instant::now();
        let mut next_tick = loop_start + period;
        let mode = if setup.config.task == Task::Drive { 1u8 } else { 0u8 };

        for _ in 0..ticks {
            let now = Instant::now();
            if next_tick > now {
                std::thread::sleep(next_tick - now);
            }
            next_tick += period;

            let latest = mailbox.latest.lock().unwrap().clone();
            let mut grounded = true;
            let target = match latest {
                Some((rx_seq, payload, t_us)) if rx_seq > last_seen_seq => {
                    last_seen_seq = rx_seq;
                    last_fresh = Instant::now();
                    missed = 0;
                    let est = estimator.ingest(&payload, t_us);
                    grounded = setup
                        .profile
                        .foot_links
                        .iter()
                        .any(|&fl| est.link_in_contact(fl));
                    write_row(
                        &mut log,
                        &SessionRow {
                            t_us,
                            seq: rx_seq,
                            kind: "state".into(),
                            values: est
                                .q
                                .iter()
                                .chain(est.qd.iter())
                                .copied()
                                .collect(),
                        },
                    )?;
                    report.states_received += 1;

                    let raw = crate::learner::raw_obs(
                        &est,
                        &clock,
                        opts.command,
                        prev_out.as_slice(),
                        &setup.profile.default_pose_q0,
                    );
                    let obs = params.obs_norm.normalize(&raw);
                    let (mean, _) = policy_forward(params, &obs);
                    let ff = ff_signal(&setup.profile, &setup.config, &clock, opts.command, &setup.limits);
                    let target = compose_action(
                        &ff,
                        mean.as_slice(),
                        &setup.config.action_scale,
                        &setup.dofs,
                        &setup.modes,
                    )
                    .map_err(|e| Sim2RealError::Session(e.to_string()))?;
                    prev_out = mean;
                    target
                }
                _ => {
                    missed += 1;
                    if last_fresh.elapsed() > Duration::from_secs(1) {
                        return Err(Sim2RealError::Timeout("no state for 1 s".into()));
                    }
                    if missed > opts.safe_stop_after {
                        report.safe_stop_ticks += 1;
                        q0.clone()
                    } else {
                        // Brief gap: repeat the last composed intent by
                        // holding the default pose feedforward.
                        let ff = ff_signal(
                            &setup.profile,
                            &setup.config,
                            &clock,
                            opts.command,
                            &setup.limits,
                        );
                        ff.q_ff.clone()
                    }
                }
            };

            seq += 1;
            let cmd = CommandPayload {
                mode,
                values: target.iter().map(|v| *v as f32).collect(),
            };
            let t_us = t0.elapsed().as_micros() as u64;
            let frame = encode_frame(FrameType::Command, seq, t_us, &cmd.encode())?;
            socket.send(&frame)?;
            report.commands_sent += 1;
            write_row(
                &mut log,
                &SessionRow {
                    t_us,
                    seq,
                    kind: "command".into(),
                    values: target.iter().copied().collect(),
                },
            )?;

            clock = advance_clock(&clock, 1.0 / opts.rate_hz, grounded);
        }

        report.tick_loop_s = loop_start.elapsed().as_secs_f64();
        report.elapsed_s = t0.elapsed().as_secs_f64();
        report.crc_failures = mailbox.crc_failures.load(Ordering::Relaxed);
        report.stale_dropped = mailbox.stale.load(Ordering::Relaxed);
        Ok(report)
    })();

    stop.store(true, Ordering::Relaxed);
    let _ = rx.join();
    if let Some(mut w) = log {
        let _ = w.flush();
    }
    run
}
