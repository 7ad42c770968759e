//! Loopback mock robot: the physics module ticked in real time behind the
//! wire protocol, standing in for hardware in desk-scale tests.

use std::net::UdpSocket;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use nalgebra::DVector;

use super::wire::{
    decode_frame, encode_frame, CommandPayload, FrameType, StatePayload,
};
use super::Sim2RealError;
use crate::model::RobotModel;
use crate::morphology::{actuation_for, MorphologyProfile, TrainConfig};
use crate::physics::{build_sim, step, SimParams, Terrain};

pub struct MockRobotConfig {
    pub model: RobotModel,
    pub profile: MorphologyProfile,
    pub config: TrainConfig,
    pub terrain: Terrain,
    pub sim: SimParams,
    pub seed: u64,
}

pub struct MockRobot {
    addr: std::net::SocketAddr,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockRobot {
    pub fn addr(&self) -> std::net::SocketAddr {
        self.addr
    }

    pub fn stop(mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for MockRobot {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

/// Binds `listen` and runs the robot loop on a background thread until
/// stopped: COMMAND frames update the held target, RESET rebuilds the
/// instance and answers with an ACK, and a STATE frame goes out every tick
/// to the last peer. With no fresh commands the last target is held.
pub fn spawn_mock(
    cfg: MockRobotConfig,
    listen: &str,
    rate_hz: f64,
) -> Result<MockRobot, Sim2RealError> {
    let socket = UdpSocket::bind(listen).map_err(|e| Sim2RealError::BindFailure {
        addr: listen.to_string(),
        err: e.to_string(),
    })?;
    let addr = socket.local_addr()?;
    socket.set_read_timeout(Some(Duration::from_millis(1)))?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_thread = stop.clone();

    // Align the control period with the wire rate.
    let mut sim = cfg.sim;
    let period = 1.0 / rate_hz;
    sim.substeps_per_control = (period / sim.dt_physics).round().max(1.0) as u32;

    let handle = std::thread::spawn(move || {
        run_mock(cfg, sim, socket, rate_hz, stop_thread);
    });

    Ok(MockRobot { addr, stop, handle: Some(handle) })
}

fn run_mock(cfg: MockRobotConfig, sim: SimParams, socket: UdpSocket, rate_hz: f64, stop: Arc<AtomicBool>) {
    let actuation = actuation_for(&cfg.profile, &cfg.config);
    let build = |seed: u64| {
        build_sim(
            &cfg.model,
            &cfg.profile.default_pose_q0,
            cfg.terrain,
            sim,
            actuation.clone(),
            seed,
            false,
        )
        .expect("mock robot model validated before spawn")
    };

    let (mut ctx, mut state) = build(cfg.seed);
    let dof = ctx.dof;
    let mut resets = 0u64;
    let mut target = initial_target(&cfg, dof);
    let mut peer: Option<std::net::SocketAddr> = None;
    let mut last_cmd_seq = 0u32;
    let mut out_seq = 0u32;
    let mut buf = [0u8; 2048];
    let period = Duration::from_secs_f64(1.0 / rate_hz);
    let t0 = Instant::now();
    let mut next_tick = t0 + period;

    while !stop.load(Ordering::Relaxed) {
        // Drain the socket.
        loop {
            match socket.recv_from(&mut buf) {
                Ok((n, from)) => {
                    let Ok(frame) = decode_frame(&buf[..n]) else { continue };
                    match frame.frame_type {
                        FrameType::Command => {
                            if frame.sequence <= last_cmd_seq {
                                continue;
                            }
                            let Ok(cmd) = CommandPayload::decode(&frame.payload) else {
                                continue;
                            };
                            if cmd.values.len() != dof {
                                continue;
                            }
                            last_cmd_seq = frame.sequence;
                            peer = Some(from);
                            for (i, v) in cmd.values.iter().enumerate() {
                                target[i] = *v as f64;
                            }
                        }
                        FrameType::Reset => {
                            resets += 1;
                            let fresh = build(cfg.seed.wrapping_add(resets));
                            ctx = fresh.0;
                            state = fresh.1;
                            target = initial_target(&cfg, dof);
                            last_cmd_seq = 0;
                            peer = Some(from);
                            out_seq += 1;
                            if let Ok(ack) = encode_frame(
                                FrameType::Ack,
                                out_seq,
                                t0.elapsed().as_micros() as u64,
                                &[],
                            ) {
                                let _ = socket.send_to(&ack, from);
                            }
                        }
                        _ => {}
                    }
                }
                Err(_) => break,
            }
        }

        let now = Instant::now();
        if now >= next_tick {
            state = step(&ctx, &state, &target);
            if let Some(to) = peer {
                let rot_inv = state.base_quat.inverse();
                let gyro = rot_inv * state.base_ang_vel;
                let accel = rot_inv * (state.base_lin_acc - ctx.gravity);
                let payload = StatePayload {
                    q: state.q.iter().map(|v| *v as f32).collect(),
                    qd: state.qd.iter().map(|v| *v as f32).collect(),
                    base_quat: [
                        state.base_quat.w as f32,
                        state.base_quat.i as f32,
                        state.base_quat.j as f32,
                        state.base_quat.k as f32,
                    ],
                    gyro: [gyro.x as f32, gyro.y as f32, gyro.z as f32],
                    accel: [accel.x as f32, accel.y as f32, accel.z as f32],
                };
                out_seq += 1;
                if let Ok(bytes) = encode_frame(
                    FrameType::State,
                    out_seq,
                    t0.elapsed().as_micros() as u64,
                    &payload.encode(),
                ) {
                    let _ = socket.send_to(&bytes, to);
                }
            }
            next_tick += period;
            // Catch up rather than burst if the thread fell behind.
            while next_tick < Instant::now() {
                next_tick += period;
            }
        } else {
            std::thread::sleep(Duration::from_micros(200).min(next_tick - now));
        }
    }
}

/// Hold the default pose; velocity channels (drive mode) hold zero.
fn initial_target(cfg: &MockRobotConfig, dof: usize) -> DVector<f64> {
    let mut t = DVector::from_column_slice(&cfg.profile.default_pose_q0);
    if cfg.config.task == crate::morphology::Task::Drive {
        for d in cfg.profile.wheel_dofs() {
            t[d] = 0.0;
        }
    }
    debug_assert_eq!(t.len(), dof);
    t
}
