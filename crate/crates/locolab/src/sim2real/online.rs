//! Environment backend over the wire protocol: presents the same
//! step/reset contract as the local simulator, so the trainer can consume
//! real-world motion data unchanged (one environment).

use std::net::UdpSocket;
use std::time::{Duration, Instant};

use nalgebra::DVector;

use super::estimator::StateEstimator;
use super::wire::{decode_frame, encode_frame, CommandPayload, FrameType, StatePayload};
use super::Sim2RealError;
use crate::learner::{EnvSetup, RobotBackend};
use crate::morphology::Task;
use crate::physics::SimState;

pub struct OnlineBackend {
    socket: UdpSocket,
    estimator: StateEstimator,
    mode: u8,
    seq: u32,
    last_state_seq: u32,
    timeout: Duration,
    t0: Instant,
}

/// Connects an environment backend to a robot endpoint.
pub fn online_env(setup: &EnvSetup, endpoint: &str) -> Result<OnlineBackend, Sim2RealError> {
    let socket = UdpSocket::bind("0.0.0.0:0").map_err(|e| Sim2RealError::BindFailure {
        addr: "0.0.0.0:0".into(),
        err: e.to_string(),
    })?;
    socket
        .connect(endpoint)
        .map_err(|e| Sim2RealError::Session(format!("cannot reach {endpoint}: {e}")))?;
    socket.set_read_timeout(Some(Duration::from_millis(50)))?;
    Ok(OnlineBackend {
        socket,
        estimator: StateEstimator::new(setup.model.clone(), nalgebra::Vector3::new(0.0, 0.0, -9.81)),
        mode: if setup.config.task == Task::Drive { 1 } else { 0 },
        seq: 0,
        last_state_seq: 0,
        timeout: Duration::from_secs(1),
        t0: Instant::now(),
    })
}

impl OnlineBackend {
    /// Blocks until a state frame newer than the last one arrives.
    fn next_state(&mut self) -> Result<(StatePayload, u64), String> {
        let deadline = Instant::now() + self.timeout;
        let mut buf = [0u8; 2048];
        loop {
            if Instant::now() > deadline {
                return Err("timeout waiting for state".into());
            }
            let n = match self.socket.recv(&mut buf) {
                Ok(n) => n,
                Err(_) => continue,
            };
            let frame = decode_frame(&buf[..n]).map_err(|e| e.to_string())?;
            if frame.frame_type != FrameType::State {
                continue;
            }
            if frame.sequence <= self.last_state_seq {
                continue;
            }
            let payload = StatePayload::decode(&frame.payload).map_err(|e| e.to_string())?;
            self.last_state_seq = frame.sequence;
            return Ok((payload, frame.timestamp_us));
        }
    }
}

impl RobotBackend for OnlineBackend {
    fn reset(&mut self, _seed: u64) -> Result<SimState, String> {
        self.estimator.reset();
        self.seq += 1;
        let frame = encode_frame(
            FrameType::Reset,
            self.seq,
            self.t0.elapsed().as_micros() as u64,
            &[],
        )
        .map_err(|e| e.to_string())?;
        self.socket.send(&frame).map_err(|e| e.to_string())?;
        // The confirmation is the first state of the fresh instance.
        let (payload, t_us) = self.next_state()?;
        Ok(self.estimator.ingest(&payload, t_us))
    }

    fn step(&mut self, q_target: &DVector<f64>) -> Result<SimState, String> {
        self.seq += 1;
        let cmd = CommandPayload {
            mode: self.mode,
            values: q_target.iter().map(|v| *v as f32).collect(),
        };
        let frame = encode_frame(
            FrameType::Command,
            self.seq,
            self.t0.elapsed().as_micros() as u64,
            &cmd.encode(),
        )
        .map_err(|e| e.to_string())?;
        self.socket.send(&frame).map_err(|e| e.to_string())?;
        let (payload, t_us) = self.next_state()?;
        Ok(self.estimator.ingest(&payload, t_us))
    }
}
