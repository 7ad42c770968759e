//! Binary UDP wire format. One frame per datagram:
//!
//! magic 0x55 0x52 0x4C 0x50 | version u8 | frame_type u8 |
//! payload_length u16 LE | sequence u32 LE | timestamp_us u64 LE |
//! payload | crc32 u32 LE over all preceding bytes.
//!
//! CRC-32 uses the IEEE polynomial (reflected 0xEDB88320), init and final
//! xor 0xFFFFFFFF. Receivers verify the CRC before touching the payload;
//! stale frames are dropped by sequence number, never retransmitted.

use thiserror::Error;

pub const WIRE_MAGIC: [u8; 4] = [0x55, 0x52, 0x4C, 0x50];
pub const WIRE_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 20;
pub const MAX_PAYLOAD: usize = 1400;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("payload of {0} bytes exceeds the {MAX_PAYLOAD}-byte datagram budget")]
    PayloadTooLarge(usize),
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("crc mismatch")]
    BadCrc,
    #[error("frame truncated ({0} bytes)")]
    Truncated(usize),
    #[error("payload inconsistent: {0}")]
    BadPayload(String),
    #[error("unknown frame type {0}")]
    BadFrameType(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameType {
    Command = 0x01,
    State = 0x02,
    Reset = 0x03,
    Ack = 0x04,
}

impl TryFrom<u8> for FrameType {
    type Error = WireError;
    fn try_from(v: u8) -> Result<Self, WireError> {
        match v {
            0x01 => Ok(FrameType::Command),
            0x02 => Ok(FrameType::State),
            0x03 => Ok(FrameType::Reset),
            0x04 => Ok(FrameType::Ack),
            other => Err(WireError::BadFrameType(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireFrame {
    pub frame_type: FrameType,
    pub sequence: u32,
    pub timestamp_us: u64,
    pub payload: Vec<u8>,
}

/// Table-driven CRC-32 (reflected IEEE).
fn crc_table() -> &'static [u32; 256] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[u32; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0u32; 256];
        for (i, slot) in table.iter_mut().enumerate() {
            let mut c = i as u32;
            for _ in 0..8 {
                c = if c & 1 != 0 { 0xEDB8_8320 ^ (c >> 1) } else { c >> 1 };
            }
            *slot = c;
        }
        table
    })
}

pub fn crc32(bytes: &[u8]) -> u32 {
    let table = crc_table();
    let mut c = 0xFFFF_FFFFu32;
    for &b in bytes {
        c = table[((c ^ b as u32) & 0xFF) as usize] ^ (c >> 8);
    }
    c ^ 0xFFFF_FFFF
}

pub fn encode_frame(
    frame_type: FrameType,
    sequence: u32,
    timestamp_us: u64,
    payload: &[u8],
) -> Result<Vec<u8>, WireError> {
    if payload.len() > MAX_PAYLOAD {
        return Err(WireError::PayloadTooLarge(payload.len()));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + 4);
    out.extend_from_slice(&WIRE_MAGIC);
    out.push(WIRE_VERSION);
    out.push(frame_type as u8);
    out.extend_from_slice(&(payload.len() as u16).to_le_bytes());
    out.extend_from_slice(&sequence.to_le_bytes());
    out.extend_from_slice(&timestamp_us.to_le_bytes());
    out.extend_from_slice(payload);
    let crc = crc32(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

pub fn decode_frame(bytes: &[u8]) -> Result<WireFrame, WireError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(WireError::Truncated(bytes.len()));
    }
    if bytes[0..4] != WIRE_MAGIC {
        return Err(WireError::BadMagic);
    }
    if bytes[4] != WIRE_VERSION {
        return Err(WireError::BadVersion(bytes[4]));
    }
    let payload_len = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    let expected = HEADER_LEN + payload_len + 4;
    if bytes.len() != expected {
        return Err(WireError::Truncated(bytes.len()));
    }
    let body = &bytes[..expected - 4];
    let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().unwrap());
    if crc32(body) != stored {
        return Err(WireError::BadCrc);
    }
    let frame_type = FrameType::try_from(bytes[5])?;
    let sequence = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let timestamp_us = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    Ok(WireFrame {
        frame_type,
        sequence,
        timestamp_us,
        payload: bytes[HEADER_LEN..HEADER_LEN + payload_len].to_vec(),
    })
}

/// Motor command payload: joint_count u16 | mode u8 | joint_count x f32.
/// Mode 0 carries position targets (rad), mode 1 velocity targets (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct CommandPayload {
    pub mode: u8,
    pub values: Vec<f32>,
}

impl CommandPayload {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3 + 4 * self.values.len());
        out.extend_from_slice(&(self.values.len() as u16).to_le_bytes());
        out.push(self.mode);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() < 3 {
            return Err(WireError::BadPayload("command payload shorter than 3 bytes".into()));
        }
        let n = u16::from_le_bytes([bytes[0], bytes[1]]) as usize;
        if bytes.len() != 3 + 4 * n {
            return Err(WireError::BadPayload(format!(
                "command declares {n} joints but carries {} bytes",
                bytes.len()
            )));
        }
        let mode = bytes[2];
        let values = bytes[3..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(CommandPayload { mode, values })
    }
}

/// Robot state payload:
/// joint_count u16 | q nxf32 | qd nxf32 | base_quat 4xf32 (w,x,y,z) |
/// gyro 3xf32 (rad/s, body frame) | accel 3xf32 (m/s^2, specific force).
#[derive(Debug, Clone, PartialEq)]
pub struct StatePayload {
    pub q: Vec<f32>,
    pub qd: Vec<f32>,
    pub base_quat: [f32; 4],
    pub gyro: [f32; 3],
    pub accel: [f32; 3],
}

impl StatePayload {
    pub fn encode(&self) -> Vec<u8> {
        let n = self.q.len();
        let mut out = Vec::with_capacity(2 + 4 * (2 * n + 10));
        out.extend_from_slice(&(n as u16).to_le_bytes());
        for v in self.q.iter().chain(&self.qd) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.base_quat.iter().chain(&self.gyro).chain(&self.accel) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() < 2 {
            return Err(WireError::BadPayload("state payload shorter than 2 bytes".into()));
        }
        let n = u16::from_le_bytes([bytes[0], bytes[1]]) as usize;
        if bytes.len() != 2 + 4 * (2 * n + 10) {
            return Err(WireError::BadPayload(format!(
                "state declares {n} joints but carries {} bytes",
                bytes.len()
            )));
        }
        let mut f = bytes[2..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()));
        let q: Vec<f32> = (0..n).map(|_| f.next().unwrap()).collect();
        let qd: Vec<f32> = (0..n).map(|_| f.next().unwrap()).collect();
        let mut quat = [0f32; 4];
        for s in quat.iter_mut() {
            *s = f.next().unwrap();
        }
        let mut gyro = [0f32; 3];
        for s in gyro.iter_mut() {
            *s = f.next().unwrap();
        }
        let mut accel = [0f32; 3];
        for s in accel.iter_mut() {
            *s = f.next().unwrap();
        }
        let norm = (quat.iter().map(|v| (*v as f64) * (*v as f64)).sum::<f64>()).sqrt();
        if (norm - 1.0).abs() > 1e-3 {
            return Err(WireError::BadPayload(format!("quaternion norm {norm:.4}")));
        }
        Ok(StatePayload { q, qd, base_quat: quat, gyro, accel })
    }
}
