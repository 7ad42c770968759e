//! Encode and decode wire frames by hand, and demonstrate that corrupted
//! datagrams are rejected.
//!
//!   cargo run -p locolab --example wire_frames

use locolab::sim2real::{
    crc32, decode_frame, encode_frame, CommandPayload, FrameType, StatePayload,
};

fn main() {
    println!("CRC-32 of \"123456789\": 0x{:08X}", crc32(b"123456789"));

    let cmd = CommandPayload { mode: 0, values: vec![0.40, -0.78, 0.40, -0.78] };
    let frame = encode_frame(FrameType::Command, 1, 20_000, &cmd.encode()).unwrap();
    println!("command frame: {} bytes ({} payload)", frame.len(), cmd.encode().len());

    let decoded = decode_frame(&frame).unwrap();
    let payload = CommandPayload::decode(&decoded.payload).unwrap();
    println!("decoded seq {} with targets {:?}", decoded.sequence, payload.values);

    let state = StatePayload {
        q: vec![0.41, -0.77, 0.40, -0.78],
        qd: vec![0.0; 4],
        base_quat: [1.0, 0.0, 0.0, 0.0],
        gyro: [0.0, 0.01, 0.0],
        accel: [0.0, 0.0, 9.81],
    };
    let frame = encode_frame(FrameType::State, 2, 40_000, &state.encode()).unwrap();
    println!("state frame: {} bytes", frame.len());

    let mut corrupted = frame.clone();
    corrupted[25] ^= 0x10;
    match decode_frame(&corrupted) {
        Err(e) => println!("single flipped bit rejected: {e}"),
        Ok(_) => unreachable!("corruption must not decode"),
    }

    let reset = encode_frame(FrameType::Reset, 3, 60_000, &[]).unwrap();
    println!("reset frame is exactly {} bytes (20 header + 0 payload + 4 crc)", reset.len());
}
