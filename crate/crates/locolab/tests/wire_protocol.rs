//! Wire-format checks: round-trip identity, corruption rejection, the
//! published CRC-32 check value, and payload validation.

mod oracles;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use locolab::sim2real::{
    crc32, decode_frame, encode_frame, CommandPayload, FrameType, StatePayload, WireError,
};

/// The canonical CRC-32 check value, cross-checked against an independent
/// bitwise implementation.
#[test]
fn crc_check_value() {
    assert_eq!(crc32(b"123456789"), 0xCBF43926);
    assert_eq!(oracles::crc32_bitwise(b"123456789"), 0xCBF43926);
}

#[test]
fn crc_matches_bitwise_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let len = rng.gen_range(0..300);
        let data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        assert_eq!(crc32(&data), oracles::crc32_bitwise(&data));
    }
}

#[test]
fn reset_frame_is_24_bytes() {
    let frame = encode_frame(FrameType::Reset, 1, 42, &[]).unwrap();
    assert_eq!(frame.len(), 24);
    let decoded = decode_frame(&frame).unwrap();
    assert_eq!(decoded.frame_type, FrameType::Reset);
    assert_eq!(decoded.sequence, 1);
    assert_eq!(decoded.timestamp_us, 42);
    assert!(decoded.payload.is_empty());
}

#[test]
fn oversized_payload_is_rejected() {
    let payload = vec![0u8; 1401];
    assert!(matches!(
        encode_frame(FrameType::Command, 1, 0, &payload),
        Err(WireError::PayloadTooLarge(1401))
    ));
    assert!(encode_frame(FrameType::Command, 1, 0, &payload[..1400]).is_ok());
}

#[test]
fn truncation_and_magic_errors() {
    let frame = encode_frame(FrameType::State, 9, 1234, &[1, 2, 3]).unwrap();
    assert!(matches!(decode_frame(&frame[..10]), Err(WireError::Truncated(10))));
    let mut bad = frame.clone();
    bad[0] ^= 0xFF;
    assert!(matches!(decode_frame(&bad), Err(WireError::BadMagic)));
    let mut bad_version = frame.clone();
    bad_version[4] = 9;
    assert!(matches!(decode_frame(&bad_version), Err(WireError::BadVersion(9))));
}

#[test]
fn command_payload_length_rule() {
    let cmd = CommandPayload { mode: 0, values: vec![0.5; 8] };
    let bytes = cmd.encode();
    assert_eq!(bytes.len(), 3 + 4 * 8);
    assert_eq!(CommandPayload::decode(&bytes).unwrap(), cmd);

    // Declared joint count inconsistent with the byte count.
    let mut lying = bytes.clone();
    lying[0] = 4;
    assert!(matches!(CommandPayload::decode(&lying), Err(WireError::BadPayload(_))));
}

#[test]
fn state_payload_roundtrip_and_quat_check() {
    let state = StatePayload {
        q: vec![0.1, -0.2, 0.3],
        qd: vec![1.0, 2.0, -1.5],
        base_quat: [1.0, 0.0, 0.0, 0.0],
        gyro: [0.1, 0.0, -0.1],
        accel: [0.0, 0.0, 9.81],
    };
    let bytes = state.encode();
    assert_eq!(bytes.len(), 2 + 4 * (2 * 3 + 10));
    assert_eq!(StatePayload::decode(&bytes).unwrap(), state);

    let bad = StatePayload { base_quat: [0.5, 0.0, 0.0, 0.0], ..state };
    assert!(matches!(StatePayload::decode(&bad.encode()), Err(WireError::BadPayload(_))));
}

proptest! {
    /// decode(encode(x)) == x for arbitrary frames.
    #[test]
    fn roundtrip_identity(
        kind in 1u8..=4,
        seq in any::<u32>(),
        ts in any::<u64>(),
        payload in proptest::collection::vec(any::<u8>(), 0..600),
    ) {
        let ft = FrameType::try_from(kind).unwrap();
        let bytes = encode_frame(ft, seq, ts, &payload).unwrap();
        let frame = decode_frame(&bytes).unwrap();
        prop_assert_eq!(frame.frame_type, ft);
        prop_assert_eq!(frame.sequence, seq);
        prop_assert_eq!(frame.timestamp_us, ts);
        prop_assert_eq!(frame.payload, payload);
    }

    /// Any single-byte corruption is rejected (CRC or structural error).
    #[test]
    fn single_byte_corruption_is_rejected(
        seq in any::<u32>(),
        payload in proptest::collection::vec(any::<u8>(), 0..200),
        pos_pick in any::<u32>(),
        xor in 1u8..=255,
    ) {
        let bytes = encode_frame(FrameType::Command, seq, 77, &payload).unwrap();
        let pos = (pos_pick as usize) % bytes.len();
        let mut corrupted = bytes.clone();
        corrupted[pos] ^= xor;
        prop_assert!(decode_frame(&corrupted).is_err(), "corruption at {pos} accepted");
    }
}
