//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator keyed by
//! `H(seed, domain, major, minor)`, where `H` chains SplitMix64 finalizers
//! over the four words. `domain` separates unrelated uses (simulated data,
//! empirical nulls, scenario parameter draws, ...), `major` is usually a
//! distribution or sample-size index and `minor` a replicate index. Streams
//! depend only on these coordinates, never on scheduling, so parallel runs
//! reproduce serial ones bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains.
pub mod domain {
    pub const DATA: u64 = 0x6461_7461;
    pub const NULL: u64 = 0x6e75_6c6c;
    pub const SCENARIO: u64 = 0x7363_656e;
    pub const PAIRS: u64 = 0x7061_6972;
    pub const PIT: u64 = 0x7069_7400;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a, used to turn labels (test names, scenario names) into
/// stream coordinates.
pub fn tag(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive the stream for `(seed, domain, major, minor)`.
pub fn stream(seed: u64, domain: u64, major: u64, minor: u64) -> StreamRng {
    let mut state = 0u64;
    for word in [seed, domain, major, minor] {
        state = splitmix64(state ^ word);
    }
    let mut key = [0u8; 32];
    for (k, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = splitmix64(state.wrapping_add((k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Derive a child seed; used where an API takes a plain `u64` seed.
pub fn derive_seed(seed: u64, domain: u64, major: u64, minor: u64) -> u64 {
    let mut state = 0x5eed_u64;
    for word in [seed, domain, major, minor] {
        state = splitmix64(state ^ word);
    }
    state
}
