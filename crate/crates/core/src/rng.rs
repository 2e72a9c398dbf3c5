//! Reproducible RNG streams.
//!
//! Every random decision in a run draws from a ChaCha8 generator keyed by a
//! 64-bit seed and a stream id, so independent phases (attack simulation,
//! honest rejections, seed choice, tie breaking) never share a sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const STREAM_REQUESTS: u64 = 1;
pub const STREAM_HONEST_REJECTIONS: u64 = 2;
pub const STREAM_SEEDS: u64 = 3;
pub const STREAM_TIES: u64 = 4;
pub const STREAM_HOST_GRAPH: u64 = 5;

pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer; used to derive child seeds from a master seed.
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
