//! Counter-based random streams.
//!
//! Every trajectory owns an independent [`Stream`] derived from a master seed
//! and an index, so batches can be generated in any order (or in parallel)
//! and still reproduce bit for bit.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

/// 64-bit golden-ratio increment used to spread stream indices.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Multiplier separating horizons when a batch is keyed by `(seed, n, index)`.
pub const HORIZON_GAMMA: u64 = 0xBF58_476D_1CE4_E5B9;

/// Random state of one trajectory: xoshiro256++ whose four state words are
/// the first four SplitMix64 outputs of the stream key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream(Xoshiro256PlusPlus);

impl Stream {
    pub fn from_key(key: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(key))
    }
}

impl RngCore for Stream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Key of stream `index` under `master_seed`.
#[inline]
pub fn stream_key(master_seed: u64, index: u64) -> u64 {
    master_seed ^ index.wrapping_mul(GOLDEN_GAMMA)
}

/// The random state for trajectory `index` of a batch seeded with `master_seed`.
pub fn derive_stream(master_seed: u64, index: u64) -> Stream {
    Stream::from_key(stream_key(master_seed, index))
}

/// Master seed of the batch at horizon `n`: the first SplitMix64 output for
/// `master_seed XOR (n + 1)·HORIZON_GAMMA`.
pub fn horizon_seed(master_seed: u64, n: usize) -> u64 {
    let key = master_seed ^ (n as u64).wrapping_add(1).wrapping_mul(HORIZON_GAMMA);
    SplitMix64::seed_from_u64(key).next_u64()
}
