//! Deterministic per-path random streams.
//!
//! Every Monte Carlo path draws from its own ChaCha stream keyed by
//! `(master seed, purpose, path index)`, so results do not depend on how paths
//! are scheduled across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

/// Separates stream families so that independent estimators sharing a master
/// seed never reuse random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    LossPaths = 1,
    PremiumPaths = 2,
    MgfPaths = 3,
    Adhoc = 4,
}

pub fn path_stream(seed: u64, purpose: Purpose, index: u64) -> RandomStream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[16..24].copy_from_slice(b"dcrm-rng");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Mixes a master seed with a tag into an unrelated seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A single stream for callers that only need one sequence.
pub fn stream(seed: u64) -> RandomStream {
    path_stream(seed, Purpose::Adhoc, 0)
}
