//! Seed derivation.
//!
//! Every random stream in the crate is a [`ChaCha8Rng`] seeded from a
//! 64-bit value. Sub-seeds for experiment cells are derived from the master
//! seed with [`derive_seed`], a fixed chain of SplitMix64 finalizers, so a
//! cell's randomness depends only on its coordinates and never on execution
//! order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named random streams inside one experiment cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Split = 1,
    Features = 2,
    Subsample = 3,
    Validation = 4,
    Probe = 5,
    Synthetic = 6,
    Trial = 7,
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(splitmix64(master ^ seed) ^ m) ^ stream)`.
///
/// `m` is the feature count of the cell, or 0 for per-seed streams.
pub fn derive_seed(master: u64, seed: u64, m: u64, stream: Stream) -> u64 {
    let a = splitmix64(master ^ seed);
    let b = splitmix64(a ^ m);
    splitmix64(b ^ stream as u64)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
