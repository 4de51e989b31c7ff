//! Seeded random streams. Every stochastic routine takes an explicit `u64`
//! seed and builds a ChaCha8 stream from it, so results are portable across
//! platforms and independent of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed from a master seed and a stream path
/// (for example `[strategy, run, purpose]`), using the SplitMix64 finalizer.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = mix(master ^ 0x9E37_79B9_7F4A_7C15);
    for &p in path {
        h = mix(h ^ mix(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    h
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
