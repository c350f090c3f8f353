//! Deterministic RNG stream derivation.
//!
//! One master 64-bit seed; per-path seeds are derived by folding identifying
//! words (model id, grid size, path index) through the SplitMix64 finalizer,
//! and each model component draws from its own ChaCha stream. Results are
//! therefore independent of thread count and execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG stream ids used by the simulator.
pub mod component {
    pub const HESTON: u64 = 0;
    pub const CGMY: u64 = 1;
    pub const CPP: u64 = 2;
    pub const TWO_REGIME: u64 = 3;
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold identifying words into a derived 64-bit seed.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for &w in words {
        s = splitmix64(s ^ w);
    }
    s
}

/// ChaCha stream `component` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, component: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(component);
    rng
}
