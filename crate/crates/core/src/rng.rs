//! Deterministic RNG plumbing.
//!
//! Every stochastic operation in this crate takes an explicit seed and
//! builds its own [`SeededRng`], so identical seeds give bit-identical
//! results. Composite operations split their seed into independent
//! per-stage streams with [`derive_seed`] instead of sharing one generator,
//! which keeps each stage reproducible in isolation.

use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream seed from a base seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = (0..8).map(|_| 0u64).collect();
        let mut r1 = rng_from_seed(42);
        let mut r2 = rng_from_seed(42);
        let s1: Vec<u64> = a.iter().map(|_| r1.random()).collect();
        let s2: Vec<u64> = a.iter().map(|_| r2.random()).collect();
        assert_eq!(s1, s2);
    }

    #[test]
    fn derived_streams_differ() {
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
        // stable across runs
        assert_eq!(derive_seed(0, 0), derive_seed(0, 0));
    }
}
