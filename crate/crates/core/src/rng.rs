//! Deterministic seed derivation.
//!
//! Every random consumer (node placement, per-edge range noise, particle
//! initialization, ...) derives its own sub-stream from a base seed and a
//! list of integer tags. Streams are independent of each other and of
//! iteration order, so adding a consumer or subsetting an edge set never
//! shifts the draws seen by another consumer. The mixer is the splitmix64
//! finalizer, which is stable across platforms and releases.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer: a fixed, well-mixed 64-bit permutation.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `tags` into `base`, one avalanche round per tag.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut h = mix64(base);
    for &t in tags {
        h = mix64(h ^ mix64(t));
    }
    h
}

/// A seeded, portable RNG for the sub-stream identified by `tags`.
pub fn rng_for(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}

/// Measurement seed for one Monte Carlo cell. Solvers are deliberately not
/// part of the key: adding a solver to an experiment never perturbs noise.
pub fn trial_seed(base: u64, sigma_index: u64, trial: u64) -> u64 {
    derive_seed(base, &[0x5EED, sigma_index, trial])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derivation_is_stable() {
        // Frozen values; a change here would silently re-randomize every
        // experiment, so the mixer must never change.
        assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[2]), derive_seed(2, &[2]));
    }

    #[test]
    fn streams_reproduce() {
        let a: Vec<u64> = (0..4).map(|_| 0).collect::<Vec<_>>();
        let _ = a;
        let mut r1 = rng_for(42, &[7, 9]);
        let mut r2 = rng_for(42, &[7, 9]);
        for _ in 0..16 {
            assert_eq!(r1.next_u64(), r2.next_u64());
        }
        let mut r3 = rng_for(42, &[7, 10]);
        assert_ne!(r1.next_u64(), r3.next_u64());
    }

    #[test]
    fn trial_seeds_do_not_collide_locally() {
        let mut seen = std::collections::BTreeSet::new();
        for s in 0..4 {
            for t in 0..256 {
                assert!(seen.insert(trial_seed(11, s, t)));
            }
        }
    }
}
