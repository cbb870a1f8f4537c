//! Deterministic per-task random streams.
//!
//! Every sampled task is keyed by `(seed, labels...)`, so results do not
//! depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for the task identified by `seed` and `labels`.
pub fn task_rng(seed: u64, labels: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for &l in labels {
        h = splitmix(h ^ splitmix(l));
    }
    ChaCha8Rng::seed_from_u64(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = task_rng(7, &[1, 2]).gen();
        let b: u64 = task_rng(7, &[1, 2]).gen();
        let c: u64 = task_rng(7, &[2, 1]).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
