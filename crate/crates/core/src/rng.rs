//! Seed derivation and the crate-wide RNG.
//!
//! All randomness flows from a single master seed through named streams
//! (`"data"`, `"train"`, `"eval"`, ...), so changing how many draws one
//! stage consumes never perturbs another stage. Derivation is FNV-1a over
//! the stream name mixed with a SplitMix64 finalizer — stable across
//! platforms and releases, which keeps seeded outputs byte-reproducible.

use rand_chacha::rand_core::SeedableRng;

/// The RNG used everywhere results must be reproducible.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Construct the stream RNG for a bare seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET ^ seed;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed of a named stream from the master seed.
pub fn derive_seed(master: u64, stream: &str) -> u64 {
    splitmix(fnv1a(master, stream.as_bytes()))
}

/// Derive the seed of the `index`-th item within a named stream.
pub fn derive_indexed(master: u64, stream: &str, index: u64) -> u64 {
    let h = fnv1a(master, stream.as_bytes());
    splitmix(h ^ splitmix(index))
}

/// Mix a family of raw 64-bit words into one seed. Used where a cell of a
/// parameter grid must get a seed that depends on the cell's values, not
/// its position.
pub fn mix_words(master: u64, words: &[u64]) -> u64 {
    let mut h = splitmix(master);
    for &w in words {
        h = splitmix(h ^ w);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_stable() {
        let a = derive_seed(7, "train");
        let b = derive_seed(7, "data");
        let c = derive_seed(7, "eval");
        assert_ne!(a, b);
        assert_ne!(b, c);
        assert_eq!(a, derive_seed(7, "train"));
    }

    #[test]
    fn indexed_streams_do_not_collide_on_small_indices() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10_000u64 {
            assert!(seen.insert(derive_indexed(42, "train-step", i)));
        }
    }

    #[test]
    fn mix_words_depends_on_values_not_order_position() {
        let a = mix_words(1, &[0x10, 0x20]);
        let b = mix_words(1, &[0x20, 0x10]);
        assert_ne!(a, b); // order matters within one call,
        assert_eq!(a, mix_words(1, &[0x10, 0x20])); // but calls are stable
    }
}
