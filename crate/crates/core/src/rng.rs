//! Seed derivation and generator construction.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from a
//! 64-bit key obtained by folding integers through the SplitMix64 finalizer.
//! Replicate `i` at size `n` under master seed `s` uses
//! `hash64(&[s, n, i])`; Monte Carlo chunk `c` under seed `s` uses
//! `hash64(&[s, c])`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive 64-bit hash of a sequence of integers.
pub fn hash64(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C908, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// Independent generator for substream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(hash64(&[seed, index]))
}

/// Generator for replicate `rep` of the size-`n` cell under `master_seed`.
pub fn replicate_seed(master_seed: u64, n: u64, rep: u64) -> u64 {
    hash64(&[master_seed, n, rep])
}
