//! Counter-based seed derivation.
//!
//! Every stochastic stage draws from its own ChaCha8 stream whose seed is
//! derived from a master seed and a path of counters, e.g.
//! `derive(master, &[realization, stage])`. The derivation folds
//! `h <- splitmix64(h ^ splitmix64(counter))` over the path starting from
//! `h = splitmix64(master)`, so adding realizations or stages never changes
//! the seeds of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every stage.
pub type StageRng = ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |h, c| splitmix64(h ^ splitmix64(*c)))
}

pub fn rng(seed: u64) -> StageRng {
    ChaCha8Rng::seed_from_u64(seed)
}
