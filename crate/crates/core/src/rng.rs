//! Seeding helpers. Every stochastic routine takes an explicit generator; derived
//! streams come from a root seed mixed with a tag and an index so that parallel
//! trials never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SamplerRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SamplerRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic child seed for stream `index` of purpose `tag` under `root`.
pub fn derive_seed(root: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(root) ^ tag) ^ index)
}

pub fn derived(root: u64, tag: u64, index: u64) -> SamplerRng {
    seeded(derive_seed(root, tag, index))
}
