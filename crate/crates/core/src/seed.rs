//! Deterministic per-stream seeding.
//!
//! Every random stream in a run is addressed by a tuple
//! `(master, point, sample, agent)`. The tuple is folded through a
//! SplitMix64 finalizer one word at a time; each stage is a bijection of
//! its input word, so two tuples collide only by 64-bit chance.
//!
//! Streams are `ChaCha8Rng` seeded with `seed_from_u64(derived)`. An
//! implementation in another language reproduces a run only if it matches
//! both the mixing below and that generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Recorded in every artifact's metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9) via seed_from_u64; \
                                 streams keyed by splitmix64 fold of (master, point, sample, agent)";

/// Agent slot reserved for the market-level stream of a run.
pub const MARKET_STREAM: u64 = u64::MAX;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, point: u64, sample: u64, agent: u64) -> u64 {
    let mut h = splitmix64(master);
    for word in [point, sample, agent] {
        h = splitmix64(h ^ splitmix64(word));
    }
    h
}

pub fn stream(master: u64, point: u64, sample: u64, agent: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, point, sample, agent))
}
