//! Seeded random number generation.
//!
//! Every stochastic step (item memories, programming noise, synthetic data)
//! draws from ChaCha8, a counter-based stream cipher. Independent streams
//! for parallel work units are selected with [`for_stream`], so the
//! result of a unit never depends on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in output metadata.
pub const RNG_ALGORITHM: &str = "chacha8";

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `stream` of the generator keyed by `seed`.
pub fn for_stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
