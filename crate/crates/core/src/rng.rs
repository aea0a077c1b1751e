//! Seeded random streams.
//!
//! Every stochastic quantity is drawn from a ChaCha8 generator keyed by a
//! 64-bit seed and a stream index. Work units (Monte Carlo trials, scenario
//! trials) pick their own stream, so results never depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for `(seed, stream)`. Stream 0 is the plain seeded generator.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
