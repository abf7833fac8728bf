//! Seeded, splittable random streams.
//!
//! Every experiment derives its generators from one 64-bit master seed:
//! stream `i` is `ChaCha8Rng::seed_from_u64(seed)` moved to stream `i` with
//! `set_stream(i)`. Streams are independent ChaCha keystreams, so workers
//! can draw in parallel without coordination.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub const PRNG_NAME: &str = "ChaCha8Rng";
pub const PRNG_VERSION: &str = "rand_chacha 0.3";
pub const STREAM_SPLIT: &str = "ChaCha8Rng::seed_from_u64(seed).set_stream(index)";

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
