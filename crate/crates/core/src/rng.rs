//! Seed splitting for reproducible parallel sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of draws handled by one generator stream.
pub const CHUNK: usize = 4096;

/// Generator for stream `stream` of the master `seed`. Streams are the
/// ChaCha stream ids, so chunk `i` always sees the same sequence regardless
/// of how chunks are scheduled across threads.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `n` draws into `(chunk index, length)` pieces of at most [`CHUNK`].
pub fn chunks(n: usize) -> impl Iterator<Item = (u64, usize)> {
    (0..n.div_ceil(CHUNK)).map(move |i| (i as u64, CHUNK.min(n - i * CHUNK)))
}
