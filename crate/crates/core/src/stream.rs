//! Counter-based random streams for reproducible parallel sampling.
//!
//! Work is split into fixed-size chunks of consecutive draws. Chunk `i`
//! always reads from ChaCha stream `i` of the generator seeded with the run
//! seed, so the output never depends on how chunks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type handed to every sampling routine.
pub type Stream = ChaCha8Rng;

/// Draws per chunk (2¹⁶).
pub const CHUNK_SIZE: usize = 1 << 16;

/// Independent stream `index` derived from `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Number of chunks covering `total` draws.
pub fn chunk_count(total: usize) -> usize {
    total.div_ceil(CHUNK_SIZE)
}
