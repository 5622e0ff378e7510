use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used everywhere randomness is needed. ChaCha keeps streams
/// identical across platforms.
pub type SeededRng = ChaCha8Rng;

/// Independent stream `stream` derived from `seed`.
pub fn seeded(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
