//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha20 (`rand_chacha`), a
//! counter-based generator with a platform-independent output sequence. A
//! seed is expanded once and each consumer reads its own ChaCha stream id, so
//! e.g. the optimizer's initial jitter never shifts the scene draws of the
//! same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Name recorded in every output file.
pub const RNG_ALGORITHM: &str = "chacha20";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Scene = 1,
    InitJitter = 2,
    Pso = 3,
    GradCheck = 4,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
