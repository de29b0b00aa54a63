//! Seeded random streams. Every sampling routine in the crate draws from a
//! ChaCha8 stream keyed by an explicit 64-bit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
