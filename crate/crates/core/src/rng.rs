//! All stochastic sampling goes through ChaCha8 seeded with `seed_from_u64`,
//! so equal seeds give bit-identical samples across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
