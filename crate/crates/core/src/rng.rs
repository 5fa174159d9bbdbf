//! Seeded random streams.
//!
//! Every randomized routine takes an explicit generator. Independent work
//! items (multistart starts, GRASP iterations, population members) draw from
//! their own stream of the same seed, so results do not depend on the order
//! in which they are evaluated.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as SolverRng;

/// Generator for stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> SolverRng {
    let mut rng = SolverRng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Generator for stream 0 of `seed`.
pub fn seeded(seed: u64) -> SolverRng {
    SolverRng::seed_from_u64(seed)
}
