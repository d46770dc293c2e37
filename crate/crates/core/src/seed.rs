//! Seed expansion.
//!
//! Every random component draws from its own ChaCha stream keyed by the
//! single user seed, so adding draws to one component never shifts another.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Component {
    Generator = 0,
    Anneal = 1,
    Tabu = 2,
    FeasibleAnneal = 3,
    Bench = 4,
}

/// RNG for `component` under the user seed `seed`.
pub fn rng(seed: u64, component: Component) -> ChaCha8Rng {
    stream(seed, component as u64)
}

/// RNG on an arbitrary stream id, e.g. one per annealing restart.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A 64-bit sub-seed for `component`.
pub fn derive(seed: u64, component: Component) -> u64 {
    rng(seed, component).next_u64()
}
