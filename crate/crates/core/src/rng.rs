//! Seeded random streams.
//!
//! Every random quantity comes from a ChaCha8 generator keyed by the user
//! seed, with the 64-bit stream id split into a purpose tag (high bits) and
//! an index (low 40 bits). Work split into chunks draws chunk `c` from index
//! `c`, so results do not depend on how chunks are scheduled onto threads.
//!
//! Normal variates are `rand_distr::StandardNormal` (ziggurat); Gamma
//! variates are `rand_distr::Gamma` (Marsaglia–Tsang, with the `U^{1/α}`
//! boost for shape below one).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Goe = 1,
    Dirichlet = 2,
    NaiveMc = 3,
    ImportanceMc = 4,
    SphereMc = 5,
    Gibbs = 6,
    Verify = 7,
}

pub fn stream_rng(seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    debug_assert!(index < 1 << 40);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 40) | index);
    rng
}
