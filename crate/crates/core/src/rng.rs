//! Seeded random streams.
//!
//! Every stochastic routine draws from ChaCha20 keyed by the user seed
//! (`seed_from_u64`). Independent consumers use distinct 64-bit stream ids of
//! the same key: chain `c` of a multi-chain run uses stream `c`, and auxiliary
//! consumers (resampling, fiber-volume pools) use the reserved ids below. Gaussian
//! variates come from `rand_distr::StandardNormal` (ziggurat) on that stream.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SampleRng = ChaCha20Rng;

/// Stream used by systematic resampling.
pub const RESAMPLE_STREAM: u64 = 1 << 62;
/// Stream used to build fiber-volume reference pools.
pub const FIBER_POOL_STREAM: u64 = (1 << 62) + 1;
/// Stream used by the Ginibre sampler.
pub const GINIBRE_STREAM: u64 = (1 << 62) + 2;

pub fn chain_rng(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
