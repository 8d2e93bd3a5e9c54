//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha8 seeded with the user's
//! 64-bit seed; independent purposes use separate ChaCha streams so that, for
//! example, the latents of a synthetic dataset do not depend on how many
//! direction entries were drawn before them.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stream identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Latents = 0,
    Directions = 1,
    LabelNoise = 2,
    Init = 3,
}

pub fn seeded(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// One standard-normal draw.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}
