//! Named substreams of the plan seed.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Axis;

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Purpose {
    Initial = 0,
    Force = 1,
    Measurement = 2,
}

pub(crate) struct Gaussian(ChaCha12Rng);

impl Gaussian {
    #[inline]
    pub fn sample(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }
}

/// Independent stream for one (axis, purpose) pair.
pub(crate) fn stream(seed: u64, axis: Axis, purpose: Purpose) -> Gaussian {
    stream_id(seed, axis.index() as u64 * 16 + purpose as u64)
}

pub(crate) fn stream_id(seed: u64, id: u64) -> Gaussian {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(id);
    Gaussian(rng)
}
