//! Seeded random streams.
//!
//! Every random entry point takes an explicit seed. Independent work items
//! (optimizer restarts, verification trials) draw from separate ChaCha
//! streams keyed by `(seed, stream)`, so results do not depend on the order
//! in which the items run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use num_complex::Complex64;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian with E|z|^2 = 1.
pub fn complex_gaussian(rng: &mut StreamRng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
