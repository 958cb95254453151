//! Reproducible random-number streams.
//!
//! Every stochastic quantity of a replication draws from its own stream. A
//! stream is keyed by the replication seed and a label such as
//! `demand-qty/101`; the key is mixed with SplitMix64 into the seed of a
//! ChaCha8 generator, so streams never share state and the order in which
//! they are consumed does not matter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SimError};

/// One round of the SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed of one replication, derived from the master seed and its coordinates.
pub fn derive_seed(master: u64, iteration: u64, replication: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ iteration) ^ replication.rotate_left(32))
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    id: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, id: impl Into<String>) -> Self {
        let id = id.into();
        let key = splitmix64(seed ^ splitmix64(fnv1a(id.as_bytes())));
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(key),
            id,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Lognormal variate with expectation `mean` and coefficient of variation `cv`.
    ///
    /// With `sigma^2 = ln(1 + cv^2)` and `mu = ln(mean) - sigma^2 / 2` the
    /// variate `exp(mu + sigma * Z)` has exactly the requested first two moments.
    /// A zero `cv` returns `mean` without consuming randomness.
    pub fn lognormal(&mut self, mean: f64, cv: f64) -> Result<f64> {
        sample_lognormal(self, mean, cv)
    }
}

pub fn lognormal_params(mean: f64, cv: f64) -> Result<(f64, f64)> {
    if !(mean > 0.0) || !(cv >= 0.0) || !mean.is_finite() || !cv.is_finite() {
        return Err(SimError::BadMoment { mean, cv });
    }
    let sigma2 = (1.0 + cv * cv).ln();
    Ok((mean.ln() - sigma2 / 2.0, sigma2.sqrt()))
}

pub fn sample_lognormal(stream: &mut RngStream, mean: f64, cv: f64) -> Result<f64> {
    let (mu, sigma) = lognormal_params(mean, cv)?;
    if cv == 0.0 {
        return Ok(mean);
    }
    Ok((mu + sigma * stream.standard_normal()).exp())
}
