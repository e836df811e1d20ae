//! Distribution specifications and deterministic per-run random streams.
//!
//! Every call to [`Sampler::sample`] consumes exactly one 64-bit draw from the
//! stream, whatever the family. Continuous families are sampled by inverse CDF
//! so that streams stay aligned across families and parameter changes.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::schedule::DEFAULT_DURATION_SIGMA;

fn default_sigma() -> f64 {
    DEFAULT_DURATION_SIGMA
}

/// The closed family of distributions the engine samples from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    PointMass {
        value: f64,
    },
    Uniform {
        min: f64,
        max: f64,
    },
    Triangular {
        min: f64,
        mode: f64,
        max: f64,
    },
    /// Lognormal whose density peaks at `mode`; `sigma` is the standard
    /// deviation of the underlying normal.
    #[serde(rename = "lognormal")]
    LognormalMode {
        mode: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    Bernoulli {
        p: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("parameter `{0}` must be finite")]
    NotFinite(&'static str),
    #[error("uniform requires min <= max (got {min} > {max})")]
    UniformRange { min: f64, max: f64 },
    #[error("triangular requires min <= mode <= max and min < max (got {min}, {mode}, {max})")]
    TriangularRange { min: f64, mode: f64, max: f64 },
    #[error("lognormal requires mode > 0 and sigma > 0 (got mode {mode}, sigma {sigma})")]
    LognormalParameters { mode: f64, sigma: f64 },
    #[error("bernoulli probability must lie in [0, 1] (got {0})")]
    Probability(f64),
}

impl DistributionSpec {
    pub fn uniform(min: f64, max: f64) -> Self {
        DistributionSpec::Uniform { min, max }
    }

    pub fn triangular(min: f64, mode: f64, max: f64) -> Self {
        DistributionSpec::Triangular { min, mode, max }
    }

    pub fn lognormal_mode(mode: f64, sigma: f64) -> Self {
        DistributionSpec::LognormalMode { mode, sigma }
    }

    pub fn point(value: f64) -> Self {
        DistributionSpec::PointMass { value }
    }

    pub fn validate(&self) -> Result<(), DistributionError> {
        self.sampler().map(|_| ())
    }

    /// Checks the parameters and returns a ready-to-use sampler.
    pub fn sampler(&self) -> Result<Sampler, DistributionError> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(DistributionError::NotFinite(name))
            }
        };
        match *self {
            DistributionSpec::PointMass { value } => {
                finite("value", value)?;
                Ok(Sampler::PointMass(value))
            }
            DistributionSpec::Uniform { min, max } => {
                finite("min", min)?;
                finite("max", max)?;
                if min > max {
                    return Err(DistributionError::UniformRange { min, max });
                }
                Ok(Sampler::Uniform {
                    min,
                    width: max - min,
                    max,
                })
            }
            DistributionSpec::Triangular { min, mode, max } => {
                finite("min", min)?;
                finite("mode", mode)?;
                finite("max", max)?;
                if !(min <= mode && mode <= max && min < max) {
                    return Err(DistributionError::TriangularRange { min, mode, max });
                }
                Ok(Sampler::Triangular { min, mode, max })
            }
            DistributionSpec::LognormalMode { mode, sigma } => {
                let (mu, sigma) = lognormal_params_from_mode(mode, sigma)?;
                Ok(Sampler::Lognormal { mu, sigma })
            }
            DistributionSpec::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(DistributionError::Probability(p));
                }
                Ok(Sampler::Bernoulli(p))
            }
        }
    }
}

/// Location parameter of the underlying normal for a lognormal with the given mode.
///
/// The lognormal density peaks at `exp(mu - sigma^2)`, so `mu = ln(mode) + sigma^2`.
pub fn lognormal_params_from_mode(mode: f64, sigma: f64) -> Result<(f64, f64), DistributionError> {
    if !(mode > 0.0 && sigma > 0.0 && mode.is_finite() && sigma.is_finite()) {
        return Err(DistributionError::LognormalParameters { mode, sigma });
    }
    Ok((mode.ln() + sigma * sigma, sigma))
}

/// A validated distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampler {
    PointMass(f64),
    Uniform { min: f64, width: f64, max: f64 },
    Triangular { min: f64, mode: f64, max: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Bernoulli(f64),
}

impl Sampler {
    /// One draw; Bernoulli yields `0.0` or `1.0`.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let u = rng.next_open01();
        self.quantile(u)
    }

    /// Inverse CDF at `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Sampler::PointMass(v) => v,
            Sampler::Uniform { min, width, max } => (min + width * u).min(max),
            Sampler::Triangular { min, mode, max } => {
                let range = max - min;
                let split = (mode - min) / range;
                if u < split {
                    min + (u * range * (mode - min)).sqrt()
                } else {
                    max - ((1.0 - u) * range * (max - mode)).sqrt()
                }
            }
            Sampler::Lognormal { mu, sigma } => {
                let z = standard_normal().inverse_cdf(u);
                (mu + sigma * z).exp()
            }
            Sampler::Bernoulli(p) => {
                if u < p {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Sampler::PointMass(v) => v,
            Sampler::Uniform { min, max, .. } => 0.5 * (min + max),
            Sampler::Triangular { min, mode, max } => (min + mode + max) / 3.0,
            Sampler::Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Sampler::Bernoulli(p) => p,
        }
    }

    /// Closed support `[lo, hi]`; the lognormal's upper end is infinite.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Sampler::PointMass(v) => (v, v),
            Sampler::Uniform { min, max, .. } => (min, max),
            Sampler::Triangular { min, max, .. } => (min, max),
            Sampler::Lognormal { .. } => (0.0, f64::INFINITY),
            Sampler::Bernoulli(_) => (0.0, 1.0),
        }
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal parameters are valid")
}

/// Convenience wrapper: validate `spec` and draw once.
pub fn sample(spec: &DistributionSpec, rng: &mut RngStream) -> Result<f64, DistributionError> {
    Ok(spec.sampler()?.sample(rng))
}

/// One independent random stream per simulation run.
///
/// Backed by ChaCha8 keyed with `master_seed` (expanded via
/// `SeedableRng::seed_from_u64`) and using `stream_index` as the ChaCha stream
/// id. ChaCha is counter-based, so streams are independent and the output is
/// identical on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        RngStream {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1): the midpoint of one of 2^53 cells.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * INV_2_53
    }
}
