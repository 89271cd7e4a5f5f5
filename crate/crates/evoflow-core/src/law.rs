use crate::error::{Error, Result};
use crate::params::ModelParams;
use rand::{Rng, RngExt};
use std::fmt;

/// Fitness distribution attached to newborn species.
///
/// Sampling is inverse-transform: one uniform draw in [0, 1) mapped through
/// `quantile`, so every birth consumes exactly one draw regardless of the
/// law. `cdf` must be nondecreasing as implemented; the population container
/// relies on that to keep its bucket order consistent with value order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitnessLaw {
    /// Uniform on [0, 1).
    Uniform,
    /// Exponential with the given rate; support [0, inf).
    Exponential { rate: f64 },
    /// Pareto with shape `alpha` and scale 1; support [1, inf).
    Pareto { alpha: f64 },
}

impl FitnessLaw {
    pub fn uniform() -> Self {
        FitnessLaw::Uniform
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::NonPositive {
                name: "exponential rate",
                value: rate,
            });
        }
        Ok(FitnessLaw::Exponential { rate })
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::NonPositive {
                name: "pareto alpha",
                value: alpha,
            });
        }
        Ok(FitnessLaw::Pareto { alpha })
    }

    /// Draw one fitness, consuming exactly one uniform draw from `rng`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// P(X <= x).
    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            FitnessLaw::Uniform => x.clamp(0.0, 1.0),
            FitnessLaw::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            FitnessLaw::Pareto { alpha } => {
                if x <= 1.0 {
                    0.0
                } else {
                    -(-alpha * x.ln()).exp_m1()
                }
            }
        }
    }

    /// Inverse cdf for `u` in [0, 1).
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            FitnessLaw::Uniform => u,
            FitnessLaw::Exponential { rate } => -(-u).ln_1p() / rate,
            FitnessLaw::Pareto { alpha } => (-(-u).ln_1p() / alpha).exp(),
        }
    }

    /// Canonical textual form, also accepted by the CLI law parser.
    pub fn label(&self) -> String {
        match *self {
            FitnessLaw::Uniform => "uniform".to_string(),
            FitnessLaw::Exponential { rate } => format!("exp:{rate}"),
            FitnessLaw::Pareto { alpha } => format!("pareto:{alpha}"),
        }
    }
}

impl fmt::Display for FitnessLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The `f_c`-quantile of `law`: a birth lands strictly below this value with
/// probability `f_c`. Finite only in the supercritical regime `p > 1/2`;
/// for the uniform law it equals `f_c` itself.
pub fn critical_value(law: FitnessLaw, p: f64) -> Result<f64> {
    let params = ModelParams::new(p)?;
    if !params.is_supercritical() {
        return Err(Error::NoCriticalValue(p));
    }
    Ok(law.quantile(params.critical_fitness()))
}
