//! Continuous one-dimensional marginal distributions.

use std::fmt;

use crate::error::{domain, Error, Result};

/// A continuous marginal distribution of a channel gain.
///
/// Construct through [`Marginal::uniform`] / [`Marginal::exponential`] so the
/// parameter invariants hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Uniform {
        min: f64,
        max: f64,
    },
    /// Rate parameterization: mean is `1 / rate`.
    Exponential {
        rate: f64,
    },
}

impl Marginal {
    pub fn uniform(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidParameter(format!(
                "uniform requires finite min < max (got [{min}, {max}])"
            )));
        }
        Ok(Marginal::Uniform { min, max })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "exponential requires a finite rate > 0 (got {rate})"
            )));
        }
        Ok(Marginal::Exponential { rate })
    }

    /// CDF, clamped to 0 below and 1 above the support.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Uniform { min, max } => ((x - min) / (max - min)).clamp(0.0, 1.0),
            Marginal::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    /// Inverse CDF. The exponential quantile at `p = 1` is `+inf`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("quantile requires p in [0, 1] (got {p})")));
        }
        Ok(self.quantile_unchecked(p))
    }

    pub(crate) fn quantile_unchecked(&self, p: f64) -> f64 {
        match *self {
            Marginal::Uniform { min, max } => {
                if p >= 1.0 {
                    max
                } else {
                    min + p * (max - min)
                }
            }
            Marginal::Exponential { rate } => {
                if p >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-p).ln_1p() / rate
                }
            }
        }
    }

    /// `(lo, hi)`; `hi` is `+inf` for unbounded supports.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Marginal::Uniform { min, max } => (min, max),
            Marginal::Exponential { .. } => (0.0, f64::INFINITY),
        }
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marginal::Uniform { min, max } => write!(f, "uniform:{min}:{max}"),
            Marginal::Exponential { rate } => write!(f, "exp:{rate}"),
        }
    }
}
