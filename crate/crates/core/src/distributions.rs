//! Claim-size laws with closed-form raw moments and m.g.f.s.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of an individual claim `X`.
///
/// The exponential law is parameterized by its mean `β`, so `M_X(u) = 1/(1 - βu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimDistribution {
    Exponential { mean: f64 },
    Gamma { shape: f64, scale: f64 },
    Deterministic { value: f64 },
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

impl ClaimDistribution {
    pub fn exponential(mean: f64) -> Result<Self> {
        let d = ClaimDistribution::Exponential { mean };
        d.validate()?;
        Ok(d)
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        let d = ClaimDistribution::Gamma { shape, scale };
        d.validate()?;
        Ok(d)
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        let d = ClaimDistribution::Deterministic { value };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ClaimDistribution::Exponential { mean } => positive("mean", mean),
            ClaimDistribution::Gamma { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            ClaimDistribution::Deterministic { value } => {
                if value.is_finite() && value >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("value", format!("must be finite and >= 0, got {value}")))
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ClaimDistribution::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
            ClaimDistribution::Gamma { shape, scale } => Gamma::new(shape, scale)
                .expect("validated gamma parameters")
                .sample(rng),
            ClaimDistribution::Deterministic { value } => value,
        }
    }

    /// Raw moment `E[X^order]` for order 1 or 2.
    pub fn moment(&self, order: u32) -> Result<f64> {
        match order {
            1 => Ok(self.mean()),
            2 => Ok(self.second_moment()),
            other => Err(Error::MomentOrder(other)),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ClaimDistribution::Exponential { mean } => mean,
            ClaimDistribution::Gamma { shape, scale } => shape * scale,
            ClaimDistribution::Deterministic { value } => value,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            ClaimDistribution::Exponential { mean } => 2.0 * mean * mean,
            ClaimDistribution::Gamma { shape, scale } => shape * (shape + 1.0) * scale * scale,
            ClaimDistribution::Deterministic { value } => value * value,
        }
    }

    /// Supremum of the m.g.f. convergence region (exclusive), or `None` when
    /// the m.g.f. exists everywhere.
    pub fn mgf_bound(&self) -> Option<f64> {
        match *self {
            ClaimDistribution::Exponential { mean } => Some(1.0 / mean),
            ClaimDistribution::Gamma { scale, .. } => Some(1.0 / scale),
            ClaimDistribution::Deterministic { .. } => None,
        }
    }

    pub fn check_mgf_domain(&self, u: f64) -> Result<()> {
        if !u.is_finite() {
            return Err(Error::MgfDomain {
                u,
                bound: self.mgf_bound().unwrap_or(f64::INFINITY),
            });
        }
        match self.mgf_bound() {
            Some(bound) if u >= bound => Err(Error::MgfDomain { u, bound }),
            _ => Ok(()),
        }
    }

    /// `M_X(u) = E[exp(uX)]`.
    pub fn mgf(&self, u: f64) -> Result<f64> {
        Ok(1.0 + self.mgf_minus_one(u)?)
    }

    /// `M_X(u) - 1`, evaluated without cancellation for small `|u|`.
    pub fn mgf_minus_one(&self, u: f64) -> Result<f64> {
        self.check_mgf_domain(u)?;
        Ok(match *self {
            ClaimDistribution::Exponential { mean } => mean * u / (1.0 - mean * u),
            ClaimDistribution::Gamma { shape, scale } => (-shape * (-scale * u).ln_1p()).exp_m1(),
            ClaimDistribution::Deterministic { value } => (value * u).exp_m1(),
        })
    }
}
