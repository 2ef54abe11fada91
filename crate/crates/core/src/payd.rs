//! Pay-as-you-drive pricing under a mileage-driven Cox process.
//!
//! Net premium is `μ1 · E[∫_0^t λ(s, d(s)) e^{-δs} ds]` and the m.g.f. is the
//! path expectation of the conditional NHPP m.g.f. Both are outer Monte Carlo
//! over mileage paths with an exact (premium) or quadrature (m.g.f.) inner
//! integral; deterministic mileage needs a single path and has zero error.

use rayon::prelude::*;

use crate::dcrm::{self, DcrmScenario, SimulationOptions};
use crate::distributions::ClaimDistribution;
use crate::error::{Error, Result};
use crate::mileage::{MileageModel, MileagePath};
use crate::processes::{intensity_integral, IntensityModel, MileageAffine};
use crate::rng::{path_stream, Purpose};
use crate::stats::{standardized_difference, Estimate, SampleSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct PaydPolicy {
    pub claim: ClaimDistribution,
    pub intensity: MileageAffine,
    pub mileage: MileageModel,
    pub delta: f64,
    pub horizon: f64,
}

impl PaydPolicy {
    pub fn new(
        claim: ClaimDistribution,
        intensity: MileageAffine,
        mileage: MileageModel,
        delta: f64,
        horizon: f64,
    ) -> Result<Self> {
        let p = PaydPolicy {
            claim,
            intensity,
            mileage,
            delta,
            horizon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.to_scenario().validate()
    }

    pub fn from_scenario(scenario: &DcrmScenario) -> Result<Self> {
        let intensity = scenario.intensity.mileage_affine().ok_or_else(|| {
            Error::invalid("counting", "PAYD pricing needs a mileage_affine intensity")
        })?;
        let mileage = scenario
            .mileage
            .clone()
            .ok_or_else(|| Error::invalid("mileage", "PAYD pricing needs a mileage model"))?;
        PaydPolicy::new(scenario.claim, intensity, mileage, scenario.delta, scenario.horizon)
    }

    pub fn to_scenario(&self) -> DcrmScenario {
        DcrmScenario {
            claim: self.claim,
            intensity: IntensityModel::MileageAffine(self.intensity),
            mileage: Some(self.mileage.clone()),
            delta: self.delta,
            horizon: self.horizon,
        }
    }

    fn outer_paths(&self, n_outer: usize) -> Result<usize> {
        if self.mileage.is_deterministic() {
            Ok(1)
        } else if n_outer == 0 {
            Err(Error::invalid("paths", "must be >= 1"))
        } else {
            Ok(n_outer)
        }
    }

    fn realize(&self, seed: u64, purpose: Purpose, index: u64) -> Result<MileagePath> {
        let mut rng = path_stream(seed, purpose, index);
        self.mileage.realize_path(self.horizon, &mut rng)
    }

    /// Expected loss conditional on one mileage path.
    pub fn conditional_premium(&self, path: &MileagePath) -> Result<f64> {
        Ok(self.claim.mean() * intensity_integral(&self.intensity.on_path(path), self.delta, self.horizon)?)
    }

    /// The conditional (NHPP) m.g.f. given one mileage path.
    pub fn conditional_mgf(&self, path: &MileagePath, u: f64) -> Result<f64> {
        dcrm::mgf_nhpp(&self.claim, &self.intensity.on_path(path), self.delta, self.horizon, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremiumQuote {
    pub net_premium: f64,
    pub standard_error: f64,
    /// Expected total mileage over the horizon (exact or path-averaged).
    pub expected_mileage: f64,
    /// `net_premium / expected_mileage`; `None` when no mileage is expected.
    pub per_expected_mile: Option<f64>,
    pub n_outer_paths: usize,
}

/// Net premium `μ1 · E[∫_0^t λ(s, d(s)) e^{-δs} ds]`.
pub fn price_payd(policy: &PaydPolicy, n_outer: usize, seed: u64) -> Result<PremiumQuote> {
    policy.validate()?;
    let n = policy.outer_paths(n_outer)?;
    let draws: Vec<(f64, f64)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let path = policy.realize(seed, Purpose::PremiumPaths, i)?;
            Ok((policy.conditional_premium(&path)?, path.total_distance()))
        })
        .collect::<Result<_>>()?;
    let (premiums, miles): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
    let premium = SampleSummary::from_slice(&premiums);
    let expected_mileage = SampleSummary::from_slice(&miles).mean;
    let std_error = if n == 1 { 0.0 } else { premium.std_error() };
    Ok(PremiumQuote {
        net_premium: premium.mean,
        standard_error: std_error,
        expected_mileage,
        per_expected_mile: (expected_mileage > 0.0).then(|| premium.mean / expected_mileage),
        n_outer_paths: n,
    })
}

/// `M_{Z_t}(u) = E[exp{-∫_0^t λ(s, d(s))(1 - M_X(u e^{-δs})) ds}]` over mileage paths.
pub fn mgf_cox(policy: &PaydPolicy, u: f64, n_outer: usize, seed: u64) -> Result<Estimate> {
    policy.validate()?;
    policy.claim.check_mgf_domain(u)?;
    let n = policy.outer_paths(n_outer)?;
    let values: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let path = policy.realize(seed, Purpose::MgfPaths, i)?;
            policy.conditional_mgf(&path, u)
        })
        .collect::<Result<_>>()?;
    let s = SampleSummary::from_slice(&values);
    Ok(if n == 1 {
        Estimate::exact(s.mean)
    } else {
        s.mean_estimate()
    })
}

/// Premium from the mileage-path expectation set against a full loss simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoxPremiumReport {
    pub premium: Estimate,
    pub simulated_mean: Estimate,
    pub z_score: f64,
}

impl CoxPremiumReport {
    pub fn agrees(&self, threshold: f64) -> bool {
        self.z_score.abs() < threshold
    }
}

pub const MIN_VALIDATION_PATHS: usize = 1000;

pub fn validate_cox_premium(
    policy: &PaydPolicy,
    n_outer: usize,
    n_full: usize,
    seed: u64,
) -> Result<CoxPremiumReport> {
    if n_full < MIN_VALIDATION_PATHS || (!policy.mileage.is_deterministic() && n_outer < MIN_VALIDATION_PATHS) {
        return Err(Error::invalid(
            "paths",
            format!("validation needs at least {MIN_VALIDATION_PATHS} paths on each side"),
        ));
    }
    let quote = price_payd(policy, n_outer, seed)?;
    let premium = Estimate {
        value: quote.net_premium,
        std_error: quote.standard_error,
    };
    let sim = dcrm::simulate_zt(&policy.to_scenario(), n_full, seed, SimulationOptions::default())?;
    let simulated_mean = sim.summary().mean_estimate();
    let pooled = (premium.std_error.powi(2) + simulated_mean.std_error.powi(2)).sqrt();
    Ok(CoxPremiumReport {
        premium,
        simulated_mean,
        z_score: standardized_difference(simulated_mean.value, premium.value, pooled),
    })
}
