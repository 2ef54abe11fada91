//! The discounted collective risk model `Z_t = Σ_{i ≤ N(t)} X_i e^{-δ W_i}`.

use rayon::prelude::*;

use crate::distributions::ClaimDistribution;
use crate::error::{Error, Result};
use crate::mileage::MileageModel;
use crate::processes::{self, discount_integral, Intensity, IntensityModel};
use crate::quadrature::{self, Tolerance};
use crate::rng::{path_stream, Purpose, RandomStream};
use crate::stats::{Estimate, SampleSummary};

/// Claim law, counting model, force of interest and horizon.
///
/// A [`IntensityModel::MileageAffine`] counting model makes the scenario a Cox
/// process and requires `mileage`; other counting models ignore it.
#[derive(Debug, Clone, PartialEq)]
pub struct DcrmScenario {
    pub claim: ClaimDistribution,
    pub intensity: IntensityModel,
    pub mileage: Option<MileageModel>,
    pub delta: f64,
    pub horizon: f64,
}

impl DcrmScenario {
    /// Compound Poisson scenario with constant rate.
    pub fn poisson(claim: ClaimDistribution, rate: f64, delta: f64, horizon: f64) -> Result<Self> {
        let s = DcrmScenario {
            claim,
            intensity: IntensityModel::Constant { rate },
            mileage: None,
            delta,
            horizon,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.claim.validate()?;
        self.intensity.validate()?;
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::invalid("delta", format!("must be finite and >= 0, got {}", self.delta)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid("horizon", format!("must be finite and > 0, got {}", self.horizon)));
        }
        if let Some(m) = &self.mileage {
            m.validate()?;
        }
        if self.is_cox() && self.mileage.is_none() {
            return Err(Error::invalid("mileage", "a mileage-affine intensity needs a mileage model"));
        }
        Ok(())
    }

    pub fn is_cox(&self) -> bool {
        matches!(self.intensity, IntensityModel::MileageAffine(_))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimulationOptions {
    /// Keep arrival times and claim sizes for every path.
    pub full_trace: bool,
}

/// Per-path detail retained under [`SimulationOptions::full_trace`].
#[derive(Debug, Clone, PartialEq)]
pub struct PathTrace {
    pub arrivals: Vec<f64>,
    pub claims: Vec<f64>,
    /// Realized mileage `d(t)` for Cox scenarios.
    pub distance: Option<f64>,
    /// Realized `∫_0^t λ(s, d(s)) e^{-δs} ds` for Cox scenarios.
    pub discounted_exposure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub z: Vec<f64>,
    pub counts: Vec<u32>,
    pub seed: u64,
    pub claim: ClaimDistribution,
    pub delta: f64,
    pub horizon: f64,
    pub traces: Option<Vec<PathTrace>>,
}

impl SimulationResult {
    pub fn n_paths(&self) -> usize {
        self.z.len()
    }

    pub fn summary(&self) -> SampleSummary {
        SampleSummary::from_slice(&self.z)
    }

    /// `Z_s` of one traced path at an intermediate time `s`.
    pub fn z_at(&self, path: usize, s: f64) -> Result<f64> {
        let trace = &self.traces.as_ref().ok_or(Error::MissingTrace)?[path];
        Ok(discounted_sum(&trace.arrivals, &trace.claims, self.delta, s))
    }
}

fn discounted_sum(arrivals: &[f64], claims: &[f64], delta: f64, upto: f64) -> f64 {
    arrivals
        .iter()
        .zip(claims)
        .take_while(|(w, _)| **w <= upto)
        .map(|(w, x)| x * (-delta * w).exp())
        .sum()
}

struct PathOutcome {
    z: f64,
    count: u32,
    trace: Option<PathTrace>,
}

fn simulate_path(scenario: &DcrmScenario, rng: &mut RandomStream, full_trace: bool) -> Result<PathOutcome> {
    let t = scenario.horizon;
    let (arrivals, distance, exposure) = match (&scenario.intensity, &scenario.mileage) {
        (IntensityModel::MileageAffine(m), Some(mileage)) => {
            let (path, arrivals) = processes::simulate_cox(m, mileage, t, rng)?;
            let extra = if full_trace {
                (
                    Some(path.total_distance()),
                    Some(processes::intensity_integral(&m.on_path(&path), scenario.delta, t)?),
                )
            } else {
                (None, None)
            };
            (arrivals, extra.0, extra.1)
        }
        (IntensityModel::MileageAffine(_), None) => {
            return Err(Error::invalid("mileage", "a mileage-affine intensity needs a mileage model"))
        }
        (intensity, _) => (processes::simulate_nhpp_auto(intensity, t, rng)?, None, None),
    };
    let times = arrivals.into_times();
    let claims: Vec<f64> = times.iter().map(|_| scenario.claim.sample(rng)).collect();
    let z = if times.is_empty() {
        0.0
    } else {
        discounted_sum(&times, &claims, scenario.delta, t)
    };
    let count = times.len() as u32;
    let trace = full_trace.then_some(PathTrace {
        arrivals: times,
        claims,
        distance,
        discounted_exposure: exposure,
    });
    Ok(PathOutcome { z, count, trace })
}

/// Monte Carlo realizations of `Z_t`.
///
/// Path `i` draws from the stream keyed by `(seed, i)`, so the result is
/// bit-identical for any rayon pool size.
pub fn simulate_zt(
    scenario: &DcrmScenario,
    n_paths: usize,
    seed: u64,
    options: SimulationOptions,
) -> Result<SimulationResult> {
    scenario.validate()?;
    if n_paths == 0 {
        return Err(Error::invalid("paths", "must be >= 1"));
    }
    let outcomes: Vec<PathOutcome> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_stream(seed, Purpose::LossPaths, i);
            simulate_path(scenario, &mut rng, options.full_trace)
        })
        .collect::<Result<_>>()?;

    let mut z = Vec::with_capacity(n_paths);
    let mut counts = Vec::with_capacity(n_paths);
    let mut traces = options.full_trace.then(|| Vec::with_capacity(n_paths));
    for o in outcomes {
        z.push(o.z);
        counts.push(o.count);
        if let (Some(ts), Some(t)) = (traces.as_mut(), o.trace) {
            ts.push(t);
        }
    }
    Ok(SimulationResult {
        z,
        counts,
        seed,
        claim: scenario.claim,
        delta: scenario.delta,
        horizon: scenario.horizon,
        traces,
    })
}

/// `E[Z_t] = μ1 λ (1 - e^{-δt}) / δ`, or `μ1 λ t` at `δ = 0`.
pub fn analytic_mean(mu1: f64, lambda: f64, delta: f64, t: f64) -> f64 {
    mu1 * lambda * discount_integral(0.0, t, delta)
}

/// `Var[Z_t] = μ2 λ (1 - e^{-2δt}) / (2δ)`, or `μ2 λ t` at `δ = 0`.
pub fn analytic_variance(mu2: f64, lambda: f64, delta: f64, t: f64) -> f64 {
    mu2 * lambda * discount_integral(0.0, t, 2.0 * delta)
}

/// `log M_{Z_t}(u) = ∫_0^t λ(s) (M_X(u e^{-δs}) - 1) ds`.
pub fn log_mgf_nhpp<I: Intensity + ?Sized>(
    claim: &ClaimDistribution,
    intensity: &I,
    delta: f64,
    t: f64,
    u: f64,
) -> Result<f64> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta", format!("must be finite and >= 0, got {delta}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("horizon", format!("must be finite and >= 0, got {t}")));
    }
    // δ >= 0 makes u e^{-δs} <= u on [0, t], so checking s = 0 suffices
    claim.check_mgf_domain(u)?;
    if u == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let excess = |s: f64| {
        claim
            .mgf_minus_one(u * (-delta * s).exp())
            .expect("argument within the checked domain")
    };
    let tol = Tolerance::default();
    let value = match intensity.constant_pieces(t) {
        Some(pieces) => {
            let terms: Vec<f64> = pieces
                .iter()
                .filter(|(_, _, rate)| *rate != 0.0)
                .map(|&(a, b, rate)| rate * quadrature::integrate(excess, a, b, tol).value)
                .collect();
            crate::stats::pairwise_sum(&terms)
        }
        None => {
            quadrature::integrate_piecewise(
                |s| intensity.rate(s) * excess(s),
                0.0,
                t,
                &intensity.breakpoints(t),
                tol,
            )
            .value
        }
    };
    Ok(value)
}

/// `M_{Z_t}(u) = exp{-∫_0^t λ(s)(1 - M_X(u e^{-δs})) ds}` by adaptive quadrature.
pub fn mgf_nhpp<I: Intensity + ?Sized>(
    claim: &ClaimDistribution,
    intensity: &I,
    delta: f64,
    t: f64,
    u: f64,
) -> Result<f64> {
    Ok(log_mgf_nhpp(claim, intensity, delta, t, u)?.exp())
}

fn check_exponential_args(beta: f64, lambda: f64, delta: f64, t: f64, u: f64) -> Result<()> {
    ClaimDistribution::exponential(beta)?.check_mgf_domain(u)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid("rate", format!("must be finite and >= 0, got {lambda}")));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta", format!("must be finite and >= 0, got {delta}")));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::invalid("horizon", format!("must be >= 0, got {t}")));
    }
    Ok(())
}

/// Closed-form m.g.f. for exponential claims with mean `β` and constant rate:
/// `((1 - βu e^{-δt}) / (1 - βu))^{λ/δ}`. `δ = 0` is routed to
/// [`mgf_exponential_undiscounted`].
pub fn mgf_exponential_closed(beta: f64, lambda: f64, delta: f64, t: f64, u: f64) -> Result<f64> {
    check_exponential_args(beta, lambda, delta, t, u)?;
    if delta == 0.0 {
        return mgf_exponential_undiscounted(beta, lambda, t, u);
    }
    if t.is_infinite() {
        return mgf_exponential_perpetuity(beta, lambda, delta, u);
    }
    let bu = beta * u;
    // (1 - bu e^{-δt})/(1 - bu) = 1 + bu (1 - e^{-δt}) / (1 - bu)
    let ratio_minus_one = bu * -(-delta * t).exp_m1() / (1.0 - bu);
    Ok((lambda / delta * ratio_minus_one.ln_1p()).exp())
}

/// The `δ → 0` limit `exp(λ t u β / (1 - uβ))`.
pub fn mgf_exponential_undiscounted(beta: f64, lambda: f64, t: f64, u: f64) -> Result<f64> {
    check_exponential_args(beta, lambda, 0.0, t, u)?;
    Ok((lambda * t * u * beta / (1.0 - u * beta)).exp())
}

/// The `t → ∞` limit `(1 - uβ)^{-λ/δ}`.
pub fn mgf_exponential_perpetuity(beta: f64, lambda: f64, delta: f64, u: f64) -> Result<f64> {
    check_exponential_args(beta, lambda, delta, f64::INFINITY, u)?;
    if delta == 0.0 {
        return Err(Error::invalid("delta", "perpetuity limit needs delta > 0"));
    }
    Ok((-lambda / delta * (-u * beta).ln_1p()).exp())
}

/// Sample mean and standard error of a residual process at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualPoint {
    pub time: f64,
    pub mean: f64,
    pub std_error: f64,
}

impl ResidualPoint {
    pub fn z_score(&self) -> f64 {
        crate::stats::standardized_difference(self.mean, 0.0, self.std_error)
    }
}

fn residual_setup<'a>(
    result: &'a SimulationResult,
    scenario: &DcrmScenario,
    grid: &[f64],
) -> Result<(&'a [PathTrace], f64)> {
    let rate = scenario.intensity.constant_rate().ok_or_else(|| {
        Error::Unsupported("martingale residuals need a constant-rate scenario".into())
    })?;
    let traces = result.traces.as_deref().ok_or(Error::MissingTrace)?;
    for &s in grid {
        if !(s > 0.0 && s <= scenario.horizon) {
            return Err(Error::OutOfRange {
                time: s,
                horizon: scenario.horizon,
            });
        }
    }
    Ok((traces, rate))
}

fn residual_points<F>(traces: &[PathTrace], delta: f64, grid: &[f64], residual: F) -> Vec<ResidualPoint>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    grid.iter()
        .map(|&s| {
            let values: Vec<f64> = traces
                .par_iter()
                .map(|tr| residual(s, discounted_sum(&tr.arrivals, &tr.claims, delta, s)))
                .collect();
            let summary = SampleSummary::from_slice(&values);
            ResidualPoint {
                time: s,
                mean: summary.mean,
                std_error: summary.std_error(),
            }
        })
        .collect()
}

/// Sample means of `A_s = Z_s - E[Z_s]` on `grid`, centred by `mean_at(s)`.
pub fn martingale_residual_a_with<M>(
    result: &SimulationResult,
    scenario: &DcrmScenario,
    grid: &[f64],
    mean_at: M,
) -> Result<Vec<ResidualPoint>>
where
    M: Fn(f64) -> f64 + Sync,
{
    let (traces, _) = residual_setup(result, scenario, grid)?;
    Ok(residual_points(traces, scenario.delta, grid, |s, z| z - mean_at(s)))
}

/// Sample means of `B_s = (Z_s - E[Z_s])^2 - Var[Z_s]` on `grid`.
pub fn martingale_residual_b_with<M, V>(
    result: &SimulationResult,
    scenario: &DcrmScenario,
    grid: &[f64],
    mean_at: M,
    variance_at: V,
) -> Result<Vec<ResidualPoint>>
where
    M: Fn(f64) -> f64 + Sync,
    V: Fn(f64) -> f64 + Sync,
{
    let (traces, _) = residual_setup(result, scenario, grid)?;
    Ok(residual_points(traces, scenario.delta, grid, |s, z| {
        (z - mean_at(s)).powi(2) - variance_at(s)
    }))
}

pub fn martingale_residual_a(
    result: &SimulationResult,
    scenario: &DcrmScenario,
    grid: &[f64],
) -> Result<Vec<ResidualPoint>> {
    let (_, rate) = residual_setup(result, scenario, grid)?;
    let mu1 = scenario.claim.mean();
    martingale_residual_a_with(result, scenario, grid, |s| analytic_mean(mu1, rate, scenario.delta, s))
}

pub fn martingale_residual_b(
    result: &SimulationResult,
    scenario: &DcrmScenario,
    grid: &[f64],
) -> Result<Vec<ResidualPoint>> {
    let (_, rate) = residual_setup(result, scenario, grid)?;
    let (mu1, mu2) = (scenario.claim.mean(), scenario.claim.second_moment());
    martingale_residual_b_with(
        result,
        scenario,
        grid,
        |s| analytic_mean(mu1, rate, scenario.delta, s),
        |s| analytic_variance(mu2, rate, scenario.delta, s),
    )
}

/// Sample mean and standard error of `e^{uZ}`.
///
/// For `u > 0` the argument must stay within half of the claim law's m.g.f.
/// bound, beyond which the estimator's variance is unusable.
pub fn estimate_mgf_empirical(result: &SimulationResult, u: f64) -> Result<Estimate> {
    if !u.is_finite() {
        return Err(Error::invalid("u", "must be finite"));
    }
    if let Some(bound) = result.claim.mgf_bound() {
        let safe = 0.5 * bound;
        if u > safe {
            return Err(Error::MgfDomain { u, bound: safe });
        }
    }
    let values: Vec<f64> = result.z.iter().map(|z| (u * z).exp()).collect();
    Ok(SampleSummary::from_slice(&values).mean_estimate())
}
