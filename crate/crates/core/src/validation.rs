//! Statistical validation suite: Monte Carlo against every closed form.
//!
//! Each check reduces to one statistic compared with a fixed threshold, either
//! the worst absolute z-score (threshold 4) or the worst relative error.

use std::fmt::Write as _;

use crate::config::ScenarioConfig;
use crate::dcrm::{self, DcrmScenario, SimulationOptions};
use crate::distributions::ClaimDistribution;
use crate::error::Result;
use crate::mileage::MileageModel;
use crate::output::sig10;
use crate::payd::{self, PaydPolicy};
use crate::processes::{intensity_integral, IntensityModel, MileageAffine};
use crate::rng::derive_seed;
use crate::stats::standardized_difference;

pub const Z_THRESHOLD: f64 = 4.0;
pub const MGF_REL_TOL: f64 = 1e-8;
pub const LIMIT_REL_TOL: f64 = 1e-6;
pub const COX_REL_TOL: f64 = 1e-10;

pub const RATE_GRID: [f64; 3] = [0.5, 1.0, 2.0];
pub const DELTA_GRID: [f64; 3] = [0.01, 0.1, 1.0];
pub const HORIZON_GRID: [f64; 3] = [0.5, 1.0, 5.0];
pub const MARTINGALE_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub seed: u64,
    /// Relative corruption applied to the analytic mean wherever it serves as
    /// a reference. A working suite must flag any non-trivial value.
    pub perturb_mean: f64,
    /// Base Monte Carlo sample size (`10^5` by default).
    pub paths: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            seed: 42,
            perturb_mean: 0.0,
            paths: 100_000,
        }
    }
}

impl ValidationOptions {
    fn mean(&self, mu1: f64, rate: f64, delta: f64, t: f64) -> f64 {
        (1.0 + self.perturb_mean) * dcrm::analytic_mean(mu1, rate, delta, t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: String,
    pub description: String,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn z(id: &str, description: impl Into<String>, worst_abs_z: f64) -> Self {
        CheckOutcome {
            id: id.into(),
            description: description.into(),
            statistic: worst_abs_z,
            threshold: Z_THRESHOLD,
            passed: worst_abs_z < Z_THRESHOLD,
        }
    }

    fn rel(id: &str, description: impl Into<String>, worst_rel: f64, tol: f64) -> Self {
        CheckOutcome {
            id: id.into(),
            description: description.into(),
            statistic: worst_rel,
            threshold: tol,
            passed: worst_rel <= tol,
        }
    }
}

fn rel_err(value: f64, reference: f64) -> f64 {
    if value == reference {
        0.0
    } else {
        ((value - reference) / reference).abs()
    }
}

fn exp1() -> ClaimDistribution {
    ClaimDistribution::Exponential { mean: 1.0 }
}

/// Monte Carlo mean and variance against the closed forms on the 27-cell grid.
pub fn check_moment_grid(opts: &ValidationOptions) -> Result<Vec<CheckOutcome>> {
    let mut worst_mean: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    let mut cell = 0u64;
    for &rate in &RATE_GRID {
        for &delta in &DELTA_GRID {
            for &t in &HORIZON_GRID {
                let s = DcrmScenario::poisson(exp1(), rate, delta, t)?;
                let r = dcrm::simulate_zt(&s, opts.paths, derive_seed(opts.seed, 100 + cell), SimulationOptions::default())?;
                let summary = r.summary();
                let mean = opts.mean(1.0, rate, delta, t);
                let var = dcrm::analytic_variance(2.0, rate, delta, t);
                worst_mean = worst_mean.max(summary.mean_estimate().z_score(mean).abs());
                worst_var = worst_var.max(summary.variance_estimate().z_score(var).abs());
                cell += 1;
            }
        }
    }
    Ok(vec![
        CheckOutcome::z("mean_grid", "MC mean vs closed-form mean, 27 cells", worst_mean),
        CheckOutcome::z("variance_grid", "MC variance vs closed-form variance, 27 cells", worst_var),
    ])
}

/// Quadrature m.g.f. against the exponential closed form.
pub fn check_mgf_quadrature() -> Result<CheckOutcome> {
    let claim = exp1();
    let mut worst: f64 = 0.0;
    for &rate in &RATE_GRID {
        for &delta in &DELTA_GRID {
            for &t in &HORIZON_GRID {
                let c = IntensityModel::Constant { rate };
                for k in 1..=5 {
                    let u = 0.1 * k as f64;
                    let quad = dcrm::mgf_nhpp(&claim, &c, delta, t, u)?;
                    let closed = dcrm::mgf_exponential_closed(1.0, rate, delta, t, u)?;
                    worst = worst.max(rel_err(quad, closed));
                }
            }
        }
    }
    Ok(CheckOutcome::rel("mgf_quadrature", "quadrature m.g.f. vs exponential closed form", worst, MGF_REL_TOL))
}

pub fn check_mgf_empirical(opts: &ValidationOptions) -> Result<CheckOutcome> {
    let s = DcrmScenario::poisson(exp1(), 1.0, 1.0, 1.0)?;
    let r = dcrm::simulate_zt(&s, 10 * opts.paths, derive_seed(opts.seed, 200), SimulationOptions::default())?;
    let exact = dcrm::mgf_exponential_closed(1.0, 1.0, 1.0, 1.0, 0.4)?;
    let est = dcrm::estimate_mgf_empirical(&r, 0.4)?;
    Ok(CheckOutcome::z("mgf_empirical", "sample mean of exp(0.4 Z) vs closed form", est.z_score(exact).abs()))
}

pub fn check_limits() -> Result<Vec<CheckOutcome>> {
    let small = dcrm::analytic_mean(1.0, 1.0, 1e-10, 1.0);
    let undiscounted = dcrm::mgf_exponential_undiscounted(1.0, 1.0, 1.0, 0.5)?;
    let near_zero = dcrm::mgf_exponential_closed(1.0, 1.0, 1e-8, 1.0, 0.5)?;
    let delta = 0.05;
    let long = dcrm::mgf_exponential_closed(1.0, 1.0, delta, 1e3 / delta, 0.5)?;
    let perpetuity = dcrm::mgf_exponential_perpetuity(1.0, 1.0, delta, 0.5)?;
    Ok(vec![
        CheckOutcome::rel("limit_mean_delta0", "mean at delta=1e-10 vs mu1*lambda*t", rel_err(small, 1.0), LIMIT_REL_TOL),
        CheckOutcome::rel("limit_mgf_delta0", "m.g.f. at delta=1e-8 vs undiscounted form", rel_err(near_zero, undiscounted), LIMIT_REL_TOL),
        CheckOutcome::rel("limit_mgf_t_inf", "m.g.f. at t=1e3/delta vs perpetuity form", rel_err(long, perpetuity), LIMIT_REL_TOL),
    ])
}

pub fn check_martingales(opts: &ValidationOptions) -> Result<Vec<CheckOutcome>> {
    let (rate, delta) = (1.0, 0.05);
    let s = DcrmScenario::poisson(exp1(), rate, delta, 1.0)?;
    let r = dcrm::simulate_zt(&s, opts.paths, derive_seed(opts.seed, 300), SimulationOptions { full_trace: true })?;
    let mean_at = |t: f64| opts.mean(1.0, rate, delta, t);
    let var_at = |t: f64| dcrm::analytic_variance(2.0, rate, delta, t);
    let a = dcrm::martingale_residual_a_with(&r, &s, &MARTINGALE_GRID, mean_at)?;
    let b = dcrm::martingale_residual_b_with(&r, &s, &MARTINGALE_GRID, mean_at, var_at)?;
    let worst = |pts: &[dcrm::ResidualPoint]| pts.iter().map(|p| p.z_score().abs()).fold(0.0, f64::max);
    Ok(vec![
        CheckOutcome::z("martingale_a", "mean of Z_s - E[Z_s] at s in {0.25,0.5,0.75,1}", worst(&a)),
        CheckOutcome::z("martingale_b", "mean of (Z_s - E[Z_s])^2 - Var[Z_s]", worst(&b)),
    ])
}

pub fn check_cox_reduction(opts: &ValidationOptions) -> Result<Vec<CheckOutcome>> {
    let affine = MileageAffine { base: 0.0, per_mile: 0.01 };
    let speed = 30.0;
    let policy = PaydPolicy::new(exp1(), affine, MileageModel::ConstantSpeed { speed }, 1.0, 1.0)?;
    let induced = IntensityModel::Constant { rate: affine.base + affine.per_mile * speed };
    let mut worst: f64 = 0.0;
    for k in 1..=5 {
        let u = 0.1 * k as f64;
        let cox = payd::mgf_cox(&policy, u, 1, opts.seed)?;
        let nhpp = dcrm::mgf_nhpp(&policy.claim, &induced, policy.delta, policy.horizon, u)?;
        worst = worst.max(rel_err(cox.value, nhpp));
    }

    let (base, delta, t) = (1.0, 0.05, 1.0);
    let flat = PaydPolicy::new(
        exp1(),
        MileageAffine { base, per_mile: 0.0 },
        MileageModel::AlternatingRenewal { mean_drive: 1.0, mean_idle: 1.0, speed: 30.0 },
        delta,
        t,
    )?;
    let report = payd::validate_cox_premium(&flat, (opts.paths / 10).max(payd::MIN_VALIDATION_PATHS), opts.paths, derive_seed(opts.seed, 400))?;
    let target = opts.mean(1.0, base, delta, t);
    let premium_gap = {
        let rel = rel_err(report.premium.value, target);
        if rel <= 1e-9 { 0.0 } else { report.premium.z_score(target).abs() }
    };
    let sim_z = report.simulated_mean.z_score(target).abs();
    Ok(vec![
        CheckOutcome::rel("cox_mgf_reduction", "Cox m.g.f. with constant speed vs NHPP m.g.f.", worst, COX_REL_TOL),
        CheckOutcome::z("cox_premium_reduction", "mileage-free Cox premium and MC mean vs closed-form mean", premium_gap.max(sim_z)),
    ])
}

pub fn check_payd_premium(opts: &ValidationOptions) -> Result<CheckOutcome> {
    let policy = PaydPolicy::new(
        exp1(),
        MileageAffine { base: 0.1, per_mile: 0.005 },
        MileageModel::AlternatingRenewal { mean_drive: 1.0, mean_idle: 1.0, speed: 30.0 },
        0.05,
        5.0,
    )?;
    let report = payd::validate_cox_premium(&policy, (opts.paths / 10).max(payd::MIN_VALIDATION_PATHS), opts.paths, derive_seed(opts.seed, 500))?;
    Ok(CheckOutcome::z("payd_premium", "path-expectation premium vs full Cox simulation", report.z_score.abs()))
}

/// Re-runs a simulation and a stochastic quote on 1- and 4-thread pools and
/// counts differing bits.
pub fn check_determinism(opts: &ValidationOptions) -> Result<CheckOutcome> {
    let s = DcrmScenario::poisson(exp1(), 1.0, 0.05, 1.0)?;
    let policy = PaydPolicy::new(
        exp1(),
        MileageAffine { base: 0.1, per_mile: 0.005 },
        MileageModel::AlternatingRenewal { mean_drive: 1.0, mean_idle: 1.0, speed: 30.0 },
        0.05,
        5.0,
    )?;
    let run = |threads: usize| -> Result<(Vec<u64>, u64, u64)> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| {
            let r = dcrm::simulate_zt(&s, 20_000, derive_seed(opts.seed, 600), SimulationOptions::default())?;
            let q = payd::price_payd(&policy, 2_000, derive_seed(opts.seed, 601))?;
            Ok((r.z.iter().map(|z| z.to_bits()).collect(), q.net_premium.to_bits(), q.standard_error.to_bits()))
        })
    };
    let (a, b) = (run(1)?, run(4)?);
    let mismatches = a.0.iter().zip(&b.0).filter(|(x, y)| x != y).count()
        + usize::from(a.1 != b.1)
        + usize::from(a.2 != b.2);
    Ok(CheckOutcome::rel("determinism", "bitwise differences between 1- and 4-thread runs", mismatches as f64, 0.0))
}

/// The built-in suite.
pub fn run_default_suite(opts: &ValidationOptions) -> Result<Vec<CheckOutcome>> {
    let mut out = check_moment_grid(opts)?;
    out.push(check_mgf_quadrature()?);
    out.push(check_mgf_empirical(opts)?);
    out.extend(check_limits()?);
    out.extend(check_martingales(opts)?);
    out.extend(check_cox_reduction(opts)?);
    out.push(check_payd_premium(opts)?);
    out.push(check_determinism(opts)?);
    Ok(out)
}

/// Checks applicable to one configured scenario.
pub fn run_scenario_suite(config: &ScenarioConfig, opts: &ValidationOptions) -> Result<Vec<CheckOutcome>> {
    let s = &config.scenario;
    let n = opts.paths;
    let mut out = Vec::new();
    let (mu1, mu2) = (s.claim.mean(), s.claim.second_moment());

    match &s.intensity {
        IntensityModel::Constant { .. } | IntensityModel::Tabulated(_) => {
            let full = matches!(s.intensity, IntensityModel::Constant { .. });
            let r = dcrm::simulate_zt(s, n, opts.seed, SimulationOptions { full_trace: full })?;
            let summary = r.summary();
            let mean = (1.0 + opts.perturb_mean) * mu1 * intensity_integral(&s.intensity, s.delta, s.horizon)?;
            let var = mu2 * intensity_integral(&s.intensity, 2.0 * s.delta, s.horizon)?;
            out.push(CheckOutcome::z("mean", "MC mean vs analytic mean", summary.mean_estimate().z_score(mean).abs()));
            out.push(CheckOutcome::z("variance", "MC variance vs analytic variance", summary.variance_estimate().z_score(var).abs()));

            if let Some(rate) = s.intensity.constant_rate() {
                let grid: Vec<f64> = (1..=4).map(|k| s.horizon * k as f64 / 4.0).collect();
                let mean_at = |t: f64| opts.mean(mu1, rate, s.delta, t);
                let var_at = |t: f64| dcrm::analytic_variance(mu2, rate, s.delta, t);
                let worst = |pts: Vec<dcrm::ResidualPoint>| pts.iter().map(|p| p.z_score().abs()).fold(0.0, f64::max);
                out.push(CheckOutcome::z("martingale_a", "mean of A_s on quarter grid", worst(dcrm::martingale_residual_a_with(&r, s, &grid, mean_at)?)));
                out.push(CheckOutcome::z("martingale_b", "mean of B_s on quarter grid", worst(dcrm::martingale_residual_b_with(&r, s, &grid, mean_at, var_at)?)));

                if let ClaimDistribution::Exponential { mean: beta } = s.claim {
                    let mut worst_rel: f64 = 0.0;
                    for k in 0..=5 {
                        let u = 0.1 * k as f64 / beta;
                        let quad = dcrm::mgf_nhpp(&s.claim, &s.intensity, s.delta, s.horizon, u)?;
                        let closed = dcrm::mgf_exponential_closed(beta, rate, s.delta, s.horizon, u)?;
                        worst_rel = worst_rel.max(rel_err(quad, closed));
                    }
                    out.push(CheckOutcome::rel("mgf_quadrature", "quadrature vs closed-form m.g.f.", worst_rel, MGF_REL_TOL));
                    let u = 0.4 / beta;
                    let exact = dcrm::mgf_exponential_closed(beta, rate, s.delta, s.horizon, u)?;
                    let est = dcrm::estimate_mgf_empirical(&r, u)?;
                    out.push(CheckOutcome::z("mgf_empirical", "sample m.g.f. at 0.4/beta vs closed form", est.z_score(exact).abs()));
                }
            }
        }
        IntensityModel::MileageAffine(_) => {
            let policy = PaydPolicy::from_scenario(s)?;
            let n_outer = (n / 10).max(payd::MIN_VALIDATION_PATHS);
            let report = payd::validate_cox_premium(&policy, n_outer, n.max(payd::MIN_VALIDATION_PATHS), opts.seed)?;
            out.push(CheckOutcome::z("payd_premium", "path-expectation premium vs full Cox simulation", report.z_score.abs()));
            if s.intensity.mileage_affine().map(|m| m.per_mile) == Some(0.0) {
                let base = s.intensity.mileage_affine().unwrap().base;
                let target = opts.mean(mu1, base, s.delta, s.horizon);
                let z = standardized_difference(report.simulated_mean.value, target, report.simulated_mean.std_error);
                out.push(CheckOutcome::z("cox_premium_reduction", "mileage-free Cox MC mean vs closed-form mean", z.abs()));
            }
        }
    }
    Ok(out)
}

pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed)
}

pub fn render_table(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<24} {:>18} {:>18}  {:<6} description", "check", "statistic", "threshold", "result");
    for o in outcomes {
        let _ = writeln!(
            out,
            "{:<24} {:>18} {:>18}  {:<6} {}",
            o.id,
            sig10(o.statistic),
            sig10(o.threshold),
            if o.passed { "PASS" } else { "FAIL" },
            o.description
        );
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let _ = writeln!(out, "{passed}/{} checks passed", outcomes.len());
    out
}

pub fn report_csv(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::from("check,statistic,threshold,passed\n");
    for o in outcomes {
        let _ = writeln!(out, "{},{},{},{}", o.id, sig10(o.statistic), sig10(o.threshold), o.passed);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_checks_pass() {
        assert!(check_mgf_quadrature().unwrap().passed);
        assert!(all_passed(&check_limits().unwrap()));
    }

    #[test]
    fn table_lists_every_check() {
        let outcomes = check_limits().unwrap();
        let t = render_table(&outcomes);
        assert_eq!(t.lines().count(), outcomes.len() + 2);
        assert!(t.contains("3/3 checks passed"));
    }
}
