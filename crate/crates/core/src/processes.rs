//! Counting processes: homogeneous Poisson, NHPP by thinning, and Cox processes
//! driven by a mileage path.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mileage::{MileageModel, MileagePath};
use crate::quadrature::{self, Tolerance};

/// A deterministic intensity function on `[0, horizon]`.
pub trait Intensity {
    fn rate(&self, s: f64) -> f64;

    /// Points where the rate may have a kink or jump.
    fn breakpoints(&self, _horizon: f64) -> Vec<f64> {
        Vec::new()
    }

    /// An upper bound on the rate over `[0, horizon]`, when one is known.
    fn upper_bound(&self, horizon: f64) -> Option<f64>;

    /// `(start, end, rate)` pieces when the rate is piecewise constant.
    fn constant_pieces(&self, _horizon: f64) -> Option<Vec<(f64, f64, f64)>> {
        None
    }
}

/// Closed-form rate with a caller-supplied bound.
pub struct RateFn<F> {
    pub rate: F,
    pub bound: f64,
}

impl<F: Fn(f64) -> f64> Intensity for RateFn<F> {
    fn rate(&self, s: f64) -> f64 {
        (self.rate)(s)
    }

    fn upper_bound(&self, _horizon: f64) -> Option<f64> {
        Some(self.bound)
    }
}

/// Piecewise-linear rate through `(times[k], rates[k])`, held constant outside
/// the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateTable {
    times: Vec<f64>,
    rates: Vec<f64>,
}

impl RateTable {
    pub fn new(times: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        let t = RateTable { times, rates };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() || self.times.len() != self.rates.len() {
            return Err(Error::invalid("rates", "table needs matching, non-empty `times` and `rates`"));
        }
        if self.times.iter().any(|t| !t.is_finite()) || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("times", "must be finite and strictly increasing"));
        }
        if self.rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::invalid("rates", "must be finite and >= 0"));
        }
        Ok(())
    }
}

impl Intensity for RateTable {
    fn rate(&self, s: f64) -> f64 {
        let k = self.times.partition_point(|&t| t <= s);
        if k == 0 {
            return self.rates[0];
        }
        if k == self.times.len() {
            return self.rates[k - 1];
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (r0, r1) = (self.rates[k - 1], self.rates[k]);
        r0 + (r1 - r0) * (s - t0) / (t1 - t0)
    }

    fn breakpoints(&self, _horizon: f64) -> Vec<f64> {
        self.times.clone()
    }

    fn upper_bound(&self, _horizon: f64) -> Option<f64> {
        Some(self.rates.iter().copied().fold(0.0, f64::max))
    }
}

/// `λ(t, d) = base + per_mile · ḋ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MileageAffine {
    pub base: f64,
    pub per_mile: f64,
}

impl MileageAffine {
    pub fn validate(&self) -> Result<()> {
        if !(self.base.is_finite() && self.base >= 0.0) {
            return Err(Error::invalid("base", format!("must be finite and >= 0, got {}", self.base)));
        }
        if !(self.per_mile.is_finite() && self.per_mile >= 0.0) {
            return Err(Error::invalid("per_mile", format!("must be finite and >= 0, got {}", self.per_mile)));
        }
        Ok(())
    }

    pub fn on_path<'a>(&self, path: &'a MileagePath) -> PathIntensity<'a> {
        PathIntensity { model: *self, path }
    }
}

/// A mileage-affine intensity conditioned on one realized path; piecewise constant.
#[derive(Debug, Clone, Copy)]
pub struct PathIntensity<'a> {
    model: MileageAffine,
    path: &'a MileagePath,
}

impl PathIntensity<'_> {
    pub fn path(&self) -> &MileagePath {
        self.path
    }
}

impl Intensity for PathIntensity<'_> {
    fn rate(&self, s: f64) -> f64 {
        let speed = self.path.speed_at(s.clamp(0.0, self.path.horizon())).unwrap_or(0.0);
        self.model.base + self.model.per_mile * speed
    }

    fn breakpoints(&self, _horizon: f64) -> Vec<f64> {
        self.path.interior_breakpoints().to_vec()
    }

    fn upper_bound(&self, _horizon: f64) -> Option<f64> {
        Some(self.model.base + self.model.per_mile * self.path.max_speed())
    }

    fn constant_pieces(&self, horizon: f64) -> Option<Vec<(f64, f64, f64)>> {
        Some(
            self.path
                .segments()
                .filter(|seg| seg.start < horizon)
                .map(|seg| (seg.start, seg.end.min(horizon), self.model.base + self.model.per_mile * seg.speed))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntensityModel {
    Constant { rate: f64 },
    Tabulated(RateTable),
    MileageAffine(MileageAffine),
}

impl IntensityModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            IntensityModel::Constant { rate } => {
                if rate.is_finite() && *rate >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("rate", format!("must be finite and >= 0, got {rate}")))
                }
            }
            IntensityModel::Tabulated(t) => t.validate(),
            IntensityModel::MileageAffine(m) => m.validate(),
        }
    }

    pub fn constant_rate(&self) -> Option<f64> {
        match self {
            IntensityModel::Constant { rate } => Some(*rate),
            _ => None,
        }
    }

    pub fn mileage_affine(&self) -> Option<MileageAffine> {
        match self {
            IntensityModel::MileageAffine(m) => Some(*m),
            _ => None,
        }
    }
}

impl Intensity for IntensityModel {
    /// Mileage-affine models evaluate to their mileage-free part `base` here;
    /// condition on a path with [`MileageAffine::on_path`] for the full rate.
    fn rate(&self, s: f64) -> f64 {
        match self {
            IntensityModel::Constant { rate } => *rate,
            IntensityModel::Tabulated(t) => t.rate(s),
            IntensityModel::MileageAffine(m) => m.base,
        }
    }

    fn breakpoints(&self, horizon: f64) -> Vec<f64> {
        match self {
            IntensityModel::Tabulated(t) => t.breakpoints(horizon),
            _ => Vec::new(),
        }
    }

    fn upper_bound(&self, horizon: f64) -> Option<f64> {
        match self {
            IntensityModel::Constant { rate } => Some(*rate),
            IntensityModel::Tabulated(t) => t.upper_bound(horizon),
            IntensityModel::MileageAffine(m) => Some(m.base),
        }
    }

    fn constant_pieces(&self, horizon: f64) -> Option<Vec<(f64, f64, f64)>> {
        match self {
            IntensityModel::Constant { rate } => Some(vec![(0.0, horizon, *rate)]),
            IntensityModel::MileageAffine(m) => Some(vec![(0.0, horizon, m.base)]),
            IntensityModel::Tabulated(_) => None,
        }
    }
}

/// Ordered arrival times `W_1 < ... < W_N` on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalPath {
    times: Vec<f64>,
    horizon: f64,
}

impl ArrivalPath {
    pub fn empty(horizon: f64) -> Self {
        ArrivalPath {
            times: Vec::new(),
            horizon,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Realized `N(t)`.
    pub fn count(&self, t: f64) -> usize {
        self.times.partition_point(|&w| w <= t)
    }

    pub fn into_times(self) -> Vec<f64> {
        self.times
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon.is_finite() && horizon > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("horizon", format!("must be finite and > 0, got {horizon}")))
    }
}

/// Homogeneous Poisson arrivals by summing exponential gaps.
pub fn simulate_poisson<R: Rng + ?Sized>(rate: f64, horizon: f64, rng: &mut R) -> Result<ArrivalPath> {
    check_horizon(horizon)?;
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::invalid("rate", format!("must be finite and >= 0, got {rate}")));
    }
    let mut times = Vec::new();
    if rate > 0.0 {
        let mut t = 0.0;
        loop {
            let gap: f64 = Exp1.sample(rng);
            t += gap / rate;
            if t > horizon {
                break;
            }
            // a zero gap would break strict ordering
            if t > times.last().copied().unwrap_or(0.0) {
                times.push(t);
            }
        }
    }
    Ok(ArrivalPath { times, horizon })
}

/// NHPP arrivals by thinning a rate-`rate_max` homogeneous stream.
///
/// Every candidate's rate is checked against `rate_max`; a violation is an
/// error rather than a silently biased sample. `rate_max == 0` yields no arrivals.
pub fn simulate_nhpp<I, R>(intensity: &I, horizon: f64, rate_max: f64, rng: &mut R) -> Result<ArrivalPath>
where
    I: Intensity + ?Sized,
    R: Rng + ?Sized,
{
    check_horizon(horizon)?;
    if !(rate_max.is_finite() && rate_max >= 0.0) {
        return Err(Error::invalid("rate_max", format!("must be finite and >= 0, got {rate_max}")));
    }
    let mut times = Vec::new();
    if rate_max == 0.0 {
        return Ok(ArrivalPath { times, horizon });
    }
    let mut t = 0.0;
    loop {
        let gap: f64 = Exp1.sample(rng);
        t += gap / rate_max;
        if t > horizon {
            break;
        }
        let rate = intensity.rate(t);
        if rate > rate_max * (1.0 + 1e-12) || rate.is_nan() {
            return Err(Error::RateBoundExceeded {
                time: t,
                rate,
                bound: rate_max,
            });
        }
        let u: f64 = rng.random();
        if u * rate_max < rate && t > times.last().copied().unwrap_or(0.0) {
            times.push(t);
        }
    }
    Ok(ArrivalPath { times, horizon })
}

/// [`simulate_nhpp`] with the intensity's own upper bound.
pub fn simulate_nhpp_auto<I, R>(intensity: &I, horizon: f64, rng: &mut R) -> Result<ArrivalPath>
where
    I: Intensity + ?Sized,
    R: Rng + ?Sized,
{
    let bound = intensity
        .upper_bound(horizon)
        .ok_or_else(|| Error::invalid("rate_max", "intensity has no known bound; supply one"))?;
    simulate_nhpp(intensity, horizon, bound, rng)
}

/// Cox process: realize a mileage path, then thin conditional on it.
pub fn simulate_cox<R: Rng + ?Sized>(
    model: &MileageAffine,
    mileage: &MileageModel,
    horizon: f64,
    rng: &mut R,
) -> Result<(MileagePath, ArrivalPath)> {
    model.validate()?;
    let path = mileage.realize_path(horizon, rng)?;
    let intensity = model.on_path(&path);
    let bound = intensity.upper_bound(horizon).unwrap_or(0.0);
    let arrivals = simulate_nhpp(&intensity, horizon, bound, rng)?;
    Ok((path, arrivals))
}

/// `∫_a^b e^{-δs} ds`, with the exact `b - a` branch at `δ = 0`.
pub fn discount_integral(a: f64, b: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        b - a
    } else {
        (-delta * a).exp() * -(-delta * (b - a)).exp_m1() / delta
    }
}

/// `∫_0^t λ(s) e^{-δs} ds`: exact per piece for piecewise-constant rates,
/// adaptive quadrature otherwise.
pub fn intensity_integral<I: Intensity + ?Sized>(intensity: &I, delta: f64, horizon: f64) -> Result<f64> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta", format!("must be finite and >= 0, got {delta}")));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::invalid("horizon", format!("must be finite and >= 0, got {horizon}")));
    }
    if horizon == 0.0 {
        return Ok(0.0);
    }
    if let Some(pieces) = intensity.constant_pieces(horizon) {
        let terms: Vec<f64> = pieces
            .iter()
            .filter(|(_, _, rate)| *rate != 0.0)
            .map(|&(a, b, rate)| rate * discount_integral(a, b, delta))
            .collect();
        return Ok(crate::stats::pairwise_sum(&terms));
    }
    let q = quadrature::integrate_piecewise(
        |s| intensity.rate(s) * (-delta * s).exp(),
        0.0,
        horizon,
        &intensity.breakpoints(horizon),
        Tolerance::default(),
    );
    Ok(q.value)
}
