//! CSV and text renderings of simulation results and premium quotes.
//!
//! Floating-point values are printed with 10 significant digits so that golden
//! files diff cleanly.

use std::fmt::Write as _;

use crate::dcrm::SimulationResult;
use crate::payd::PremiumQuote;
use crate::stats::Estimate;

/// Formats `x` with 10 significant digits: fixed notation for moderate
/// magnitudes, scientific otherwise.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.9e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..15).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn paths_csv(result: &SimulationResult) -> String {
    let mut out = String::with_capacity(24 * result.n_paths() + 16);
    out.push_str("path,z,count\n");
    for (i, (z, c)) in result.z.iter().zip(&result.counts).enumerate() {
        let _ = writeln!(out, "{i},{},{c}", sig10(*z));
    }
    out
}

/// One row of the `stat,value,stderr` summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub stat: String,
    pub value: f64,
    pub std_error: f64,
}

impl SummaryRow {
    pub fn new(stat: &str, estimate: Estimate) -> Self {
        SummaryRow {
            stat: stat.into(),
            value: estimate.value,
            std_error: estimate.std_error,
        }
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("stat,value,stderr\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.stat, sig10(r.value), sig10(r.std_error));
    }
    out
}

/// `path,arrival,claim,discounted` for every claim of every traced path.
pub fn trace_csv(result: &SimulationResult) -> Option<String> {
    let traces = result.traces.as_ref()?;
    let mut out = String::from("path,arrival,claim,discounted\n");
    for (i, tr) in traces.iter().enumerate() {
        for (w, x) in tr.arrivals.iter().zip(&tr.claims) {
            let _ = writeln!(out, "{i},{},{},{}", sig10(*w), sig10(*x), sig10(x * (-result.delta * w).exp()));
        }
    }
    Some(out)
}

/// `path,distance,discounted_exposure` for traced Cox paths: the realized
/// mileage and `∫ λ(s, d(s)) e^{-δs} ds` of each path.
pub fn exposure_csv(result: &SimulationResult) -> Option<String> {
    let traces = result.traces.as_ref()?;
    if traces.iter().any(|t| t.distance.is_none()) {
        return None;
    }
    let mut out = String::from("path,distance,discounted_exposure\n");
    for (i, tr) in traces.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{}",
            sig10(tr.distance.unwrap_or(0.0)),
            sig10(tr.discounted_exposure.unwrap_or(0.0))
        );
    }
    Some(out)
}

/// `net_premium,stderr,per_expected_mile,n_outer`; the per-mile field is empty
/// when no mileage is expected.
pub fn quote_csv(quote: &PremiumQuote) -> String {
    format!(
        "net_premium,stderr,per_expected_mile,n_outer\n{},{},{},{}\n",
        sig10(quote.net_premium),
        sig10(quote.standard_error),
        quote.per_expected_mile.map(sig10).unwrap_or_default(),
        quote.n_outer_paths
    )
}

pub fn quote_text(quote: &PremiumQuote) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "PAYD net premium quote");
    let _ = writeln!(out, "  net premium        {}", sig10(quote.net_premium));
    let _ = writeln!(out, "  standard error     {}", sig10(quote.standard_error));
    let _ = writeln!(out, "  expected mileage   {}", sig10(quote.expected_mileage));
    match quote.per_expected_mile {
        Some(r) => {
            let _ = writeln!(out, "  per expected mile  {}", sig10(r));
        }
        None => {
            let _ = writeln!(out, "  per expected mile  n/a (no expected mileage)");
        }
    }
    let _ = writeln!(out, "  outer paths        {}", quote.n_outer_paths);
    out
}
