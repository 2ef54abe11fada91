//! Order-independent summary statistics.
//!
//! Sums use pairwise reduction over the path-ordered sample, so the result is a
//! function of the sample alone and not of the worker count that produced it.

const PAIRWISE_BLOCK: usize = 64;

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn pairwise_map_sum(values: &[f64], f: &impl Fn(f64) -> f64) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().map(|&v| f(v)).sum();
    }
    let mid = values.len() / 2;
    pairwise_map_sum(&values[..mid], f) + pairwise_map_sum(&values[mid..], f)
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            std_error: 0.0,
        }
    }

    /// Standardized distance to `target`; zero when both coincide exactly.
    pub fn z_score(&self, target: f64) -> f64 {
        standardized_difference(self.value, target, self.std_error)
    }
}

pub fn standardized_difference(value: f64, target: f64, std_error: f64) -> f64 {
    let diff = value - target;
    if diff == 0.0 {
        0.0
    } else if std_error > 0.0 {
        diff / std_error
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// First four sample moments of a slice, as needed for mean and variance tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance (`n - 1` denominator); zero for `n < 2`.
    pub variance: f64,
    /// Fourth central sample moment (`n` denominator).
    pub fourth_central: f64,
}

impl SampleSummary {
    pub fn from_slice(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return SampleSummary {
                n,
                mean: f64::NAN,
                variance: f64::NAN,
                fourth_central: f64::NAN,
            };
        }
        let nf = n as f64;
        let mean = pairwise_sum(values) / nf;
        let m2 = pairwise_map_sum(values, &|v| (v - mean).powi(2)) / nf;
        let m4 = pairwise_map_sum(values, &|v| (v - mean).powi(4)) / nf;
        let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        SampleSummary {
            n,
            mean,
            variance,
            fourth_central: m4,
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    pub fn mean_estimate(&self) -> Estimate {
        Estimate {
            value: self.mean,
            std_error: self.std_error(),
        }
    }

    /// Standard error of the sample variance: `sqrt((m4 - s^4 (n-3)/(n-1)) / n)`.
    pub fn variance_std_error(&self) -> f64 {
        if self.n < 4 {
            return 0.0;
        }
        let nf = self.n as f64;
        let s4 = self.variance * self.variance;
        ((self.fourth_central - s4 * (nf - 3.0) / (nf - 1.0)).max(0.0) / nf).sqrt()
    }

    pub fn variance_estimate(&self) -> Estimate {
        Estimate {
            value: self.variance,
            std_error: self.variance_std_error(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_sample_has_zero_spread() {
        let s = SampleSummary::from_slice(&[2.5; 1000]);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.std_error(), 0.0);
        assert_eq!(s.variance_std_error(), 0.0);
    }

    #[test]
    fn small_sample_moments() {
        let s = SampleSummary::from_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        // central deviations ±0.5, ±1.5 -> (2*0.0625 + 2*5.0625)/4
        assert!((s.fourth_central - 2.5625).abs() < 1e-15);
    }

    #[test]
    fn z_score_edge_cases() {
        assert_eq!(Estimate::exact(1.0).z_score(1.0), 0.0);
        assert_eq!(Estimate::exact(1.0).z_score(0.0), f64::INFINITY);
        let e = Estimate { value: 1.2, std_error: 0.1 };
        assert!((e.z_score(1.0) - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn pairwise_matches_naive(values in prop::collection::vec(-1e3f64..1e3, 0..500)) {
            let naive: f64 = values.iter().sum();
            let pw = pairwise_sum(&values);
            prop_assert!((naive - pw).abs() <= 1e-9 * (1.0 + values.iter().map(|v| v.abs()).sum::<f64>()));
        }
    }
}
