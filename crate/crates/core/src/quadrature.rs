//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |integral|)` or the subdivision budget
//! runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-12,
            abs: 1e-14,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
    pub converged: bool,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod evaluation with the embedded 10-point Gauss rule.
/// Returns `(kronrod, |kronrod - gauss|)`.
pub fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
            converged: true,
        };
    }
    let (value, error) = gauss_kronrod_21(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let mut total = value;
    let mut total_err = error;

    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Quadrature {
                value: total,
                abs_error: total_err,
                intervals: heap.len(),
                converged: false,
            };
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            heap.push(worst);
            return Quadrature {
                value: total,
                abs_error: total_err,
                intervals: heap.len(),
                converged: false,
            };
        }
        let (lv, le) = gauss_kronrod_21(&f, worst.a, mid);
        let (rv, re) = gauss_kronrod_21(&f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Piece { a: mid, b: worst.b, value: rv, error: re });
    }

    // recompute from the pieces to shed accumulated update error
    let mut pieces: Vec<Piece> = heap.into_vec();
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = crate::stats::pairwise_sum(&pieces.iter().map(|p| p.value).collect::<Vec<_>>());
    let abs_error = pieces.iter().map(|p| p.error).sum();
    Quadrature {
        value,
        abs_error,
        intervals: pieces.len(),
        converged: true,
    }
}

/// Integrates over `[a, b]` split at the supplied interior breakpoints, where the
/// integrand may have kinks or jumps.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Quadrature {
    let mut edges = vec![a];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut out = Quadrature {
        value: 0.0,
        abs_error: 0.0,
        intervals: 0,
        converged: true,
    };
    let mut values = Vec::with_capacity(edges.len());
    for w in edges.windows(2) {
        let q = integrate(&f, w[0], w[1], tol);
        values.push(q.value);
        out.abs_error += q.abs_error;
        out.intervals += q.intervals;
        out.converged &= q.converged;
    }
    out.value = crate::stats::pairwise_sum(&values);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_normalised() {
        let gk: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((gk - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kronrod_is_exact_for_high_degree_polynomials() {
        // degree 31 on [-1, 1]: even powers integrate to 2/(k+1)
        for k in 0..=30u32 {
            let (v, _) = gauss_kronrod_21(&|x: f64| x.powi(k as i32), -1.0, 1.0);
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((v - exact).abs() < 1e-14, "degree {k}: {v} vs {exact}");
        }
    }

    #[test]
    fn exponential_integral() {
        let q = integrate(|s: f64| (-0.05 * s).exp(), 0.0, 1.0, Tolerance::default());
        let exact = (1.0 - (-0.05f64).exp()) / 0.05;
        assert!(q.converged);
        assert!(((q.value - exact) / exact).abs() < 1e-14);
    }

    #[test]
    fn adaptive_refinement_handles_peaks() {
        // integral of 1/(1e-4 + x^2) on [-1, 1] = 2/sqrt(1e-4) * atan(1/sqrt(1e-4))
        let eps = 1e-4f64;
        let q = integrate(|x: f64| 1.0 / (eps + x * x), -1.0, 1.0, Tolerance::default());
        let exact = 2.0 / eps.sqrt() * (1.0 / eps.sqrt()).atan();
        assert!(q.converged);
        assert!(((q.value - exact) / exact).abs() < 1e-11, "{} vs {}", q.value, exact);
        assert!(q.intervals > 1);
    }

    #[test]
    fn piecewise_handles_jumps() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 5.0 };
        let q = integrate_piecewise(step, 0.0, 1.0, &[0.3], Tolerance::default());
        assert!((q.value - (0.3 + 5.0 * 0.7)).abs() < 1e-14);
        assert_eq!(integrate(step, 2.0, 2.0, Tolerance::default()).value, 0.0);
    }
}
