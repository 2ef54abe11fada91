use dcrm::dcrm::{self as model, DcrmScenario, SimulationOptions};
use dcrm::mileage::{Trip, TripLog};
use dcrm::payd::{self, PaydPolicy};
use dcrm::processes::{IntensityModel, MileageAffine};
use dcrm::rng::{self, Purpose};
use dcrm::{ClaimDistribution, MileageModel};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b.abs().max(f64::MIN_POSITIVE)).abs()
    }
}

fn claims() -> impl Strategy<Value = ClaimDistribution> {
    prop_oneof![
        (0.2..3.0f64).prop_map(|m| ClaimDistribution::exponential(m).unwrap()),
        (0.5..4.0f64, 0.2..2.0f64).prop_map(|(k, th)| ClaimDistribution::Gamma { shape: k, scale: th }),
        (0.1..5.0f64).prop_map(|v| ClaimDistribution::Deterministic { value: v }),
    ]
}

fn renewal() -> MileageModel {
    MileageModel::AlternatingRenewal { mean_drive: 0.5, mean_idle: 1.5, speed: 20.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mgf_first_difference_gives_mean(
        claim in claims(), rate in 0.1..3.0f64, delta in 0.0..2.0f64, t in 0.1..5.0f64,
    ) {
        let h = 1e-6;
        let c = IntensityModel::Constant { rate };
        let up = model::mgf_nhpp(&claim, &c, delta, t, h).unwrap();
        let dn = model::mgf_nhpp(&claim, &c, delta, t, -h).unwrap();
        let exact = model::analytic_mean(claim.mean(), rate, delta, t);
        prop_assert!(rel((up - dn) / (2.0 * h), exact) < 1e-4);
    }

    #[test]
    fn log_mgf_second_difference_gives_variance(
        claim in claims(), rate in 0.1..3.0f64, delta in 0.0..2.0f64, t in 0.1..5.0f64,
    ) {
        let h = 1e-4;
        let c = IntensityModel::Constant { rate };
        let f = |u| model::log_mgf_nhpp(&claim, &c, delta, t, u).unwrap();
        let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let exact = model::analytic_variance(claim.second_moment(), rate, delta, t);
        prop_assert!(rel(second, exact) < 1e-3, "{second} vs {exact}");
    }

    #[test]
    fn quadrature_matches_exponential_closed_form(
        beta in 0.2..3.0f64, rate in 0.1..3.0f64, delta in 1e-3..3.0f64, t in 0.1..10.0f64, k in 0usize..=5,
    ) {
        let u = 0.1 * k as f64 / beta;
        let claim = ClaimDistribution::exponential(beta).unwrap();
        let quad = model::mgf_nhpp(&claim, &IntensityModel::Constant { rate }, delta, t, u).unwrap();
        let closed = model::mgf_exponential_closed(beta, rate, delta, t, u).unwrap();
        prop_assert!(rel(quad, closed) <= 1e-8);
    }

    #[test]
    fn mean_limits(mu1 in 0.1..5.0f64, rate in 0.1..5.0f64, delta in 1e-3..2.0f64, t in 0.1..10.0f64) {
        prop_assert_eq!(model::analytic_mean(mu1, rate, 0.0, t), mu1 * rate * t);
        prop_assert!(rel(model::analytic_mean(mu1, rate, 1e-10, t), mu1 * rate * t) < 1e-6);
        prop_assert!(rel(model::analytic_mean(mu1, rate, delta, 1e3 / delta), mu1 * rate / delta) < 1e-6);
    }

    #[test]
    fn cox_conditioning_matches_induced_nhpp(
        seed in any::<u64>(), base in 0.0..1.0f64, per_mile in 0.0..0.05f64, u in -0.5..0.45f64,
    ) {
        let policy = PaydPolicy::new(
            ClaimDistribution::exponential(1.0).unwrap(),
            MileageAffine { base, per_mile },
            renewal(),
            0.1,
            3.0,
        ).unwrap();
        let path = policy.mileage.realize_path(3.0, &mut rng::path_stream(seed, Purpose::Adhoc, 0)).unwrap();
        let induced = policy.intensity.on_path(&path);
        let direct = model::mgf_nhpp(&policy.claim, &induced, 0.1, 3.0, u).unwrap();
        prop_assert!(rel(policy.conditional_mgf(&path, u).unwrap(), direct) <= 1e-10);
    }

    #[test]
    fn premium_additive_over_disjoint_logs(
        a in proptest::collection::vec((0.05..0.4f64, 0.0..100.0f64), 0..5),
        b in proptest::collection::vec((0.05..0.4f64, 0.0..100.0f64), 0..5),
        base in 0.0..0.5f64, per_mile in 0.0..0.01f64,
    ) {
        // log A occupies [0, 2), log B occupies [2, 4)
        let build = |trips: &[(f64, f64)], offset: f64| {
            TripLog::new(trips.iter().enumerate().map(|(i, &(d, m))| {
                let start = offset + 0.4 * i as f64;
                Trip { start, end: start + d, miles: m }
            }).collect()).unwrap()
        };
        let (la, lb) = (build(&a, 0.0), build(&b, 2.0));
        let price = |log: TripLog, base: f64| {
            let p = PaydPolicy::new(
                ClaimDistribution::Deterministic { value: 2.0 },
                MileageAffine { base, per_mile },
                MileageModel::FromTripLog(log),
                0.0,
                4.0,
            ).unwrap();
            payd::price_payd(&p, 1, 0).unwrap().net_premium
        };
        // the parked-car term is not split between logs, so compare mileage-driven parts
        let whole = price(la.merge(&lb).unwrap(), base) - price(TripLog::new(vec![]).unwrap(), base);
        let parts = price(la, 0.0) + price(lb, 0.0);
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1e-300) + 1e-15);
    }

    #[test]
    fn premium_monotone(
        base in 0.0..1.0f64, per_mile in 0.0..0.02f64, mu in 0.1..3.0f64, t in 0.5..5.0f64, bump in 0.01..1.0f64,
    ) {
        let quote = |base: f64, per_mile: f64, mu: f64, t: f64| {
            let p = PaydPolicy::new(
                ClaimDistribution::Deterministic { value: mu },
                MileageAffine { base, per_mile },
                renewal(),
                0.05,
                t,
            ).unwrap();
            payd::price_payd(&p, 200, 11).unwrap().net_premium
        };
        let p0 = quote(base, per_mile, mu, t);
        prop_assert!(quote(base + bump, per_mile, mu, t) >= p0);
        prop_assert!(quote(base, per_mile + bump * 0.01, mu, t) >= p0);
        prop_assert!(quote(base, per_mile, mu + bump, t) >= p0);
        prop_assert!(quote(base, per_mile, mu, t + bump) >= p0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_independent_of_pool_size(seed in any::<u64>(), threads in 2usize..6) {
        let s = DcrmScenario {
            mileage: Some(renewal()),
            intensity: IntensityModel::MileageAffine(MileageAffine { base: 0.2, per_mile: 0.01 }),
            ..DcrmScenario::poisson(ClaimDistribution::exponential(1.0).unwrap(), 1.0, 0.1, 2.0).unwrap()
        };
        let run = |n: usize| {
            rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(|| {
                model::simulate_zt(&s, 2000, seed, SimulationOptions { full_trace: true }).unwrap()
            })
        };
        let (a, b) = (run(1), run(threads));
        prop_assert_eq!(a.z.iter().map(|z| z.to_bits()).collect::<Vec<_>>(), b.z.iter().map(|z| z.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(a.counts, b.counts);
    }
}

#[test]
fn zero_mileage_zero_base_prices_to_zero() {
    for model in [MileageModel::ConstantSpeed { speed: 0.0 }, MileageModel::FromTripLog(TripLog::new(vec![]).unwrap())] {
        let p = PaydPolicy::new(
            ClaimDistribution::exponential(1.0).unwrap(),
            MileageAffine { base: 0.0, per_mile: 0.3 },
            model,
            0.05,
            2.0,
        )
        .unwrap();
        let q = payd::price_payd(&p, 10, 0).unwrap();
        assert_eq!(q.net_premium, 0.0);
        assert_eq!(q.per_expected_mile, None);
    }
}
