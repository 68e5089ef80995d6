use fading_sched::analysis::ks_statistic;
use fading_sched::rng::stream_rng;
use fading_sched::{Distribution, DistributionSpec};
use proptest::prelude::*;

fn catalog() -> Vec<Distribution> {
    [
        "gamma:m=1,omega=1",
        "gamma:m=2,omega=1",
        "gamma:m=0.5,omega=3",
        "weibull:k=2,lambda=1",
        "weibull:k=0.3,lambda=2",
        "weibull:k=0.7,lambda=1",
        "pareto:alpha=3",
        "pareto:alpha=2.5",
        "lognormal:mu=0,sigma=1",
        "lognormal:mu=-1,sigma=0.5",
    ]
    .iter()
    .map(|s| Distribution::new(s.parse().unwrap()).unwrap())
    .collect()
}

fn spec_strategy() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        (0.2f64..8.0, 0.1f64..5.0).prop_map(|(m, omega)| DistributionSpec::Gamma { m, omega }),
        (0.2f64..5.0, 0.1f64..5.0).prop_map(|(k, lambda)| DistributionSpec::Weibull { k, lambda }),
        (2.05f64..8.0).prop_map(|alpha| DistributionSpec::Pareto { alpha }),
        (-2.0f64..2.0, 0.1f64..2.0).prop_map(|(mu_log, sigma)| DistributionSpec::LogNormal { mu_log, sigma }),
    ]
}

proptest! {
    #[test]
    fn cdf_is_monotone(spec in spec_strategy(), mut xs in prop::collection::vec(0.0f64..50.0, 2..40)) {
        let d = Distribution::new(spec).unwrap();
        xs.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for x in xs {
            let f = d.cdf(x).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(f >= prev, "{} at {}: {} < {}", d.spec(), x, f, prev);
            prev = f;
        }
    }

    #[test]
    fn cdf_and_ccdf_are_complements(spec in spec_strategy(), x in 0.0f64..20.0) {
        let d = Distribution::new(spec).unwrap();
        let s = d.cdf(x).unwrap() + d.ccdf(x).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn upper_quantile_round_trip(spec in spec_strategy(), e in 0.0f64..12.0) {
        let d = Distribution::new(spec).unwrap();
        let q = 10f64.powf(-e);
        let x = d.upper_quantile(q).unwrap();
        prop_assert!(((d.ccdf(x).unwrap() - q) / q).abs() <= 1e-9, "q = {}, x = {}", q, x);
    }

    #[test]
    fn quantile_round_trip(spec in spec_strategy(), p in 0.001f64..0.999) {
        let d = Distribution::new(spec).unwrap();
        let x = d.quantile(p).unwrap();
        prop_assert!((d.cdf(x).unwrap() - p).abs() <= 1e-10);
    }

    #[test]
    fn spec_strings_round_trip(spec in spec_strategy()) {
        let back: DistributionSpec = spec.to_string().parse().unwrap();
        prop_assert_eq!(back, spec);
    }
}

#[test]
fn million_draws_pass_ks() {
    let n = 1_000_000;
    let threshold = 1.95 / (n as f64).sqrt();
    for (k, d) in catalog().iter().enumerate() {
        let mut rng = stream_rng(1000 + k as u64);
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        let ks = ks_statistic(&xs, |x| d.cdf(x).unwrap()).unwrap();
        assert!(ks < threshold, "{}: KS {ks} >= {threshold}", d.spec());
    }
}

#[test]
fn samples_are_positive_and_finite() {
    for d in catalog() {
        let mut rng = stream_rng(5);
        for _ in 0..100_000 {
            let x = d.sample(&mut rng);
            assert!(x.is_finite() && x > 0.0, "{}: {x}", d.spec());
        }
    }
}

#[test]
fn pareto_mean_by_quadrature() {
    // E X = int_0^inf (1 - F(x)) dx, substituting x = u / (1 - u).
    let d = Distribution::pareto(3.0).unwrap();
    let steps = 200_000;
    let h = 1.0 / steps as f64;
    let f = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let x = u / (1.0 - u);
        d.ccdf(x).unwrap() / (1.0 - u).powi(2)
    };
    let mut s = f(0.0) + f(1.0);
    for i in 1..steps {
        let u = i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(u);
    }
    let integral = s * h / 3.0;
    assert!((integral - 0.5).abs() < 1e-8, "{integral}");
    assert_eq!(d.mean(), 0.5);
}
