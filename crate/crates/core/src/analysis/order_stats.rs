use rayon::prelude::*;
use serde::Serialize;

use super::ks::{ks_statistic, standard_normal_cdf};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::rng::{child_seed, stream_rng};

pub const OS_MIN_REPS: usize = 100;

/// Centering and scaling for the `(n - i + 1)`-th order statistic of `n`
/// draws: `a_n = F^-1(1 - i/n)` (solved on the upper tail), and
/// `b_n = sqrt(i) / (n f(a_n))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FalkNormalizers {
    pub n: u64,
    pub i: u64,
    pub a_n: f64,
    pub b_n: f64,
}

impl FalkNormalizers {
    /// `a_n / b_n`; taken as 1 when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.a_n == 0.0 && self.b_n == 0.0 {
            1.0
        } else {
            self.a_n / self.b_n
        }
    }
}

pub fn falk_normalizers(d: &Distribution, n: u64, i: u64) -> Result<FalkNormalizers> {
    if i < 1 || i > n {
        return Err(Error::InvalidArgument(format!("need 1 <= i <= n, got i = {i}, n = {n}")));
    }
    let tail = i as f64 / n as f64;
    let a_n = d.upper_quantile(tail)?;
    let f = d.pdf(a_n)?;
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::DensityUnderflow { x: a_n, pdf: f });
    }
    let b_n = (i as f64).sqrt() / (n as f64 * f);
    Ok(FalkNormalizers { n, i, a_n, b_n })
}

/// The intermediate rank `ceil(sqrt(n))`.
pub fn sqrt_rule(n: usize) -> usize {
    let mut i = (n as f64).sqrt().ceil() as usize;
    while i > 1 && (i - 1) * (i - 1) >= n {
        i -= 1;
    }
    while i * i < n {
        i += 1;
    }
    i
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStatExperiment {
    pub normalizers: FalkNormalizers,
    /// `(X_(n-i+1) - a_n) / b_n`, one per repetition.
    pub samples: Vec<f64>,
    /// KS distance of `samples` to the standard normal.
    pub ks: f64,
}

/// Draws `reps` samples of size `n`, normalizes the `(n - i + 1)`-th order
/// statistic, and measures its distance to the standard normal law.
pub fn intermediate_os_experiment<R: Fn(usize) -> usize>(
    d: &Distribution,
    n: usize,
    i_rule: R,
    reps: usize,
    seed: u64,
) -> Result<OrderStatExperiment> {
    if reps < OS_MIN_REPS {
        return Err(Error::InvalidArgument(format!(
            "order-statistic experiment needs reps >= {OS_MIN_REPS}, got {reps}"
        )));
    }
    let i = i_rule(n);
    let norm = falk_normalizers(d, n as u64, i as u64)?;
    let samples: Vec<f64> = (0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, rep| {
                let mut rng = stream_rng(child_seed(seed, n as u64, rep as u64));
                for v in buf.iter_mut() {
                    *v = d.sample(&mut rng);
                }
                let (_, x, _) = buf.select_nth_unstable_by(n - i, f64::total_cmp);
                (*x - norm.a_n) / norm.b_n
            },
        )
        .collect();
    let ks = ks_statistic(&samples, standard_normal_cdf)?;
    Ok(OrderStatExperiment {
        normalizers: norm,
        samples,
        ks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_closed_forms() {
        let d = Distribution::exponential(1.0).unwrap();
        let f = falk_normalizers(&d, 10_000, 100).unwrap();
        assert!((f.a_n - 100f64.ln()).abs() < 1e-12);
        assert!((f.b_n - 0.1).abs() < 1e-12);
    }

    #[test]
    fn top_rank_at_origin() {
        for d in [
            Distribution::pareto(3.0).unwrap(),
            Distribution::weibull(1.0, 1.0).unwrap(),
            Distribution::exponential(2.0).unwrap(),
        ] {
            assert_eq!(falk_normalizers(&d, 50, 50).unwrap().a_n, 0.0);
        }
        // a density vanishing at the origin cannot normalize i = n
        let g = Distribution::gamma(3.0, 1.0).unwrap();
        assert!(matches!(
            falk_normalizers(&g, 50, 50),
            Err(Error::DensityUnderflow { .. })
        ));
    }

    #[test]
    fn rank_out_of_range() {
        let d = Distribution::exponential(1.0).unwrap();
        assert!(falk_normalizers(&d, 10, 0).is_err());
        assert!(falk_normalizers(&d, 10, 11).is_err());
    }

    #[test]
    fn sqrt_rule_values() {
        assert_eq!(sqrt_rule(1), 1);
        assert_eq!(sqrt_rule(16), 4);
        assert_eq!(sqrt_rule(17), 5);
        assert_eq!(sqrt_rule(100_000), 317);
    }

    #[test]
    fn too_few_reps() {
        let d = Distribution::exponential(1.0).unwrap();
        assert!(intermediate_os_experiment(&d, 100, sqrt_rule, 0, 1).is_err());
        assert!(intermediate_os_experiment(&d, 100, sqrt_rule, 99, 1).is_err());
    }

    #[test]
    fn reproducible() {
        let d = Distribution::exponential(1.0).unwrap();
        let a = intermediate_os_experiment(&d, 500, sqrt_rule, 100, 9).unwrap();
        let b = intermediate_os_experiment(&d, 500, sqrt_rule, 100, 9).unwrap();
        assert_eq!(a, b);
    }
}
