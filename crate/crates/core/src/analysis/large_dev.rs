use rayon::prelude::*;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::rng::{child_seed, stream_rng};

pub const LDP_MIN_REPS: usize = 1000;
const CHUNK: usize = 4096;

/// Monte Carlo estimate of `P{(X_1 + ... + X_t) / t >= K mu}`.
///
/// Repetitions are split into fixed chunks, each with its own child seed,
/// so the estimate does not depend on the worker count.
pub fn ldp_tail_experiment(d: &Distribution, t: usize, k: f64, reps: usize, seed: u64) -> Result<f64> {
    if t < 1 {
        return Err(Error::InvalidArgument("sum length t must be >= 1".into()));
    }
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::Domain(format!("deviation factor K must exceed 1, got {k}")));
    }
    if reps < LDP_MIN_REPS {
        return Err(Error::InvalidArgument(format!(
            "large-deviation experiment needs reps >= {LDP_MIN_REPS}, got {reps}"
        )));
    }
    let threshold = k * d.mean() * t as f64;
    let chunks = reps.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(child_seed(seed, t as u64, c as u64));
            let len = CHUNK.min(reps - c * CHUNK);
            let mut hits = 0u64;
            for _ in 0..len {
                let mut sum = 0.0;
                for _ in 0..t {
                    sum += d.sample(&mut rng);
                }
                if sum >= threshold {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(hits as f64 / reps as f64)
}

/// `t P{X > t mu (K - 1)}`: the probability that one summand alone
/// carries the whole excess.
pub fn single_jump_tail(d: &Distribution, t: usize, k: f64) -> Result<f64> {
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::Domain(format!("deviation factor K must exceed 1, got {k}")));
    }
    Ok(t as f64 * d.ccdf(t as f64 * d.mean() * (k - 1.0))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unreachable_threshold() {
        let d = Distribution::exponential(1.0).unwrap();
        assert_eq!(ldp_tail_experiment(&d, 10, 1e6, 2000, 1).unwrap(), 0.0);
    }

    #[test]
    fn argument_checks() {
        let d = Distribution::exponential(1.0).unwrap();
        assert!(ldp_tail_experiment(&d, 0, 1.5, 2000, 1).is_err());
        assert!(ldp_tail_experiment(&d, 10, 1.0, 2000, 1).is_err());
        assert!(ldp_tail_experiment(&d, 10, 1.5, 999, 1).is_err());
    }

    #[test]
    fn single_summand_matches_tail() {
        // t = 1: the event is X >= K mu exactly.
        let d = Distribution::exponential(1.0).unwrap();
        let p = ldp_tail_experiment(&d, 1, 2.0, 200_000, 3).unwrap();
        let exact = (-2.0f64).exp();
        let se = (exact * (1.0 - exact) / 200_000.0).sqrt();
        assert!((p - exact).abs() < 5.0 * se, "{p} vs {exact}");
    }

    #[test]
    fn single_jump_pareto() {
        let d = Distribution::pareto(3.0).unwrap();
        // t = 2, mu = 1/2, K = 3: 2 * (1 + 2)^-3
        let v = single_jump_tail(&d, 2, 3.0).unwrap();
        assert!((v - 2.0 / 27.0).abs() < 1e-15);
    }
}
