//! The strongest-direct-links heuristic.
//!
//! Only direct-link powers are used to pick the active set: sources are
//! ranked by `gamma_ii` and a prefix of the strongest is switched on. The
//! prefix length comes from the throughput function
//! `G(x) = x / (1 - F(beta mu x / 2))` (theorem mode), from the caller
//! (fixed mode), or from scanning every prefix (adaptive mode).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, TAIL_FLOOR};
use crate::error::{Error, Result};
use crate::network::{throughput_of_active, ActivationVector, Gains, ModelParams};

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_G_TOL: f64 = 1e-9;
const MAX_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 4000;

/// `G(x) = x / (1 - F(beta mu x / 2))` with `mu` the mean of `d`.
pub fn g_function(d: &Distribution, beta: f64, x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("G(x) needs x > 0, got {x}")));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let arg = beta * d.mean() * x / 2.0;
    let tail = d.ccdf(arg)?;
    if tail < TAIL_FLOOR {
        return Err(Error::TailUnderflow { x: arg, ccdf: tail });
    }
    Ok(x / tail)
}

/// `G` with tail underflow read as `+inf`; used only for root bracketing.
fn g_or_inf(d: &Distribution, beta: f64, x: f64) -> Result<f64> {
    match g_function(d, beta, x) {
        Err(Error::TailUnderflow { .. }) => Ok(f64::INFINITY),
        other => other,
    }
}

/// Solves `G(t) = n` to relative tolerance `tol`.
///
/// The bracket grows by doubling from `t = 1`; the root is then bisected.
pub fn g_inverse(d: &Distribution, beta: f64, n: f64, tol: f64) -> Result<f64> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::Domain(format!("G^-1(n) needs n >= 1, got {n}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut doublings = 0;
    while g_or_inf(d, beta, hi)? < n {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::NonConvergence(format!(
                "no bracket for G(t) = {n} after {MAX_DOUBLINGS} doublings"
            )));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let gm = g_or_inf(d, beta, mid)?;
        if ((gm - n) / n).abs() <= tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if gm < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence(format!(
        "bisection for G(t) = {n} stalled at t in [{lo}, {hi}] before reaching relative tolerance {tol}"
    )))
}

/// Indices ordered by ascending direct-link power, ties by index.
pub fn sort_direct_links<G: Gains + ?Sized>(g: &G) -> Vec<usize> {
    let direct = g.direct_gains();
    let mut perm: Vec<usize> = (0..g.n()).collect();
    perm.sort_by(|&a, &b| direct[a].total_cmp(&direct[b]).then(a.cmp(&b)));
    perm
}

/// `clamp(floor((1 - epsilon) t^(1 - delta)), 1, n)`.
pub fn active_count(t: f64, epsilon: f64, delta: f64, n: usize) -> usize {
    let raw = ((1.0 - epsilon) * t.powf(1.0 - delta)).floor();
    if raw.is_nan() || raw < 1.0 {
        1
    } else {
        (raw.min(n as f64) as usize).clamp(1, n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleMode {
    TheoremFaithful,
    AdaptivePrefix,
    FixedCount(usize),
}

impl ScheduleMode {
    pub fn name(&self) -> &'static str {
        match self {
            ScheduleMode::TheoremFaithful => "theorem",
            ScheduleMode::AdaptivePrefix => "adaptive",
            ScheduleMode::FixedCount(_) => "fixed",
        }
    }
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleMode::FixedCount(t) => write!(f, "fixed:{t}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for ScheduleMode {
    type Err = Error;

    /// Accepts `theorem`, `adaptive`, and `fixed:<t>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "theorem" => Ok(ScheduleMode::TheoremFaithful),
            "adaptive" => Ok(ScheduleMode::AdaptivePrefix),
            other => match other.strip_prefix("fixed:").map(str::parse) {
                Some(Ok(t)) => Ok(ScheduleMode::FixedCount(t)),
                _ => Err(Error::InvalidArgument(format!(
                    "unknown scheduler mode `{other}` (expected theorem, adaptive or fixed:<t>)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub mode: ScheduleMode,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            epsilon: DEFAULT_EPSILON,
            delta: DEFAULT_DELTA,
            mode: ScheduleMode::TheoremFaithful,
        }
    }
}

impl HeuristicConfig {
    pub fn with_mode(mode: ScheduleMode) -> Self {
        HeuristicConfig {
            mode,
            ..Default::default()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.epsilon) {
            return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !unit(self.delta) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if let ScheduleMode::FixedCount(t) = self.mode {
            if t < 1 || t > n {
                return Err(Error::Domain(format!("fixed count t must lie in [1, {n}], got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleResult {
    pub n: usize,
    pub mode: ScheduleMode,
    pub x: ActivationVector,
    /// Active receivers that succeed.
    pub success: ActivationVector,
    pub t_target: usize,
    pub t_realized: usize,
    /// Ascending by direct-link power.
    pub sorted_perm: Vec<usize>,
    /// `G^-1(n)` in theorem mode.
    pub g_inverse: Option<f64>,
}

/// The JSON record emitted for a schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSummary {
    pub n: usize,
    pub mode: String,
    pub t_target: usize,
    #[serde(rename = "T_realized")]
    pub t_realized: usize,
    pub all_succeeded: bool,
}

impl ScheduleResult {
    pub fn all_succeeded(&self) -> bool {
        self.t_realized == self.t_target
    }

    pub fn summary(&self) -> ScheduleSummary {
        ScheduleSummary {
            n: self.n,
            mode: self.mode.name().to_string(),
            t_target: self.t_target,
            t_realized: self.t_realized,
            all_succeeded: self.all_succeeded(),
        }
    }
}

fn top_prefix<G: Gains + ?Sized>(
    g: &G,
    p: &ModelParams,
    perm: Vec<usize>,
    t: usize,
    mode: ScheduleMode,
    g_inv: Option<f64>,
) -> Result<ScheduleResult> {
    let n = g.n();
    let mut active: Vec<usize> = perm[n - t..].to_vec();
    active.sort_unstable();
    let direct: Vec<f64> = active.iter().map(|&i| g.direct(i)).collect();
    let mut winners = Vec::new();
    for (a, &i) in active.iter().enumerate() {
        let interf = active
            .iter()
            .filter(|&&k| k != i)
            .fold(0.0, |acc, &k| acc + g.gain(k, i));
        if p.succeeds(direct[a], interf) {
            winners.push(i);
        }
    }
    Ok(ScheduleResult {
        n,
        mode,
        x: ActivationVector::from_indices(n, &active)?,
        success: ActivationVector::from_indices(n, &winners)?,
        t_target: t,
        t_realized: winners.len(),
        sorted_perm: perm,
        g_inverse: g_inv,
    })
}

/// Activates the `t_1` strongest pairs, `t_1` derived from `G^-1(n)`.
pub fn theorem_schedule<G: Gains + ?Sized>(
    g: &G,
    d: &Distribution,
    p: &ModelParams,
    cfg: &HeuristicConfig,
) -> Result<ScheduleResult> {
    if cfg.mode != ScheduleMode::TheoremFaithful {
        return Err(Error::InvalidArgument(format!(
            "theorem_schedule called with mode {}",
            cfg.mode
        )));
    }
    cfg.validate(g.n())?;
    let t = g_inverse(d, p.beta, g.n() as f64, DEFAULT_G_TOL)?;
    let t1 = active_count(t, cfg.epsilon, cfg.delta, g.n());
    top_prefix(g, p, sort_direct_links(g), t1, cfg.mode, Some(t))
}

/// Activates the `t` strongest pairs.
pub fn fixed_count_schedule<G: Gains + ?Sized>(g: &G, p: &ModelParams, t: usize) -> Result<ScheduleResult> {
    if t < 1 || t > g.n() {
        return Err(Error::Domain(format!("fixed count t must lie in [1, {}], got {t}", g.n())));
    }
    top_prefix(g, p, sort_direct_links(g), t, ScheduleMode::FixedCount(t), None)
}

/// Throughput of every strongest-first prefix: entry `j - 1` is the
/// throughput when the `j` strongest pairs are active.
///
/// Interference at a receiver only grows as the prefix lengthens, so each
/// receiver succeeds on one contiguous range of prefix lengths starting at
/// its own rank. The walk for a receiver stops as soon as its accumulated
/// interference rules it out, which keeps the scan far below `n^2` link
/// lookups on typical instances.
pub fn prefix_throughputs<G: Gains + ?Sized>(g: &G, p: &ModelParams, perm: &[usize]) -> Vec<usize> {
    let n = g.n();
    let order: Vec<usize> = perm.iter().rev().copied().collect();
    let mut rank = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos + 1;
    }
    let mut diff = vec![0i64; n + 2];
    for i in 0..n {
        let r = rank[i];
        let d = g.direct(i);
        let mut interf = 0.0;
        let mut death = n + 1;
        let mut alive = true;
        for (j, &src) in order.iter().enumerate().map(|(pos, s)| (pos + 1, s)) {
            if src != i {
                interf += g.gain(src, i);
            }
            if !p.succeeds(d, interf) {
                if j < r {
                    alive = false;
                } else {
                    death = j;
                }
                break;
            }
        }
        if alive && death > r {
            diff[r] += 1;
            diff[death] -= 1;
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut acc = 0i64;
    for j in 1..=n {
        acc += diff[j];
        out.push(acc as usize);
    }
    out
}

/// Scans all strongest-first prefixes and keeps the best (shortest on ties).
pub fn adaptive_prefix_schedule<G: Gains + ?Sized>(g: &G, p: &ModelParams) -> Result<ScheduleResult> {
    let perm = sort_direct_links(g);
    let curve = prefix_throughputs(g, p, &perm);
    let mut best_j = 1;
    for (idx, &t) in curve.iter().enumerate() {
        if t > curve[best_j - 1] {
            best_j = idx + 1;
        }
    }
    top_prefix(g, p, perm, best_j, ScheduleMode::AdaptivePrefix, None)
}

/// Dispatches on `cfg.mode`.
pub fn schedule<G: Gains + ?Sized>(
    g: &G,
    d: &Distribution,
    p: &ModelParams,
    cfg: &HeuristicConfig,
) -> Result<ScheduleResult> {
    match cfg.mode {
        ScheduleMode::TheoremFaithful => theorem_schedule(g, d, p, cfg),
        ScheduleMode::AdaptivePrefix => adaptive_prefix_schedule(g, p),
        ScheduleMode::FixedCount(t) => fixed_count_schedule(g, p, t),
    }
}

/// Throughput of the `j` strongest pairs, evaluated directly.
pub fn prefix_throughput<G: Gains + ?Sized>(g: &G, p: &ModelParams, perm: &[usize], j: usize) -> usize {
    let mut active = perm[perm.len() - j..].to_vec();
    active.sort_unstable();
    throughput_of_active(g, &active, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{throughput, ChannelMatrix};

    fn diag(values: &[f64]) -> ChannelMatrix {
        let n = values.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { values[i] } else { 0.01 }).collect())
            .collect();
        ChannelMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn t1_arithmetic() {
        assert_eq!(active_count(100.0, 0.1, 0.05, 1000), 71);
        assert_eq!(active_count(0.3, 0.1, 0.05, 1000), 1);
        assert_eq!(active_count(1e9, 0.1, 0.05, 50), 50);
    }

    #[test]
    fn sort_examples() {
        assert_eq!(sort_direct_links(&diag(&[5.0, 1.0, 3.0])), vec![1, 2, 0]);
        assert_eq!(sort_direct_links(&diag(&[1.0, 2.0, 3.0, 4.0])), vec![0, 1, 2, 3]);
        assert_eq!(sort_direct_links(&diag(&[2.0, 1.0, 2.0])), vec![1, 0, 2]);
    }

    #[test]
    fn pareto_closed_form_g() {
        let d = Distribution::pareto(3.0).unwrap();
        let g = g_function(&d, 2.0, 4.0).unwrap();
        assert!((g - 108.0).abs() < 1e-9, "{g}");
    }

    #[test]
    fn g_near_zero() {
        let d = Distribution::gamma(2.0, 1.0).unwrap();
        assert!(g_function(&d, 1.0, 1e-12).unwrap() < 1e-11);
        assert!(g_function(&d, 1.0, 0.0).is_err());
    }

    #[test]
    fn g_inverse_round_trip() {
        let catalog = [
            Distribution::gamma(1.0, 1.0).unwrap(),
            Distribution::gamma(4.0, 2.0).unwrap(),
            Distribution::weibull(2.0, 1.0).unwrap(),
            Distribution::weibull(0.3, 1.0).unwrap(),
            Distribution::pareto(3.0).unwrap(),
            Distribution::lognormal(0.0, 1.0).unwrap(),
        ];
        for d in &catalog {
            for n in [1.0, 10.0, 1e3, 1e6] {
                let t = g_inverse(d, 1.0, n, 1e-10).unwrap();
                let back = g_function(d, 1.0, t).unwrap();
                assert!(((back - n) / n).abs() <= 1e-10, "{} n={n}", d.spec());
            }
        }
    }

    #[test]
    fn g_inverse_rejects_small_n() {
        let d = Distribution::gamma(1.0, 1.0).unwrap();
        assert!(g_inverse(&d, 1.0, 0.5, 1e-9).is_err());
    }

    #[test]
    fn single_pair_schedules() {
        let m = ChannelMatrix::from_rows(vec![vec![2.0]]).unwrap();
        let d = Distribution::exponential(1.0).unwrap();
        let p = ModelParams::default();
        let r = theorem_schedule(&m, &d, &p, &HeuristicConfig::default()).unwrap();
        assert_eq!((r.t_target, r.t_realized), (1, 1));
        let r = adaptive_prefix_schedule(&m, &p).unwrap();
        assert_eq!((r.t_target, r.t_realized), (1, 1));
    }

    #[test]
    fn fixed_count_bounds() {
        let m = diag(&[1.0, 2.0]);
        let p = ModelParams::default();
        assert!(fixed_count_schedule(&m, &p, 0).is_err());
        assert!(fixed_count_schedule(&m, &p, 3).is_err());
        let r = fixed_count_schedule(&m, &p, 1).unwrap();
        assert_eq!(r.x.active_indices(), vec![1]);
    }

    #[test]
    fn prefix_curve_matches_direct_evaluation() {
        let p = ModelParams::new(1.0, 0.1).unwrap();
        for (k, d) in [
            Distribution::exponential(1.0).unwrap(),
            Distribution::pareto(2.5).unwrap(),
            Distribution::lognormal(0.0, 2.0).unwrap(),
        ]
        .iter()
        .enumerate()
        {
            for seed in 0..30 {
                let m = ChannelMatrix::generate(40, d, seed * 7 + k as u64).unwrap();
                let perm = sort_direct_links(&m);
                let curve = prefix_throughputs(&m, &p, &perm);
                for j in 1..=40 {
                    assert_eq!(curve[j - 1], prefix_throughput(&m, &p, &perm, j), "j={j}");
                }
            }
        }
    }

    #[test]
    fn result_fields_consistent() {
        let d = Distribution::gamma(1.0, 1.0).unwrap();
        let p = ModelParams::default();
        let m = ChannelMatrix::generate(64, &d, 4).unwrap();
        for mode in [
            ScheduleMode::TheoremFaithful,
            ScheduleMode::AdaptivePrefix,
            ScheduleMode::FixedCount(5),
        ] {
            let r = schedule(&m, &d, &p, &HeuristicConfig::with_mode(mode)).unwrap();
            assert_eq!(r.x.weight(), r.t_target);
            assert_eq!(throughput(&m, &r.x, &p).unwrap(), r.t_realized);
            assert_eq!(r.success.weight(), r.t_realized);
        }
    }

    #[test]
    fn mode_strings() {
        for s in ["theorem", "adaptive", "fixed:12"] {
            assert_eq!(s.parse::<ScheduleMode>().unwrap().to_string(), s);
        }
        assert!("fixed".parse::<ScheduleMode>().is_err());
        assert!("best".parse::<ScheduleMode>().is_err());
    }

    #[test]
    fn summary_json_fields() {
        let m = ChannelMatrix::from_rows(vec![vec![2.0]]).unwrap();
        let r = adaptive_prefix_schedule(&m, &ModelParams::default()).unwrap();
        let v = serde_json::to_value(r.summary()).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"n": 1, "mode": "adaptive", "t_target": 1, "T_realized": 1, "all_succeeded": true})
        );
    }
}
