//! Reference solvers for the optimal activation set.
//!
//! [`exhaustive_optimal`] and [`weight_bounded_search`] walk a depth-first
//! include/exclude tree over sources in ascending index order. Each level
//! owns an interference buffer, so every leaf sees interference sums
//! accumulated in exactly the order [`crate::network::throughput`] uses and
//! the two agree bit for bit. Ties are resolved towards the numerically
//! smallest bit pattern (`x_0` least significant), independent of visit
//! order.

use std::cmp::Ordering;
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{throughput_of_active, ActivationVector, Gains, ModelParams};

/// Default size limit for [`exhaustive_optimal`].
pub const DEFAULT_N_GUARD: usize = 24;

/// Hard ceiling on the exhaustive guard: the visit counter is 64-bit.
pub const MAX_N_GUARD: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Exhaustive,
    WeightBounded,
    Greedy,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Exhaustive => "exhaustive",
            SolverKind::WeightBounded => "weight-bounded",
            SolverKind::Greedy => "greedy",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best_x: ActivationVector,
    pub best_t: usize,
    /// Candidate activation vectors evaluated.
    pub explored: u64,
    pub elapsed: Duration,
    pub method: SolverKind,
}

/// Numeric order of two index sets given as ascending lists.
fn cmp_sets(a: &[usize], b: &[usize]) -> Ordering {
    let mut ia = a.iter().rev();
    let mut ib = b.iter().rev();
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) if x != y => return x.cmp(y),
            _ => {}
        }
    }
}

struct Search<'a, G: Gains + ?Sized> {
    g: &'a G,
    p: &'a ModelParams,
    n: usize,
    w_max: usize,
    direct: Vec<f64>,
    /// `bufs[d]` holds interference at every receiver from the sources
    /// chosen before depth `d`.
    bufs: Vec<Vec<f64>>,
    active: Vec<usize>,
    best: Vec<usize>,
    best_t: usize,
    explored: u64,
}

impl<G: Gains + ?Sized> Search<'_, G> {
    fn run(&mut self, depth: usize, buf_level: usize) {
        if depth == self.n || self.active.len() == self.w_max {
            self.leaf(buf_level);
            return;
        }
        self.run(depth + 1, buf_level);

        let k = depth;
        let (lower, upper) = self.bufs.split_at_mut(buf_level + 1);
        let src = &lower[buf_level];
        let dst = &mut upper[0];
        for i in 0..self.n {
            dst[i] = if i == k { src[i] } else { src[i] + self.g.gain(k, i) };
        }
        self.active.push(k);
        self.run(depth + 1, buf_level + 1);
        self.active.pop();
    }

    fn leaf(&mut self, buf_level: usize) {
        self.explored += 1;
        let buf = &self.bufs[buf_level];
        let t = self
            .active
            .iter()
            .filter(|&&i| self.p.succeeds(self.direct[i], buf[i]))
            .count();
        let better = match t.cmp(&self.best_t) {
            Ordering::Greater => true,
            Ordering::Equal => cmp_sets(&self.active, &self.best) == Ordering::Less,
            Ordering::Less => false,
        };
        if better {
            self.best_t = t;
            self.best.clone_from(&self.active);
        }
    }
}

fn bounded_search<G: Gains + ?Sized>(g: &G, p: &ModelParams, w_max: usize, method: SolverKind) -> Result<SolveResult> {
    let start = Instant::now();
    let n = g.n();
    let levels = w_max.min(n) + 1;
    let mut s = Search {
        g,
        p,
        n,
        w_max,
        direct: g.direct_gains(),
        bufs: vec![vec![0.0; n]; levels],
        active: Vec::with_capacity(levels),
        best: Vec::new(),
        best_t: 0,
        explored: 0,
    };
    s.run(0, 0);
    let best_x = ActivationVector::from_indices(n, &s.best)?;
    debug_assert_eq!(throughput_of_active(g, &s.best, p), s.best_t);
    Ok(SolveResult {
        best_x,
        best_t: s.best_t,
        explored: s.explored,
        elapsed: start.elapsed(),
        method,
    })
}

/// Maximum throughput over all `2^n` activation vectors.
pub fn exhaustive_optimal<G: Gains + ?Sized>(g: &G, p: &ModelParams, n_guard: usize) -> Result<SolveResult> {
    let guard = n_guard.min(MAX_N_GUARD);
    if g.n() > guard {
        return Err(Error::GuardExceeded { n: g.n(), guard });
    }
    bounded_search(g, p, g.n(), SolverKind::Exhaustive)
}

/// Maximum throughput over activation vectors with at most `w_max` ones.
pub fn weight_bounded_search<G: Gains + ?Sized>(g: &G, p: &ModelParams, w_max: usize) -> Result<SolveResult> {
    if w_max > g.n() {
        return Err(Error::InvalidArgument(format!(
            "w_max = {w_max} exceeds n = {}",
            g.n()
        )));
    }
    bounded_search(g, p, w_max, SolverKind::WeightBounded)
}

/// `ceil(log2 n)`, at least 1.
pub fn default_wmax(n: usize) -> usize {
    let bits = usize::BITS - n.saturating_sub(1).leading_zeros();
    (bits as usize).max(1).min(n.max(1))
}

/// `sum_{i=0}^{w_max} C(n, i)`, exactly.
pub fn search_space_size(n: u64, w_max: u64) -> Result<BigUint> {
    if w_max > n {
        return Err(Error::InvalidArgument(format!("w_max = {w_max} exceeds n = {n}")));
    }
    let mut term = BigUint::one();
    let mut total = BigUint::zero();
    for i in 0..=w_max {
        if i > 0 {
            term = term * (n - i + 1) / i;
        }
        total += &term;
    }
    Ok(total)
}

/// `log2` of `log2(n) * 2^(log2(n)^2)`, an upper bound on the number of
/// nonempty activation sets with at most `log2 n` members (`n >= 4`).
pub fn search_space_bound_log2(n: f64) -> f64 {
    let l = n.log2();
    l.log2() + l * l
}

/// Starts from the empty set and keeps adding the source that yields the
/// largest throughput, lowest index first on ties, while that strictly
/// improves on the current throughput.
pub fn greedy_insertion<G: Gains + ?Sized>(g: &G, p: &ModelParams) -> Result<SolveResult> {
    let start = Instant::now();
    let n = g.n();
    let direct = g.direct_gains();
    let mut chosen = vec![false; n];
    let mut members: Vec<usize> = Vec::new();
    let mut interf = vec![0.0; n];
    let mut current = 0usize;
    let mut explored = 0u64;

    loop {
        let mut best: Option<(usize, usize)> = None;
        for c in (0..n).filter(|&c| !chosen[c]) {
            explored += 1;
            let mut t = usize::from(p.succeeds(direct[c], interf[c]));
            for &i in &members {
                t += usize::from(p.succeeds(direct[i], interf[i] + g.gain(c, i)));
            }
            if best.is_none_or(|(_, bt)| t > bt) {
                best = Some((c, t));
            }
        }
        match best {
            Some((c, t)) if t > current => {
                chosen[c] = true;
                members.push(c);
                for (i, v) in interf.iter_mut().enumerate() {
                    if i != c {
                        *v += g.gain(c, i);
                    }
                }
                current = t;
            }
            _ => break,
        }
    }

    members.sort_unstable();
    let best_t = throughput_of_active(g, &members, p);
    Ok(SolveResult {
        best_x: ActivationVector::from_indices(n, &members)?,
        best_t,
        explored,
        elapsed: start.elapsed(),
        method: SolverKind::Greedy,
    })
}
