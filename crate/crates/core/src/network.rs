//! Random-connection-model instances.
//!
//! Convention: `gain(i, j)` is the power from source `S_i` to destination
//! `D_j`; direct links sit on the diagonal. Receiver `D_i` sees interference
//! `sum_{k != i, x_k = 1} gain(k, i)`, i.e. column `i` of the matrix.
//!
//! Interference sums are always accumulated in ascending source index,
//! starting from `0.0`. Every evaluator in the crate that claims to agree
//! bit-for-bit with [`success_mask`] uses that same order.

use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, DistributionSpec};
use crate::error::{Error, Result};
use crate::rng::KeyedRng;

/// Largest pair count a dense matrix may be generated for.
pub const DENSE_LIMIT: usize = 30_000;

/// Largest pair count a lazy channel accepts.
pub const LAZY_LIMIT: usize = 1 << 26;

/// Read access to link powers.
pub trait Gains: Sync {
    fn n(&self) -> usize;

    /// Power from source `src` to destination `dst`.
    fn gain(&self, src: usize, dst: usize) -> f64;

    fn direct(&self, i: usize) -> f64 {
        self.gain(i, i)
    }

    fn direct_gains(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.direct(i)).collect()
    }
}

/// SINR threshold and noise power. Transmit power is fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub n0: f64,
}

impl ModelParams {
    pub fn new(beta: f64, n0: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        if !(n0.is_finite() && n0 > 0.0) {
            return Err(Error::Domain(format!("noise power n0 must be positive, got {n0}")));
        }
        Ok(ModelParams { beta, n0 })
    }

    /// `gamma_ii - beta * interference > beta * n0`, the linear form of
    /// `SINR_i > beta`.
    #[inline]
    pub fn succeeds(&self, direct: f64, interference: f64) -> bool {
        direct - self.beta * interference > self.beta * self.n0
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { beta: 1.0, n0: 0.1 }
    }
}

/// Where a generated instance came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dist: DistributionSpec,
    pub seed: u64,
}

/// The draw for link `(src, dst)` of the instance keyed by `seed`.
///
/// Each entry has its own generator keyed by its coordinates, so dense and
/// lazy channels built from the same seed agree entry for entry.
#[inline]
pub fn keyed_gain(dist: &Distribution, seed: u64, src: usize, dst: usize) -> f64 {
    dist.sample(&mut KeyedRng::for_entry(seed, src, dst))
}

/// Dense row-major `n x n` link powers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    n: usize,
    gains: Vec<f64>,
    provenance: Option<Provenance>,
}

impl ChannelMatrix {
    /// Draws all `n^2` link powers. Deterministic in `seed`.
    pub fn generate(n: usize, dist: &Distribution, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("instance needs n >= 1".into()));
        }
        if n > DENSE_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "dense instance with n = {n} exceeds the limit {DENSE_LIMIT}; use a lazy channel"
            )));
        }
        let mut gains = vec![0.0; n * n];
        gains.par_chunks_mut(n).enumerate().for_each(|(src, row)| {
            for (dst, g) in row.iter_mut().enumerate() {
                *g = keyed_gain(dist, seed, src, dst);
            }
        });
        Ok(ChannelMatrix {
            n,
            gains,
            provenance: Some(Provenance {
                dist: dist.spec(),
                seed,
            }),
        })
    }

    /// Same as [`ChannelMatrix::generate`] with the instance seed drawn from `rng`.
    pub fn generate_with<R: Rng + ?Sized>(n: usize, dist: &Distribution, rng: &mut R) -> Result<Self> {
        let seed = rng.random();
        Self::generate(n, dist, seed)
    }

    pub fn from_flat(n: usize, gains: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("instance needs n >= 1".into()));
        }
        if gains.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: gains.len(),
            });
        }
        if let Some(pos) = gains.iter().position(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::Domain(format!(
                "link power gain[{}][{}] = {} must be finite and strictly positive",
                pos / n,
                pos % n,
                gains[pos]
            )));
        }
        Ok(ChannelMatrix {
            n,
            gains,
            provenance: None,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: bad.len(),
            });
        }
        Self::from_flat(n, rows.into_iter().flatten().collect())
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn row(&self, src: usize) -> &[f64] {
        &self.gains[src * self.n..(src + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gains
    }
}

impl Gains for ChannelMatrix {
    #[inline]
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn gain(&self, src: usize, dst: usize) -> f64 {
        self.gains[src * self.n + dst]
    }
}

/// A channel whose entries are regenerated on demand from `(seed, src, dst)`.
///
/// Nothing is stored, so very large `n` can be scheduled as long as the
/// algorithm touches few cross links.
#[derive(Debug, Clone)]
pub struct LazyChannel {
    n: usize,
    dist: Distribution,
    seed: u64,
}

impl LazyChannel {
    pub fn new(n: usize, dist: Distribution, seed: u64) -> Result<Self> {
        if n == 0 || n > LAZY_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "lazy channel needs 1 <= n <= {LAZY_LIMIT}, got {n}"
            )));
        }
        Ok(LazyChannel { n, dist, seed })
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn materialize(&self) -> Result<ChannelMatrix> {
        ChannelMatrix::generate(self.n, &self.dist, self.seed)
    }
}

impl Gains for LazyChannel {
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn gain(&self, src: usize, dst: usize) -> f64 {
        keyed_gain(&self.dist, self.seed, src, dst)
    }
}

/// Binary on/off decision per source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActivationVector(Vec<bool>);

impl ActivationVector {
    pub fn zeros(n: usize) -> Self {
        ActivationVector(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        ActivationVector(vec![true; n])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        ActivationVector(bits)
    }

    /// Bit `i` of `bits` is `x_i`. Requires `n <= 64`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        assert!(n <= 64, "from_bits supports n <= 64");
        ActivationVector((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn from_indices(n: usize, active: &[usize]) -> Result<Self> {
        let mut x = Self::zeros(n);
        for &i in active {
            if i >= n {
                return Err(Error::InvalidArgument(format!("index {i} out of range for n = {n}")));
            }
            x.0[i] = true;
        }
        Ok(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, on: bool) {
        self.0[i] = on;
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn as_bools(&self) -> &[bool] {
        &self.0
    }

    /// Compares the numeric values of two equal-length bit patterns
    /// (`x_0` is the least significant bit).
    pub fn cmp_numeric(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0).rev() {
            match a.cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }

    /// `x_0 x_1 ... x_{n-1}` as a string of `0`/`1`.
    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

fn check_len<G: Gains + ?Sized>(g: &G, x: &ActivationVector) -> Result<()> {
    if x.len() != g.n() {
        return Err(Error::Dimension {
            expected: g.n(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Interference at receiver `i` from all other active sources.
pub fn interference<G: Gains + ?Sized>(g: &G, x: &ActivationVector, i: usize) -> f64 {
    (0..g.n())
        .filter(|&k| k != i && x.get(k))
        .fold(0.0, |acc, k| acc + g.gain(k, i))
}

pub fn sinr<G: Gains + ?Sized>(g: &G, x: &ActivationVector, i: usize, p: &ModelParams) -> Result<f64> {
    check_len(g, x)?;
    if i >= g.n() {
        return Err(Error::InvalidArgument(format!("receiver {i} out of range")));
    }
    if !x.get(i) {
        return Err(Error::InactiveReceiver(i));
    }
    Ok(g.direct(i) / (p.n0 + interference(g, x, i)))
}

/// Per-receiver success indicator. Inactive receivers never succeed.
pub fn success_mask<G: Gains + ?Sized>(g: &G, x: &ActivationVector, p: &ModelParams) -> Result<Vec<bool>> {
    check_len(g, x)?;
    Ok((0..g.n())
        .map(|i| x.get(i) && p.succeeds(g.direct(i), interference(g, x, i)))
        .collect())
}

/// Number of successful receivers.
pub fn throughput<G: Gains + ?Sized>(g: &G, x: &ActivationVector, p: &ModelParams) -> Result<usize> {
    check_len(g, x)?;
    Ok(throughput_of_active(g, &x.active_indices(), p))
}

/// Throughput of the activation whose active sources are `active`
/// (ascending). Touches only the `|active|^2` links among active pairs.
pub fn throughput_of_active<G: Gains + ?Sized>(g: &G, active: &[usize], p: &ModelParams) -> usize {
    debug_assert!(active.windows(2).all(|w| w[0] < w[1]));
    active
        .iter()
        .filter(|&&i| {
            let interf = active
                .iter()
                .filter(|&&k| k != i)
                .fold(0.0, |acc, &k| acc + g.gain(k, i));
            p.succeeds(g.direct(i), interf)
        })
        .count()
}

/// The reception constraints as `A x > b`.
///
/// Row `i` is receiver `D_i`'s constraint: `A[i][i] = gamma_ii` and
/// `A[i][j] = -beta * gamma_ji` for `j != i`; every `b_i = beta * n0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

pub fn build_linear_system<G: Gains + ?Sized>(g: &G, p: &ModelParams) -> LinearSystem {
    let n = g.n();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = if i == j { g.gain(i, i) } else { -p.beta * g.gain(j, i) };
        }
    }
    LinearSystem {
        n,
        a,
        b: vec![p.beta * p.n0; n],
    }
}

impl LinearSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `A x` for binary `x`.
    pub fn apply(&self, x: &ActivationVector) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| {
                (0..self.n)
                    .filter(|&j| x.get(j))
                    .fold(0.0, |acc, j| acc + self.a(i, j))
            })
            .collect())
    }

    /// Rows with `(A x)_i > b_i`.
    pub fn satisfied_rows(&self, x: &ActivationVector) -> Result<Vec<bool>> {
        Ok(self
            .apply(x)?
            .iter()
            .zip(&self.b)
            .map(|(lhs, rhs)| lhs > rhs)
            .collect())
    }

    /// Satisfied rows among active receivers; equals the throughput.
    pub fn satisfied_active_count(&self, x: &ActivationVector) -> Result<usize> {
        let rows = self.satisfied_rows(x)?;
        let mut count = 0;
        for (i, &ok) in rows.iter().enumerate() {
            if ok {
                // b > 0 and inactive rows have a nonpositive left side.
                assert!(x.get(i), "inactive row {i} satisfied");
                count += 1;
            }
        }
        Ok(count)
    }
}

/// Writes an instance as CSV: a `n,beta,n0,dist,seed` header line, the
/// matching value line, then `n` rows of `n` gains with 17 significant
/// digits. `dist` and `seed` are empty when the provenance is unknown.
pub fn write_instance<W: Write>(w: W, m: &ChannelMatrix, p: &ModelParams) -> Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
    out.write_record(["n", "beta", "n0", "dist", "seed"])?;
    let (dist, seed) = match m.provenance() {
        Some(pv) => (pv.dist.to_string(), pv.seed.to_string()),
        None => (String::new(), String::new()),
    };
    out.write_record([
        m.n().to_string(),
        p.beta.to_string(),
        p.n0.to_string(),
        dist,
        seed,
    ])?;
    for src in 0..m.n() {
        out.write_record(m.row(src).iter().map(|g| format!("{g:.16e}")))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_instance<R: Read>(r: R) -> Result<(ChannelMatrix, ModelParams)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(r);
    let mut records = rdr.records();
    let bad = |msg: &str| Error::Io(format!("instance csv: {msg}"));

    let header = records.next().ok_or_else(|| bad("empty file"))??;
    if header.iter().map(str::trim).collect::<Vec<_>>() != ["n", "beta", "n0", "dist", "seed"] {
        return Err(bad("header must be `n,beta,n0,dist,seed`"));
    }
    let meta = records.next().ok_or_else(|| bad("missing parameter line"))??;
    if meta.len() != 5 {
        return Err(bad("parameter line needs 5 fields"));
    }
    let n: usize = meta[0].trim().parse().map_err(|_| bad("bad n"))?;
    let beta: f64 = meta[1].trim().parse().map_err(|_| bad("bad beta"))?;
    let n0: f64 = meta[2].trim().parse().map_err(|_| bad("bad n0"))?;
    let provenance = match (meta[3].trim(), meta[4].trim()) {
        ("", "") => None,
        (d, s) => Some(Provenance {
            dist: d.parse()?,
            seed: s.parse().map_err(|_| bad("bad seed"))?,
        }),
    };

    let mut gains = Vec::with_capacity(n * n);
    for (row_idx, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != n {
            return Err(bad(&format!("row {row_idx} has {} entries, expected {n}", rec.len())));
        }
        for field in rec.iter() {
            gains.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| bad(&format!("bad gain `{field}` in row {row_idx}")))?,
            );
        }
    }
    let mut m = ChannelMatrix::from_flat(n, gains)?;
    m.provenance = provenance;
    Ok((m, ModelParams::new(beta, n0)?))
}
