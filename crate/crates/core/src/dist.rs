//! Channel-power distributions.
//!
//! The catalog holds the four laws the throughput results are stated for:
//! Gamma (Nakagami-m fading, with the exponential/Rayleigh case at m = 1),
//! Weibull, the generalized Pareto law `F(x) = 1 - (1 + x)^-alpha`, and the
//! log-normal. Every member is defined on `x >= 0`.
//!
//! Spec strings take the form `kind:key=value,...`:
//!
//! ```text
//! gamma:m=2,omega=1
//! weibull:k=0.4,lambda=1
//! pareto:alpha=3
//! lognormal:mu=0,sigma=1
//! exponential:omega=1      (alias for gamma with m = 1)
//! ```

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Smallest upper-tail mass treated as representable.
pub const TAIL_FLOOR: f64 = 1e-300;

/// Parameters of a catalog distribution, as written in a spec string.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec {
    /// Shape `m`, mean `omega`.
    Gamma { m: f64, omega: f64 },
    /// Shape `k`, scale `lambda`.
    Weibull { k: f64, lambda: f64 },
    /// Tail index `alpha > 2`.
    Pareto { alpha: f64 },
    /// `ln X ~ N(mu_log, sigma^2)`.
    #[serde(rename = "lognormal")]
    LogNormal { mu_log: f64, sigma: f64 },
}

impl DistributionSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            DistributionSpec::Gamma { .. } => "gamma",
            DistributionSpec::Weibull { .. } => "weibull",
            DistributionSpec::Pareto { .. } => "pareto",
            DistributionSpec::LogNormal { .. } => "lognormal",
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistributionSpec::Gamma { m, omega } => write!(f, "gamma:m={m},omega={omega}"),
            DistributionSpec::Weibull { k, lambda } => write!(f, "weibull:k={k},lambda={lambda}"),
            DistributionSpec::Pareto { alpha } => write!(f, "pareto:alpha={alpha}"),
            DistributionSpec::LogNormal { mu_log, sigma } => {
                write!(f, "lognormal:mu={mu_log},sigma={sigma}")
            }
        }
    }
}

fn take_param(
    kind: &str,
    params: &mut Vec<(String, f64)>,
    key: &str,
    default: Option<f64>,
) -> Result<f64> {
    match params.iter().position(|(k, _)| k == key) {
        Some(pos) => Ok(params.remove(pos).1),
        None => default
            .ok_or_else(|| Error::Parse(format!("missing parameter `{key}` for `{kind}`"))),
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k.trim().to_ascii_lowercase(), r),
            None => (s.to_ascii_lowercase(), ""),
        };

        let mut params: Vec<(String, f64)> = Vec::new();
        for token in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed parameter token `{token}`")))?;
            let key = key.trim().to_ascii_lowercase();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number in token `{token}`")))?;
            if params.iter().any(|(k, _)| *k == key) {
                return Err(Error::Parse(format!("duplicate parameter in token `{token}`")));
            }
            params.push((key, value));
        }

        let spec = match kind.as_str() {
            "gamma" | "nakagami" => DistributionSpec::Gamma {
                m: take_param(&kind, &mut params, "m", None)?,
                omega: take_param(&kind, &mut params, "omega", None)?,
            },
            "exponential" | "exp" | "rayleigh" => DistributionSpec::Gamma {
                m: 1.0,
                omega: take_param(&kind, &mut params, "omega", Some(1.0))?,
            },
            "weibull" => DistributionSpec::Weibull {
                k: take_param(&kind, &mut params, "k", None)?,
                lambda: take_param(&kind, &mut params, "lambda", None)?,
            },
            "pareto" | "gpareto" => DistributionSpec::Pareto {
                alpha: take_param(&kind, &mut params, "alpha", None)?,
            },
            "lognormal" => DistributionSpec::LogNormal {
                mu_log: take_param(&kind, &mut params, "mu", None)?,
                sigma: take_param(&kind, &mut params, "sigma", None)?,
            },
            other => return Err(Error::Parse(format!("unknown distribution kind `{other}`"))),
        };
        if let Some((key, value)) = params.first() {
            return Err(Error::Parse(format!(
                "unknown parameter `{key}={value}` for `{kind}`"
            )));
        }
        Ok(spec)
    }
}

/// Light/heavy tail split used by the throughput theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailKind {
    /// Cramer's condition holds (non-heavy-tailed).
    SuperExponential,
    /// Sub-exponential (heavy-tailed).
    HeavyTailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeavySubtype {
    RegularlyVarying,
    LogNormalType,
    WeibullLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailClass {
    pub class: TailKind,
    pub ht_subtype: Option<HeavySubtype>,
    /// False for laws outside the cases the lower-bound theorem covers
    /// (Weibull with `0.5 <= k < 1`).
    pub theorem_coverage: bool,
}

#[derive(Debug, Clone)]
enum Law {
    Gamma {
        m: f64,
        omega: f64,
        ln_gamma_m: f64,
        sampler: rand_distr::Gamma<f64>,
    },
    Weibull {
        k: f64,
        lambda: f64,
    },
    Pareto {
        alpha: f64,
    },
    LogNormal {
        mu_log: f64,
        sigma: f64,
    },
}

/// A validated catalog distribution. Immutable and cheap to clone.
#[derive(Debug, Clone)]
pub struct Distribution {
    spec: DistributionSpec,
    law: Law,
    mean: f64,
}

impl PartialEq for Distribution {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} must be a finite positive number, got {v}")))
    }
}

impl Distribution {
    pub fn new(spec: DistributionSpec) -> Result<Self> {
        let (law, mean) = match spec {
            DistributionSpec::Gamma { m, omega } => {
                let m = positive("gamma shape m", m)?;
                let omega = positive("gamma omega", omega)?;
                let sampler = rand_distr::Gamma::new(m, omega / m)
                    .map_err(|e| Error::Domain(format!("gamma: {e}")))?;
                (
                    Law::Gamma {
                        m,
                        omega,
                        ln_gamma_m: ln_gamma(m),
                        sampler,
                    },
                    omega,
                )
            }
            DistributionSpec::Weibull { k, lambda } => {
                let k = positive("weibull shape k", k)?;
                let lambda = positive("weibull scale lambda", lambda)?;
                (Law::Weibull { k, lambda }, lambda * gamma(1.0 + 1.0 / k))
            }
            DistributionSpec::Pareto { alpha } => {
                if !(alpha.is_finite() && alpha > 2.0) {
                    return Err(Error::Domain(format!(
                        "pareto tail index must satisfy alpha > 2 (finite-variance, regularly varying tail), got {alpha}"
                    )));
                }
                (Law::Pareto { alpha }, 1.0 / (alpha - 1.0))
            }
            DistributionSpec::LogNormal { mu_log, sigma } => {
                if !mu_log.is_finite() {
                    return Err(Error::Domain(format!("lognormal mu must be finite, got {mu_log}")));
                }
                let sigma = positive("lognormal sigma", sigma)?;
                (
                    Law::LogNormal { mu_log, sigma },
                    (mu_log + 0.5 * sigma * sigma).exp(),
                )
            }
        };
        Ok(Distribution { spec, law, mean })
    }

    pub fn gamma(m: f64, omega: f64) -> Result<Self> {
        Self::new(DistributionSpec::Gamma { m, omega })
    }

    pub fn exponential(omega: f64) -> Result<Self> {
        Self::gamma(1.0, omega)
    }

    pub fn weibull(k: f64, lambda: f64) -> Result<Self> {
        Self::new(DistributionSpec::Weibull { k, lambda })
    }

    pub fn pareto(alpha: f64) -> Result<Self> {
        Self::new(DistributionSpec::Pareto { alpha })
    }

    pub fn lognormal(mu_log: f64, sigma: f64) -> Result<Self> {
        Self::new(DistributionSpec::LogNormal { mu_log, sigma })
    }

    pub fn spec(&self) -> DistributionSpec {
        self.spec
    }

    /// Channel mean `E[gamma]`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        match self.law {
            Law::Gamma { m, omega, .. } => omega * omega / m,
            Law::Weibull { k, lambda } => {
                let g1 = gamma(1.0 + 1.0 / k);
                lambda * lambda * (gamma(1.0 + 2.0 / k) - g1 * g1)
            }
            Law::Pareto { alpha } => alpha / ((alpha - 1.0).powi(2) * (alpha - 2.0)),
            Law::LogNormal { mu_log, sigma } => {
                let s2 = sigma * sigma;
                s2.exp_m1() * (2.0 * mu_log + s2).exp()
            }
        }
    }

    fn check_support(x: f64) -> Result<()> {
        if x >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("channel power must be >= 0, got {x}")))
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Self::check_support(x)?;
        let v = match self.law {
            Law::Gamma {
                m,
                omega,
                ln_gamma_m,
                ..
            } => {
                if x == 0.0 {
                    edge_density(m, m / omega)
                } else {
                    ((m - 1.0) * x.ln() - m * x / omega - ln_gamma_m + m * (m / omega).ln()).exp()
                }
            }
            Law::Weibull { k, lambda } => {
                if x == 0.0 {
                    edge_density(k, 1.0 / lambda)
                } else {
                    let z = x / lambda;
                    (k / lambda) * z.powf(k - 1.0) * (-z.powf(k)).exp()
                }
            }
            Law::Pareto { alpha } => alpha * (-(alpha + 1.0) * x.ln_1p()).exp(),
            Law::LogNormal { mu_log, sigma } => {
                if x == 0.0 {
                    0.0
                } else {
                    let z = (x.ln() - mu_log) / sigma;
                    (-0.5 * z * z).exp() / (x * sigma * (2.0 * std::f64::consts::PI).sqrt())
                }
            }
        };
        Ok(v)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Self::check_support(x)?;
        let v = match self.law {
            Law::Gamma { m, omega, .. } => {
                if x == 0.0 {
                    0.0
                } else {
                    gamma_lr(m, m * x / omega)
                }
            }
            Law::Weibull { k, lambda } => -(-(x / lambda).powf(k)).exp_m1(),
            Law::Pareto { alpha } => -(-alpha * x.ln_1p()).exp_m1(),
            Law::LogNormal { mu_log, sigma } => {
                if x == 0.0 {
                    0.0
                } else {
                    0.5 * erfc(-(x.ln() - mu_log) / (sigma * std::f64::consts::SQRT_2))
                }
            }
        };
        Ok(v)
    }

    /// Upper tail `1 - F(x)`, evaluated without cancellation.
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        Self::check_support(x)?;
        let v = match self.law {
            Law::Gamma { m, omega, .. } => {
                if x == 0.0 {
                    1.0
                } else {
                    gamma_ur(m, m * x / omega)
                }
            }
            Law::Weibull { k, lambda } => (-(x / lambda).powf(k)).exp(),
            Law::Pareto { alpha } => (-alpha * x.ln_1p()).exp(),
            Law::LogNormal { mu_log, sigma } => {
                if x == 0.0 {
                    1.0
                } else {
                    0.5 * erfc((x.ln() - mu_log) / (sigma * std::f64::consts::SQRT_2))
                }
            }
        };
        Ok(v)
    }

    /// Inverse of the cdf on `[0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "quantile needs 0 <= p < 1 (F^-1(1) is unbounded), got {p}"
            )));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        Ok(match self.law {
            Law::Weibull { k, lambda } => lambda * (-(-p).ln_1p()).powf(1.0 / k),
            Law::Pareto { alpha } => (-(-p).ln_1p() / alpha).exp_m1(),
            Law::Gamma { omega, .. } => self.bisect_quantile(p, omega)?,
            Law::LogNormal { mu_log, .. } => self.bisect_quantile(p, mu_log.exp())?,
        })
    }

    /// Inverse of the upper tail on `(0, 1]`: the `x` with `1 - F(x) = q`.
    /// Accurate for tiny `q`, where `quantile(1 - q)` loses digits.
    pub fn upper_quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::Domain(format!("upper quantile needs 0 < q <= 1, got {q}")));
        }
        if q == 1.0 {
            return Ok(0.0);
        }
        Ok(match self.law {
            Law::Weibull { k, lambda } => lambda * (-q.ln()).powf(1.0 / k),
            Law::Pareto { alpha } => (-q.ln() / alpha).exp_m1(),
            Law::Gamma { omega, .. } => self.bisect(true, q, omega)?,
            Law::LogNormal { mu_log, .. } => self.bisect(true, q, mu_log.exp())?,
        })
    }

    /// Bracketed bisection on the cdf (or on the upper tail when `p > 1/2`,
    /// where `1 - p` is exact and the tail carries full relative precision).
    fn bisect_quantile(&self, p: f64, scale: f64) -> Result<f64> {
        if p > 0.5 {
            self.bisect(true, 1.0 - p, scale)
        } else {
            self.bisect(false, p, scale)
        }
    }

    /// Solves `1 - F(x) = target` when `upper`, else `F(x) = target`.
    fn bisect(&self, upper: bool, target: f64, scale: f64) -> Result<f64> {
        let below = |x: f64| -> Result<bool> {
            Ok(if upper {
                self.ccdf(x)? > target
            } else {
                self.cdf(x)? < target
            })
        };

        let mut lo = 0.0;
        let mut hi = scale * 1e6;
        let mut expansions = 0;
        while below(hi)? {
            lo = hi;
            hi *= 2.0;
            expansions += 1;
            if expansions > 2000 || !hi.is_finite() {
                return Err(Error::NonConvergence(format!(
                    "quantile bracket for target {target} could not be expanded"
                )));
            }
        }
        for _ in 0..2200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let err = |x: f64| -> Result<f64> {
            Ok(if upper {
                (self.ccdf(x)? - target).abs()
            } else {
                (self.cdf(x)? - target).abs()
            })
        };
        Ok(if err(lo)? < err(hi)? { lo } else { hi })
    }

    /// Hazard rate `f(x) / (1 - F(x))`.
    pub fn hazard(&self, x: f64) -> Result<f64> {
        let tail = self.ccdf(x)?;
        if tail < TAIL_FLOOR {
            return Err(Error::TailUnderflow { x, ccdf: tail });
        }
        Ok(self.pdf(x)? / tail)
    }

    /// Maps a uniform variate through the closed-form quantile. Only the
    /// inverse-transform families (Weibull, Pareto) have one.
    pub fn inverse_transform(&self, u: f64) -> Option<f64> {
        match self.law {
            Law::Weibull { k, lambda } => Some(lambda * (-(-u).ln_1p()).powf(1.0 / k)),
            Law::Pareto { alpha } => Some((-(-u).ln_1p() / alpha).exp_m1()),
            _ => None,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.law {
            Law::Gamma { sampler, .. } => sampler.sample(rng),
            Law::Weibull { k, lambda } => {
                let u: f64 = rng.sample(Open01);
                lambda * (-(-u).ln_1p()).powf(1.0 / k)
            }
            Law::Pareto { alpha } => {
                let u: f64 = rng.sample(Open01);
                (-(-u).ln_1p() / alpha).exp_m1()
            }
            Law::LogNormal { mu_log, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu_log + sigma * z).exp()
            }
        }
    }

    /// One draw, strictly positive. A zero produced by floating-point
    /// underflow is discarded and redrawn.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = self.draw(rng);
            if x > 0.0 && x.is_finite() {
                return x;
            }
        }
    }

    pub fn tail_class(&self) -> TailClass {
        match self.law {
            Law::Gamma { .. } => TailClass {
                class: TailKind::SuperExponential,
                ht_subtype: None,
                theorem_coverage: true,
            },
            Law::Weibull { k, .. } if k >= 1.0 => TailClass {
                class: TailKind::SuperExponential,
                ht_subtype: None,
                theorem_coverage: true,
            },
            Law::Weibull { k, .. } => TailClass {
                class: TailKind::HeavyTailed,
                ht_subtype: Some(HeavySubtype::WeibullLike),
                theorem_coverage: k < 0.5,
            },
            Law::Pareto { .. } => TailClass {
                class: TailKind::HeavyTailed,
                ht_subtype: Some(HeavySubtype::RegularlyVarying),
                theorem_coverage: true,
            },
            Law::LogNormal { .. } => TailClass {
                class: TailKind::HeavyTailed,
                ht_subtype: Some(HeavySubtype::LogNormalType),
                theorem_coverage: true,
            },
        }
    }

    /// Every catalog member satisfies the hazard-rate regularity conditions
    /// analytically; this is static metadata, see
    /// [`Distribution::condition_set1_diagnostic`] for a numerical look.
    pub fn satisfies_condition_set1(&self) -> bool {
        true
    }

    /// Evaluates `x h(x)` and a central-difference derivative of `1/h(x)` on
    /// an increasing grid and summarizes their trends.
    pub fn condition_set1_diagnostic(&self, grid: &[f64]) -> Result<ConditionSet1Report> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("diagnostic grid is empty".into()));
        }
        if grid.iter().any(|&x| !(x > 0.0 && x.is_finite()))
            || grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidArgument(
                "diagnostic grid must be positive and strictly increasing".into(),
            ));
        }
        let mut points = Vec::with_capacity(grid.len());
        for &x in grid {
            let h = self.hazard(x)?;
            let step = x * 1e-5;
            let up = 1.0 / self.hazard(x + step)?;
            let down = 1.0 / self.hazard(x - step)?;
            points.push(HazardPoint {
                x,
                x_hazard: x * h,
                inv_hazard_slope: (up - down) / (2.0 * step),
            });
        }
        let x_hazard_settles = points
            .windows(3)
            .all(|w| (w[2].x_hazard - w[1].x_hazard).abs() <= (w[1].x_hazard - w[0].x_hazard).abs());
        let inv_hazard_slope_to_zero = points
            .windows(2)
            .all(|w| w[1].inv_hazard_slope.abs() <= w[0].inv_hazard_slope.abs());
        Ok(ConditionSet1Report {
            points,
            x_hazard_settles,
            inv_hazard_slope_to_zero,
        })
    }
}

/// Density at the origin for shapes where `f(0)` is `0`, finite or infinite.
fn edge_density(shape: f64, at_one: f64) -> f64 {
    if shape < 1.0 {
        f64::INFINITY
    } else if shape == 1.0 {
        at_one
    } else {
        0.0
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Distribution::new(s.parse()?)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.spec.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HazardPoint {
    pub x: f64,
    pub x_hazard: f64,
    pub inv_hazard_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSet1Report {
    pub points: Vec<HazardPoint>,
    /// `|Δ(x h(x))|` shrinks along the grid.
    pub x_hazard_settles: bool,
    /// `|d/dx (1/h)|` is nonincreasing along the grid.
    pub inv_hazard_slope_to_zero: bool,
}
