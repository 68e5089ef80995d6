use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::dist::{Distribution, DistributionSpec};
use crate::error::{Error, Result};
use crate::network::{LazyChannel, ModelParams};
use crate::rng::child_seed;
use crate::scheduler::{schedule, HeuristicConfig, ScheduleMode};

pub const MIN_TRIALS: usize = 30;
pub const MIN_FIT_ROWS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub trials: usize,
    #[serde(rename = "mean_T")]
    pub mean_t: f64,
    #[serde(rename = "std_T")]
    pub std_t: f64,
    pub mean_delay: f64,
}

impl ScalingRow {
    /// Summarizes per-trial throughputs: sample mean, sample standard
    /// deviation, and `n / mean`.
    pub fn from_trials(n: usize, values: &[usize]) -> Self {
        let k = values.len() as f64;
        let mean = values.iter().map(|&v| v as f64).sum::<f64>() / k;
        let ss: f64 = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
        let std = if values.len() > 1 { (ss / (k - 1.0)).sqrt() } else { 0.0 };
        ScalingRow {
            n,
            trials: values.len(),
            mean_t: mean,
            std_t: std,
            mean_delay: super::delay(n, mean),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub dist: DistributionSpec,
    pub beta: f64,
    pub n0: f64,
    pub scheduler_mode: ScheduleMode,
    pub rows: Vec<ScalingRow>,
}

impl ScalingTable {
    /// Rows with `lo <= n <= hi`.
    pub fn window(&self, lo: usize, hi: usize) -> ScalingTable {
        ScalingTable {
            rows: self.rows.iter().filter(|r| r.n >= lo && r.n <= hi).copied().collect(),
            ..self.clone()
        }
    }

    /// Writes the `n,trials,mean_T,std_T,mean_delay` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &self.rows)
    }
}

pub fn write_rows<W: Write>(w: W, rows: &[ScalingRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads rows written by [`ScalingTable::write_csv`].
pub fn read_rows<R: Read>(r: R) -> Result<Vec<ScalingRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["n", "trials", "mean_T", "std_T", "mean_delay"] {
        return Err(Error::Io(format!("unexpected scaling table header {header:?}")));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("n list is empty".into()));
    }
    if n_list[0] < 1 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "n list must be positive and strictly increasing, got {n_list:?}"
        )));
    }
    Ok(())
}

fn trial_throughputs(
    d: &Distribution,
    p: &ModelParams,
    cfg: &HeuristicConfig,
    n: usize,
    trials: usize,
    master_seed: u64,
) -> Result<Vec<(usize, usize)>> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let g = LazyChannel::new(n, d.clone(), child_seed(master_seed, n as u64, trial as u64))?;
            let r = schedule(&g, d, p, cfg)?;
            Ok((r.t_target, r.t_realized))
        })
        .collect()
}

/// Runs the scheduler on `trials` fresh instances for every `n`.
///
/// Instance `(n, trial)` is keyed by `child_seed(master_seed, n, trial)`,
/// so rows can be added or removed without disturbing the others.
pub fn scaling_experiment(
    d: &Distribution,
    p: &ModelParams,
    cfg: &HeuristicConfig,
    n_list: &[usize],
    trials: usize,
    master_seed: u64,
) -> Result<ScalingTable> {
    check_n_list(n_list)?;
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "scaling experiment needs at least {MIN_TRIALS} trials per n, got {trials}"
        )));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let t: Vec<usize> = trial_throughputs(d, p, cfg, n, trials, master_seed)?
            .into_iter()
            .map(|(_, realized)| realized)
            .collect();
        rows.push(ScalingRow::from_trials(n, &t));
    }
    Ok(ScalingTable {
        dist: d.spec(),
        beta: p.beta,
        n0: p.n0,
        scheduler_mode: cfg.mode,
        rows,
    })
}

/// Fraction of trials in which every activated pair succeeds.
pub fn theorem_success_fraction(
    d: &Distribution,
    p: &ModelParams,
    cfg: &HeuristicConfig,
    n: usize,
    trials: usize,
    master_seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let all = trial_throughputs(d, p, cfg, n, trials, master_seed)?;
    Ok(all.iter().filter(|(target, got)| target == got).count() as f64 / trials as f64)
}

/// Growth law of the achievable throughput.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingModel {
    /// `a ln n + b`
    LogN,
    /// `a (ln n)^p + b`
    LogNPow(f64),
    /// `a n^e`
    PowerLaw(f64),
    /// `a exp(c sqrt(ln n))`
    ExpSqrtLog(f64),
}

impl ScalingModel {
    pub fn expected_form(&self) -> String {
        match self {
            ScalingModel::LogN => "T = a ln(n) + b".into(),
            ScalingModel::LogNPow(p) => format!("T = a ln(n)^{p} + b"),
            ScalingModel::PowerLaw(e) => format!("T = a n^{e}"),
            ScalingModel::ExpSqrtLog(c) => format!("T = a exp({c} sqrt(ln(n)))"),
        }
    }

    /// The exponent or rate the model predicts, when it has one.
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            ScalingModel::LogN => None,
            ScalingModel::LogNPow(p) | ScalingModel::PowerLaw(p) | ScalingModel::ExpSqrtLog(p) => Some(p),
        }
    }

    /// Regressor and response for one row.
    fn transform(&self, n: f64, t: f64) -> (f64, f64) {
        let ln = n.ln();
        match *self {
            ScalingModel::LogN => (ln, t),
            ScalingModel::LogNPow(p) => (ln.powf(p), t),
            ScalingModel::PowerLaw(_) => (ln, t.ln()),
            ScalingModel::ExpSqrtLog(_) => (ln.sqrt(), t.ln()),
        }
    }

    fn log_response(&self) -> bool {
        matches!(self, ScalingModel::PowerLaw(_) | ScalingModel::ExpSqrtLog(_))
    }
}

impl fmt::Display for ScalingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingModel::LogN => f.write_str("log_n"),
            ScalingModel::LogNPow(p) => write!(f, "log_n_pow({p})"),
            ScalingModel::PowerLaw(e) => write!(f, "power_law({e})"),
            ScalingModel::ExpSqrtLog(c) => write!(f, "exp_sqrt_log({c})"),
        }
    }
}

impl Serialize for ScalingModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The throughput order predicted for `d`.
pub fn predicted_scaling(d: &Distribution) -> ScalingModel {
    match d.spec() {
        DistributionSpec::Gamma { .. } => ScalingModel::LogN,
        DistributionSpec::Weibull { k, .. } => ScalingModel::LogNPow(1.0 / k),
        DistributionSpec::Pareto { alpha } => ScalingModel::PowerLaw(1.0 / (1.0 + alpha)),
        DistributionSpec::LogNormal { sigma, .. } => {
            ScalingModel::ExpSqrtLog(std::f64::consts::SQRT_2 * sigma)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitParams {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub model: ScalingModel,
    pub params: FitParams,
    pub r_squared: f64,
    pub expected_form: String,
}

/// Ordinary least squares of the model's response on its regressor.
///
/// For the power-law and `exp(sqrt(ln n))` models the response is `ln T`,
/// so the slope is the measured exponent or rate.
pub fn fit_scaling(table: &ScalingTable, model: ScalingModel) -> Result<ScalingFit> {
    if table.rows.len() < MIN_FIT_ROWS {
        return Err(Error::InvalidArgument(format!(
            "fit needs at least {MIN_FIT_ROWS} rows, got {}",
            table.rows.len()
        )));
    }
    if model.log_response() && table.rows.iter().any(|r| !(r.mean_t > 0.0)) {
        return Err(Error::Domain(format!("{model} fit needs positive mean throughput in every row")));
    }
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .map(|r| model.transform(r.n as f64, r.mean_t))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 1e-12 * mx.abs().max(1.0).powi(2)) {
        return Err(Error::NonConvergence(format!("{model} regression is singular (constant regressor)")));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(ScalingFit {
        model,
        params: FitParams { slope, intercept },
        r_squared,
        expected_form: model.expected_form(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: Vec<(usize, f64)>) -> ScalingTable {
        ScalingTable {
            dist: DistributionSpec::Gamma { m: 1.0, omega: 1.0 },
            beta: 1.0,
            n0: 0.1,
            scheduler_mode: ScheduleMode::AdaptivePrefix,
            rows: rows
                .into_iter()
                .map(|(n, t)| ScalingRow {
                    n,
                    trials: 30,
                    mean_t: t,
                    std_t: 0.0,
                    mean_delay: n as f64 / t,
                })
                .collect(),
        }
    }

    #[test]
    fn noiseless_log_fit() {
        let t = table((4..12).map(|e| (1usize << e, 3.0 * ((1u64 << e) as f64).ln())).collect());
        let f = fit_scaling(&t, ScalingModel::LogN).unwrap();
        assert!((f.params.slope - 3.0).abs() < 1e-9);
        assert!(f.params.intercept.abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_power_fit() {
        let t = table((4..12).map(|e| (1usize << e, ((1u64 << e) as f64).powf(0.25))).collect());
        let f = fit_scaling(&t, ScalingModel::PowerLaw(0.25)).unwrap();
        assert!((f.params.slope - 0.25).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_rows() {
        let t = table(vec![(2, 1.0), (4, 2.0), (8, 3.0), (16, 4.0)]);
        assert!(fit_scaling(&t, ScalingModel::LogN).is_err());
    }

    #[test]
    fn predicted_forms() {
        let p = predicted_scaling(&Distribution::pareto(3.0).unwrap());
        assert_eq!(p, ScalingModel::PowerLaw(0.25));
        assert_eq!(predicted_scaling(&Distribution::gamma(7.0, 1.0).unwrap()), ScalingModel::LogN);
        assert_eq!(
            predicted_scaling(&Distribution::weibull(2.0, 1.0).unwrap()),
            ScalingModel::LogNPow(0.5)
        );
    }

    #[test]
    fn fit_json_shape() {
        let t = table((4..12).map(|e| (1usize << e, ((1u64 << e) as f64).powf(0.25))).collect());
        let f = fit_scaling(&t, ScalingModel::PowerLaw(0.25)).unwrap();
        let v = serde_json::to_value(&f).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["expected_form", "model", "params", "r_squared"]);
        assert_eq!(v["model"], "power_law(0.25)");
    }

    #[test]
    fn csv_round_trip() {
        let t = table(vec![(8, 2.5), (16, 3.0)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,trials,mean_T,std_T,mean_delay\n"));
        assert_eq!(read_rows(buf.as_slice()).unwrap(), t.rows);
    }
}
