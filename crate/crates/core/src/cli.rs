//! The `fading-sched` command-line runner.
//!
//! Flags can also come from a TOML file given with `--config`; keys are
//! flag names without the leading dashes, and flags on the command line
//! win over the file.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | usage error (unknown flag, missing subcommand) |
//! | 3 | invalid configuration or input |
//! | 4 | exhaustive-search guard refused the instance size |
//! | 5 | numerical failure (tail underflow, no convergence) |
//! | 6 | I/O failure |

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    falk_normalizers, fit_scaling, intermediate_os_experiment, ldp_tail_experiment, predicted_scaling,
    scaling_experiment, single_jump_tail, sqrt_rule, ScalingTable,
};
use crate::dist::Distribution;
use crate::error::Error;
use crate::network::{read_instance, write_instance, ChannelMatrix, Gains, LazyChannel, ModelParams, DENSE_LIMIT};
use crate::scheduler::{schedule, HeuristicConfig, ScheduleMode, DEFAULT_DELTA, DEFAULT_EPSILON};
use crate::solvers::{default_wmax, exhaustive_optimal, greedy_insertion, weight_bounded_search};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_GUARD: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;
pub const EXIT_IO: i32 = 6;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "FADING_SCHED_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fading-sched", version, about = "Throughput experiments for one-hop wireless networks with i.i.d. fading")]
#[command(args_override_self = true, arg_required_else_help = true)]
pub struct Cli {
    /// TOML file supplying default flag values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Channel-power law, e.g. `gamma:m=2,omega=1` or `pareto:alpha=3`
    #[arg(long, default_value = "gamma:m=1,omega=1")]
    pub dist: String,
    /// SINR threshold
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    /// Noise power
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub n0: f64,
    /// Master seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output file (written atomically); stdout when omitted
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Output format; defaults to JSON for single results and CSV for tables
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Exhaustive,
    WeightBounded,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Theorem,
    Adaptive,
    Fixed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the best activation set with a reference solver
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Reference solver
        #[arg(long, value_enum, default_value = "exhaustive")]
        solver: SolverArg,
        /// Weight bound for weight-bounded search: an integer or `log2n`
        #[arg(long, default_value = "log2n")]
        wmax: String,
        /// Largest n exhaustive search accepts
        #[arg(long, default_value_t = crate::solvers::DEFAULT_N_GUARD)]
        n_guard: usize,
        /// Pair count of a generated instance
        #[arg(long)]
        n: Option<usize>,
        /// Instance CSV written by `gendata` (overrides --n/--dist/--seed)
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Run the strongest-direct-links heuristic on one instance
    Schedule {
        #[command(flatten)]
        common: CommonArgs,
        /// Active-set rule: theorem count, best prefix, or a fixed count
        #[arg(long, value_enum, default_value = "theorem")]
        mode: ModeArg,
        /// Slack in the theorem active count, in (0, 1)
        #[arg(long, default_value_t = DEFAULT_EPSILON, allow_negative_numbers = true)]
        epsilon: f64,
        /// Exponent slack in the theorem active count, in (0, 1)
        #[arg(long, default_value_t = DEFAULT_DELTA, allow_negative_numbers = true)]
        delta: f64,
        /// Active count for `--mode fixed`
        #[arg(long)]
        t: Option<usize>,
        /// Pair count of a generated instance
        #[arg(long)]
        n: Option<usize>,
        /// Instance CSV written by `gendata` (overrides --n/--dist/--seed)
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Measure mean throughput over a range of n
    Scaling {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated, strictly increasing pair counts
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Independent instances per n (at least 30)
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Active-set rule used in every trial
        #[arg(long, value_enum, default_value = "adaptive")]
        mode: ModeArg,
        /// Slack in the theorem active count, in (0, 1)
        #[arg(long, default_value_t = DEFAULT_EPSILON, allow_negative_numbers = true)]
        epsilon: f64,
        /// Exponent slack in the theorem active count, in (0, 1)
        #[arg(long, default_value_t = DEFAULT_DELTA, allow_negative_numbers = true)]
        delta: f64,
        /// Also fit the predicted growth law and write it here as JSON
        #[arg(long)]
        fit_output: Option<PathBuf>,
    },
    /// Order-statistic and large-deviation checks
    ValidateLemmas {
        #[command(flatten)]
        common: CommonArgs,
        /// Sample sizes for the order-statistic experiment
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
        os_n: Vec<usize>,
        /// Repetitions per order-statistic sample size (at least 100)
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        /// Sum lengths for the light-tailed deviation experiment
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
        ldp_t: Vec<usize>,
        /// Deviation factor K > 1 for the light-tailed experiment
        #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
        k: f64,
        /// Repetitions per sum length (at least 1000)
        #[arg(long, default_value_t = 100_000)]
        ldp_reps: usize,
        /// Heavy-tailed law for the single-jump comparison
        #[arg(long, default_value = "pareto:alpha=2.5")]
        ht_dist: String,
        /// Sum lengths for the heavy-tailed comparison
        #[arg(long, value_delimiter = ',', default_value = "100,1000")]
        ht_t: Vec<usize>,
        /// Deviation factor K > 1 for the heavy-tailed comparison
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        ht_k: f64,
        /// Repetitions per heavy-tailed sum length (at least 1000)
        #[arg(long, default_value_t = 100_000)]
        ht_reps: usize,
    },
    /// Dump a generated instance as CSV
    Gendata {
        #[command(flatten)]
        common: CommonArgs,
        /// Pair count
        #[arg(long)]
        n: usize,
    },
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    fn config(fields: Vec<String>) -> Self {
        let mut message = String::from("invalid configuration:");
        for f in fields {
            message.push_str("\n  - ");
            message.push_str(&f);
        }
        CliError {
            code: EXIT_CONFIG,
            message,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::GuardExceeded { .. } => EXIT_GUARD,
        Error::Io(_) => EXIT_IO,
        Error::TailUnderflow { .. } | Error::DensityUnderflow { .. } | Error::NonConvergence(_) => EXIT_NUMERICAL,
        Error::Parse(_)
        | Error::Domain(_)
        | Error::InvalidArgument(_)
        | Error::InactiveReceiver(_)
        | Error::Dimension { .. } => EXIT_CONFIG,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

/// Where the instance for `solve`/`schedule` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Generated { n: usize },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Solve {
        solver: SolverArg,
        wmax: Option<usize>,
        n_guard: usize,
        source: InstanceSource,
    },
    Schedule {
        cfg: HeuristicConfig,
        source: InstanceSource,
    },
    Scaling {
        n_list: Vec<usize>,
        trials: usize,
        cfg: HeuristicConfig,
        fit_output: Option<PathBuf>,
    },
    ValidateLemmas {
        os_n: Vec<usize>,
        reps: usize,
        ldp_t: Vec<usize>,
        k: f64,
        ldp_reps: usize,
        ht_dist: Distribution,
        ht_t: Vec<usize>,
        ht_k: f64,
        ht_reps: usize,
    },
    Gendata {
        n: usize,
    },
}

/// A validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: Task,
    pub dist: Distribution,
    pub params: ModelParams,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

fn toml_value_to_arg(v: &toml::Value) -> Option<String> {
    match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(b) => Some(b.to_string()),
        toml::Value::Array(items) => items
            .iter()
            .map(toml_value_to_arg)
            .collect::<Option<Vec<_>>>()
            .map(|v| v.join(",")),
        _ => None,
    }
}

/// Turns a TOML table into `--key value` pairs for subcommand `sub`.
fn config_args(path: &Path, sub: &str) -> Result<Vec<OsString>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("cannot read config {}: {e}", path.display()),
    })?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::config(vec![format!("config {}: {e}", path.display())]))?;
    let cmd = Cli::command();
    let known: Vec<String> = cmd
        .find_subcommand(sub)
        .map(|c| c.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect())
        .unwrap_or_default();

    let mut out = Vec::new();
    let mut bad = Vec::new();
    for (key, value) in &table {
        let flag = key.replace('_', "-");
        if flag == "config" || !known.contains(&flag) {
            bad.push(format!("{key}: not a flag of `{sub}`"));
            continue;
        }
        match toml_value_to_arg(value) {
            Some(v) => {
                out.push(OsString::from(format!("--{flag}")));
                out.push(OsString::from(v));
            }
            None => bad.push(format!("{key}: unsupported value type")),
        }
    }
    if bad.is_empty() {
        Ok(out)
    } else {
        Err(CliError::config(bad))
    }
}

/// Splices values from a `--config` file into `argv` right after the
/// subcommand, so explicit flags (which come later) take precedence.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut config = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => match it.next() {
                Some(p) => config = Some(PathBuf::from(p)),
                None => rest.push(a),
            },
            Some(s) if s.starts_with("--config=") => config = Some(PathBuf::from(&s["--config=".len()..])),
            _ => rest.push(a),
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let Some(sub_pos) = rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(rest);
    };
    let sub_pos = sub_pos + 1;
    let sub = rest[sub_pos].to_string_lossy().into_owned();
    let extra = config_args(&path, &sub)?;
    let tail = rest.split_off(sub_pos + 1);
    rest.extend(extra);
    rest.extend(tail);
    Ok(rest)
}

struct Collector(Vec<String>);

impl Collector {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }

    fn take<T>(&mut self, field: &str, r: crate::error::Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.push(format!("{field}: {e}"));
                None
            }
        }
    }
}

fn increasing(v: &[usize]) -> bool {
    !v.is_empty() && v[0] >= 1 && v.windows(2).all(|w| w[0] < w[1])
}

fn heuristic(c: &mut Collector, mode: ModeArg, epsilon: f64, delta: f64, t: Option<usize>) -> HeuristicConfig {
    c.check(epsilon > 0.0 && epsilon < 1.0, || format!("epsilon: must lie in (0, 1), got {epsilon}"));
    c.check(delta > 0.0 && delta < 1.0, || format!("delta: must lie in (0, 1), got {delta}"));
    let mode = match mode {
        ModeArg::Theorem => ScheduleMode::TheoremFaithful,
        ModeArg::Adaptive => ScheduleMode::AdaptivePrefix,
        ModeArg::Fixed => {
            c.check(t.is_some(), || "t: --mode fixed needs --t".into());
            ScheduleMode::FixedCount(t.unwrap_or(1))
        }
    };
    HeuristicConfig { epsilon, delta, mode }
}

fn source(c: &mut Collector, n: Option<usize>, instance: Option<PathBuf>) -> InstanceSource {
    match (instance, n) {
        (Some(p), _) => InstanceSource::File(p),
        (None, Some(n)) => {
            c.check(n >= 1, || "n: must be at least 1".into());
            InstanceSource::Generated { n }
        }
        (None, None) => {
            c.0.push("n: give --n or --instance".into());
            InstanceSource::Generated { n: 1 }
        }
    }
}

/// Parses and validates a full argument vector (program name first).
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = expand_config(argv.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError {
        code: if e.use_stderr() { EXIT_USAGE } else { EXIT_OK },
        message: e.to_string(),
    })?;

    let mut c = Collector(Vec::new());
    let common = match &cli.command {
        Command::Solve { common, .. }
        | Command::Schedule { common, .. }
        | Command::Scaling { common, .. }
        | Command::ValidateLemmas { common, .. }
        | Command::Gendata { common, .. } => common.clone(),
    };
    let dist = c.take("dist", common.dist.parse().and_then(Distribution::new));
    c.check(common.beta.is_finite() && common.beta > 0.0, || {
        format!("beta: must be positive, got {}", common.beta)
    });
    c.check(common.n0.is_finite() && common.n0 > 0.0, || {
        format!("n0: must be positive, got {}", common.n0)
    });

    let (task, default_format) = match cli.command {
        Command::Solve {
            solver,
            wmax,
            n_guard,
            n,
            instance,
            ..
        } => {
            let wmax = match wmax.as_str() {
                "log2n" => None,
                s => match s.parse() {
                    Ok(w) => Some(w),
                    Err(_) => {
                        c.0.push(format!("wmax: expected an integer or `log2n`, got `{s}`"));
                        None
                    }
                },
            };
            let source = source(&mut c, n, instance);
            (
                Task::Solve {
                    solver,
                    wmax,
                    n_guard,
                    source,
                },
                OutputFormat::Json,
            )
        }
        Command::Schedule {
            mode,
            epsilon,
            delta,
            t,
            n,
            instance,
            ..
        } => {
            let cfg = heuristic(&mut c, mode, epsilon, delta, t);
            let source = source(&mut c, n, instance);
            (Task::Schedule { cfg, source }, OutputFormat::Json)
        }
        Command::Scaling {
            n,
            trials,
            mode,
            epsilon,
            delta,
            fit_output,
            ..
        } => {
            c.check(increasing(&n), || format!("n: must be positive and strictly increasing, got {n:?}"));
            c.check(trials >= crate::analysis::MIN_TRIALS, || {
                format!("trials: need at least {}, got {trials}", crate::analysis::MIN_TRIALS)
            });
            c.check(mode != ModeArg::Fixed, || "mode: scaling supports theorem or adaptive".into());
            let cfg = heuristic(&mut c, mode, epsilon, delta, None);
            (
                Task::Scaling {
                    n_list: n,
                    trials,
                    cfg,
                    fit_output,
                },
                OutputFormat::Csv,
            )
        }
        Command::ValidateLemmas {
            os_n,
            reps,
            ldp_t,
            k,
            ldp_reps,
            ht_dist,
            ht_t,
            ht_k,
            ht_reps,
            ..
        } => {
            c.check(increasing(&os_n), || format!("os-n: must be strictly increasing, got {os_n:?}"));
            c.check(reps >= crate::analysis::OS_MIN_REPS, || {
                format!("reps: need at least {}, got {reps}", crate::analysis::OS_MIN_REPS)
            });
            c.check(increasing(&ldp_t), || format!("ldp-t: must be strictly increasing, got {ldp_t:?}"));
            c.check(increasing(&ht_t), || format!("ht-t: must be strictly increasing, got {ht_t:?}"));
            c.check(k > 1.0, || format!("k: must exceed 1, got {k}"));
            c.check(ht_k > 1.0, || format!("ht-k: must exceed 1, got {ht_k}"));
            for (name, r) in [("ldp-reps", ldp_reps), ("ht-reps", ht_reps)] {
                c.check(r >= crate::analysis::LDP_MIN_REPS, || {
                    format!("{name}: need at least {}, got {r}", crate::analysis::LDP_MIN_REPS)
                });
            }
            let ht = c.take("ht-dist", ht_dist.parse().and_then(Distribution::new));
            (
                Task::ValidateLemmas {
                    os_n,
                    reps,
                    ldp_t,
                    k,
                    ldp_reps,
                    ht_dist: ht.unwrap_or_else(|| Distribution::pareto(2.5).expect("valid")),
                    ht_t,
                    ht_k,
                    ht_reps,
                },
                OutputFormat::Json,
            )
        }
        Command::Gendata { n, .. } => {
            c.check((1..=DENSE_LIMIT).contains(&n), || format!("n: must lie in [1, {DENSE_LIMIT}], got {n}"));
            (Task::Gendata { n }, OutputFormat::Csv)
        }
    };

    if !c.0.is_empty() {
        return Err(CliError::config(c.0));
    }
    Ok(RunConfig {
        task,
        dist: dist.expect("checked above"),
        params: ModelParams {
            beta: common.beta,
            n0: common.n0,
        },
        seed: common.seed,
        output: common.output,
        format: common.format.unwrap_or(default_format),
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError {
        code: EXIT_IO,
        message: format!("writing {}: {e}", path.display()),
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// A finished run: the artifact and a one-line summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: Vec<u8>,
    pub summary: String,
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

/// One-row CSV from a flat JSON object, keys in insertion order.
fn csv_bytes(keys: &[&str], v: &serde_json::Value) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let row: Vec<String> = keys
        .iter()
        .map(|k| match &v[*k] {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .collect();
    w.write_record(keys).map_err(Error::from)?;
    w.write_record(&row).map_err(Error::from)?;
    w.into_inner().map_err(|e| CliError {
        code: EXIT_IO,
        message: e.to_string(),
    })
}

fn load_dense(cfg: &RunConfig, source: &InstanceSource) -> Result<(ChannelMatrix, ModelParams), CliError> {
    match source {
        InstanceSource::Generated { n } => {
            if *n > DENSE_LIMIT {
                return Err(CliError::config(vec![format!(
                    "n: dense instances are limited to {DENSE_LIMIT} pairs"
                )]));
            }
            Ok((ChannelMatrix::generate(*n, &cfg.dist, cfg.seed)?, cfg.params))
        }
        InstanceSource::File(p) => {
            let f = fs::File::open(p).map_err(|e| CliError {
                code: EXIT_IO,
                message: format!("cannot open instance {}: {e}", p.display()),
            })?;
            Ok(read_instance(std::io::BufReader::new(f))?)
        }
    }
}

fn run_solve(cfg: &RunConfig, solver: SolverArg, wmax: Option<usize>, n_guard: usize, source: &InstanceSource) -> Result<Outcome, CliError> {
    if let (SolverArg::Exhaustive, InstanceSource::Generated { n }) = (solver, source) {
        if *n > n_guard {
            return Err(Error::GuardExceeded { n: *n, guard: n_guard }.into());
        }
    }
    let (m, p) = load_dense(cfg, source)?;
    let n = m.n();
    let w = wmax.unwrap_or_else(|| default_wmax(n));
    let r = match solver {
        SolverArg::Exhaustive => exhaustive_optimal(&m, &p, n_guard)?,
        SolverArg::WeightBounded => weight_bounded_search(&m, &p, w)?,
        SolverArg::Greedy => greedy_insertion(&m, &p)?,
    };
    let v = json!({
        "n": n,
        "solver": r.method.to_string(),
        "w_max": if solver == SolverArg::WeightBounded { json!(w) } else { json!(null) },
        "best_x": r.best_x.to_bit_string(),
        "best_T": r.best_t,
        "explored": r.explored,
    });
    let body = match cfg.format {
        OutputFormat::Json => json_bytes(&v),
        OutputFormat::Csv => csv_bytes(&["n", "solver", "w_max", "best_x", "best_T", "explored"], &v)?,
    };
    Ok(Outcome {
        body,
        summary: format!("solve: n={n} solver={} best_T={} explored={}", r.method, r.best_t, r.explored),
    })
}

fn run_schedule(cfg: &RunConfig, hc: &HeuristicConfig, source: &InstanceSource) -> Result<Outcome, CliError> {
    let r = match source {
        InstanceSource::Generated { n } if *n > DENSE_LIMIT => {
            let g = LazyChannel::new(*n, cfg.dist.clone(), cfg.seed)?;
            hc.validate(g.n())?;
            schedule(&g, &cfg.dist, &cfg.params, hc)?
        }
        _ => {
            let (m, p) = load_dense(cfg, source)?;
            hc.validate(m.n())?;
            schedule(&m, &cfg.dist, &p, hc)?
        }
    };
    let s = r.summary();
    let body = match cfg.format {
        OutputFormat::Json => json_bytes(&s),
        OutputFormat::Csv => csv_bytes(
            &["n", "mode", "t_target", "T_realized", "all_succeeded"],
            &serde_json::to_value(&s).expect("serializable"),
        )?,
    };
    Ok(Outcome {
        body,
        summary: format!(
            "schedule: n={} mode={} t_target={} T_realized={}",
            s.n, s.mode, s.t_target, s.t_realized
        ),
    })
}

fn table_json(t: &ScalingTable) -> serde_json::Value {
    json!({
        "dist": t.dist.to_string(),
        "beta": t.beta,
        "n0": t.n0,
        "scheduler_mode": t.scheduler_mode.name(),
        "rows": t.rows,
    })
}

fn run_scaling(cfg: &RunConfig, n_list: &[usize], trials: usize, hc: &HeuristicConfig, fit_output: Option<&Path>) -> Result<Outcome, CliError> {
    let table = scaling_experiment(&cfg.dist, &cfg.params, hc, n_list, trials, cfg.seed)?;
    let body = match cfg.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            buf
        }
        OutputFormat::Json => json_bytes(&table_json(&table)),
    };
    let mut summary = format!("scaling: {} rows, dist={}, mode={}", table.rows.len(), table.dist, hc.mode.name());
    if let Some(path) = fit_output {
        let fit = fit_scaling(&table, predicted_scaling(&cfg.dist))?;
        write_atomic(path, &json_bytes(&fit))?;
        summary.push_str(&format!(", fit slope={:.4} r2={:.4}", fit.params.slope, fit.r_squared));
    }
    Ok(Outcome { body, summary })
}

#[allow(clippy::too_many_arguments)]
fn run_lemmas(
    cfg: &RunConfig,
    os_n: &[usize],
    reps: usize,
    ldp_t: &[usize],
    k: f64,
    ldp_reps: usize,
    ht: &Distribution,
    ht_t: &[usize],
    ht_k: f64,
    ht_reps: usize,
) -> Result<Outcome, CliError> {
    let d = &cfg.dist;
    let mut os_rows = Vec::new();
    let mut ks_values = Vec::new();
    for &n in os_n {
        let e = intermediate_os_experiment(d, n, sqrt_rule, reps, cfg.seed)?;
        ks_values.push(e.ks);
        os_rows.push(json!({
            "n": n,
            "i": e.normalizers.i,
            "a_n": e.normalizers.a_n,
            "b_n": e.normalizers.b_n,
            "ks": e.ks,
        }));
    }
    let drops = ks_values.windows(2).filter(|w| w[1] < w[0]).count();

    let mut ratio_rows = Vec::new();
    for &n in os_n {
        let f = falk_normalizers(d, n as u64, sqrt_rule(n) as u64)?;
        ratio_rows.push(json!({"n": n, "a_over_b": f.ratio()}));
    }

    let mut ldp_rows = Vec::new();
    for &t in ldp_t {
        let prob = ldp_tail_experiment(d, t, k, ldp_reps, cfg.seed)?;
        ldp_rows.push(json!({"t": t, "probability": prob}));
    }
    let mut ht_rows = Vec::new();
    for &t in ht_t {
        let prob = ldp_tail_experiment(ht, t, ht_k, ht_reps, cfg.seed)?;
        let jump = single_jump_tail(ht, t, ht_k)?;
        ht_rows.push(json!({"t": t, "probability": prob, "single_jump": jump, "ratio": prob / jump}));
    }

    let v = json!({
        "dist": d.spec().to_string(),
        "order_statistics": {
            "reps": reps,
            "rows": os_rows,
            "ks_decreasing_steps": drops,
        },
        "normalizer_ratio": ratio_rows,
        "light_tail_deviation": {"k": k, "reps": ldp_reps, "rows": ldp_rows},
        "heavy_tail_deviation": {"dist": ht.spec().to_string(), "k": ht_k, "reps": ht_reps, "rows": ht_rows},
    });
    Ok(Outcome {
        body: json_bytes(&v),
        summary: format!(
            "validate-lemmas: {} order-statistic sizes, ks decreased {drops}/{} steps",
            os_n.len(),
            os_n.len().saturating_sub(1)
        ),
    })
}

fn run_gendata(cfg: &RunConfig, n: usize) -> Result<Outcome, CliError> {
    let m = ChannelMatrix::generate(n, &cfg.dist, cfg.seed)?;
    let mut buf = Vec::new();
    write_instance(&mut buf, &m, &cfg.params)?;
    Ok(Outcome {
        body: buf,
        summary: format!("gendata: n={n} dist={} seed={}", cfg.dist.spec(), cfg.seed),
    })
}

/// Executes a validated configuration and returns its artifact.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cfg.task {
        Task::Solve {
            solver,
            wmax,
            n_guard,
            source,
        } => run_solve(cfg, *solver, *wmax, *n_guard, source),
        Task::Schedule { cfg: hc, source } => run_schedule(cfg, hc, source),
        Task::Scaling {
            n_list,
            trials,
            cfg: hc,
            fit_output,
        } => run_scaling(cfg, n_list, *trials, hc, fit_output.as_deref()),
        Task::ValidateLemmas {
            os_n,
            reps,
            ldp_t,
            k,
            ldp_reps,
            ht_dist,
            ht_t,
            ht_k,
            ht_reps,
        } => run_lemmas(cfg, os_n, *reps, ldp_t, *k, *ldp_reps, ht_dist, ht_t, *ht_k, *ht_reps),
        Task::Gendata { n } => run_gendata(cfg, *n),
    }
}

/// Runs and delivers the artifact: to `cfg.output` atomically, else to
/// stdout. The summary line goes to stdout after a file write, to stderr
/// otherwise.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let out = execute(cfg)?;
    match &cfg.output {
        Some(path) => {
            write_atomic(path, &out.body)?;
            println!("{} -> {}", out.summary, path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&out.body).and_then(|_| stdout.flush()).map_err(|e| CliError {
                code: EXIT_IO,
                message: e.to_string(),
            })?;
            eprintln!("{}", out.summary);
        }
    }
    Ok(())
}

/// Applies the thread cap from the environment.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = match raw.trim().parse() {
        Ok(t) if t >= 1 => t,
        _ => {
            return Err(CliError::config(vec![format!(
                "{THREADS_ENV}: expected a positive integer, got `{raw}`"
            )]))
        }
    };
    // A pool that is already built keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = configure_threads()
        .and_then(|_| parse_config(argv))
        .and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) if e.code == EXIT_OK => {
            print!("{}", e.message);
            EXIT_OK
        }
        Err(e) if e.code == EXIT_USAGE => {
            eprintln!("{}", e.message.trim_end());
            e.code
        }
        Err(e) => {
            eprintln!("error: {}", e.message.trim_end());
            e.code
        }
    }
}
