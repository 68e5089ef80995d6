//! Throughput of one-hop wireless networks under the random connection model.
//!
//! `n` source/destination pairs share one medium; every link power
//! `gamma[i][j]` (source `i` to destination `j`) is an i.i.d. draw from a
//! catalog fading law. A receiver succeeds when its SINR strictly exceeds
//! the threshold `beta`. The crate provides:
//!
//! * [`dist`]: the channel-power catalog (Gamma, Weibull, generalized
//!   Pareto, log-normal).
//! * [`network`]: channel instances, SINR, throughput and the equivalent
//!   `A x > b` linear-inequality system.
//! * [`solvers`]: exact exhaustive search, weight-bounded search and a
//!   greedy baseline for the optimal activation set.
//! * [`scheduler`]: the strongest-direct-links heuristic, the throughput
//!   function `G(x) = x / (1 - F(beta mu x / 2))` and its inverse.
//! * [`analysis`]: order-statistic and large-deviation experiments, KS
//!   machinery, and throughput scaling sweeps with model fits.
//! * [`cli`]: the `fading-sched` command-line runner.

pub mod analysis;
pub mod cli;
pub mod dist;
pub mod error;
pub mod network;
pub mod rng;
pub mod scheduler;
pub mod solvers;

pub use dist::{Distribution, DistributionSpec, TailClass, TailKind};
pub use error::{Error, Result};
pub use network::{ActivationVector, ChannelMatrix, Gains, LazyChannel, ModelParams};
pub use scheduler::{HeuristicConfig, ScheduleMode, ScheduleResult};
pub use solvers::SolveResult;
