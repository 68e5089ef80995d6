//! Statistical validation and scaling measurement.

mod ks;
mod large_dev;
mod order_stats;
mod scaling;

pub use ks::{ks_statistic, standard_normal_cdf};
pub use large_dev::{ldp_tail_experiment, single_jump_tail, LDP_MIN_REPS};
pub use order_stats::{
    falk_normalizers, intermediate_os_experiment, sqrt_rule, FalkNormalizers, OrderStatExperiment,
    OS_MIN_REPS,
};
pub use scaling::{
    fit_scaling, predicted_scaling, read_rows, scaling_experiment, theorem_success_fraction, write_rows, FitParams,
    ScalingFit, ScalingModel, ScalingRow, ScalingTable, MIN_FIT_ROWS, MIN_TRIALS,
};

/// Average slots a given pair waits to be activated, `n / T`.
pub fn delay(n: usize, t: f64) -> f64 {
    n as f64 / t
}
