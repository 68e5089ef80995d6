#ifndef FADING_SCHED_H
#define FADING_SCHED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_INVALID_ARGUMENT = 2,
  FS_STATUS_DOMAIN = 3,
  FS_STATUS_PARSE = 4,
  FS_STATUS_GUARD = 5,
  FS_STATUS_NUMERICAL = 6,
  FS_STATUS_IO = 7,
  FS_STATUS_PANIC = 8,
} FsStatus;

typedef enum {
  FS_SCHEDULE_MODE_THEOREM = 0,
  FS_SCHEDULE_MODE_ADAPTIVE = 1,
  FS_SCHEDULE_MODE_FIXED = 2,
} FsScheduleMode;

typedef enum {
  FS_SOLVER_EXHAUSTIVE = 0,
  FS_SOLVER_WEIGHT_BOUNDED = 1,
  FS_SOLVER_GREEDY = 2,
} FsSolver;

/**
 * Opaque dense channel instance.
 */
typedef struct FsChannel FsChannel;

/**
 * Opaque channel-power law.
 */
typedef struct FsDistribution FsDistribution;

/**
 * Outcome of [`fs_schedule`].
 */
typedef struct {
  size_t t_target;
  size_t t_realized;
} FsScheduleOutcome;

/**
 * Outcome of [`fs_solve`].
 */
typedef struct {
  size_t best_t;
  uint64_t explored;
} FsSolveOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *fs_last_error_message(void);

/**
 * Parses a spec such as `gamma:m=2,omega=1`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
FsStatus fs_distribution_parse(const char *spec, FsDistribution **out);

/**
 * # Safety
 * `d` must come from [`fs_distribution_parse`] and not be used afterwards.
 */
void fs_distribution_free(FsDistribution *d);

/**
 * Density `f(x)`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
FsStatus fs_distribution_pdf(const FsDistribution *d, double x, double *out);

/**
 * Distribution function `F(x)`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
FsStatus fs_distribution_cdf(const FsDistribution *d, double x, double *out);

/**
 * Quantile `F^-1(p)` for `0 <= p < 1`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
FsStatus fs_distribution_quantile(const FsDistribution *d, double p, double *out);

/**
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
FsStatus fs_distribution_mean(const FsDistribution *d, double *out);

/**
 * Solves `G(t) = n` for the throughput function of `d`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
FsStatus fs_g_inverse(const FsDistribution *d, double beta, double n, double tol, double *out);

/**
 * Draws an `n x n` instance from `d`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
FsStatus fs_channel_generate(size_t n, const FsDistribution *d, uint64_t seed, FsChannel **out);

/**
 * Builds an instance from `n * n` row-major gains (`gains[i * n + j]` is
 * source `i` to destination `j`).
 *
 * # Safety
 * `gains` must point to `n * n` readable doubles; `out` must be writable.
 */
FsStatus fs_channel_from_gains(size_t n, const double *gains, FsChannel **out);

/**
 * # Safety
 * `c` must come from this library and not be used afterwards.
 */
void fs_channel_free(FsChannel *c);

/**
 * Pair count, or 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
size_t fs_channel_n(const FsChannel *c);

/**
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
FsStatus fs_channel_gain(const FsChannel *c, size_t src, size_t dst, double *out);

/**
 * Counts successful receivers for activation `x` (`len` bytes, nonzero = on).
 *
 * # Safety
 * `c` must be a live handle; `x` must point to `len` readable bytes.
 */
FsStatus fs_throughput(const FsChannel *c,
                       double beta,
                       double n0,
                       const uint8_t *x,
                       size_t len,
                       size_t *out);

/**
 * Runs the strongest-direct-links heuristic. `t` is used only in fixed
 * mode. When `x_out` is not null it receives `n` bytes of activation.
 *
 * # Safety
 * Handles must be live; `x_out` must be null or hold `n` writable bytes.
 */
FsStatus fs_schedule(const FsChannel *c,
                     const FsDistribution *d,
                     double beta,
                     double n0,
                     FsScheduleMode mode,
                     double epsilon,
                     double delta,
                     size_t t,
                     uint8_t *x_out,
                     FsScheduleOutcome *out);

/**
 * Runs a reference solver. `w_max` applies to weight-bounded search and
 * `n_guard` to exhaustive search.
 *
 * # Safety
 * `c` must be a live handle; `x_out` must be null or hold `n` writable bytes.
 */
FsStatus fs_solve(const FsChannel *c,
                  double beta,
                  double n0,
                  FsSolver solver,
                  size_t w_max,
                  size_t n_guard,
                  uint8_t *x_out,
                  FsSolveOutcome *out);

/**
 * Exact `sum_{i=0}^{w_max} C(n, i)` as a decimal string; release it with
 * [`fs_string_free`].
 *
 * # Safety
 * `out` must be writable.
 */
FsStatus fs_search_space_size(uint64_t n, uint64_t w_max, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void fs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FADING_SCHED_H */
