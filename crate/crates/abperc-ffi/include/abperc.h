#ifndef ABPERC_H
#define ABPERC_H

/* Generated by cbindgen from the abperc-ffi crate; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call. Anything other than `Ok` means the out-parameters
// were left untouched (except handle out-pointers, which are nulled).
typedef enum AbpercStatus {
  // Success; out-parameters are filled in.
  ABPERC_STATUS_OK = 0,
  // An argument was malformed: bad dimension, range, or ordering.
  ABPERC_STATUS_INVALID_ARGUMENT = 1,
  // A stated precondition fails for the given configuration.
  ABPERC_STATUS_HYPOTHESIS = 2,
  // Bisection endpoints do not straddle the target with
  // confidence-interval separation.
  ABPERC_STATUS_BRACKET = 3,
  // Too few observations to form the requested aggregate.
  ABPERC_STATUS_INSUFFICIENT_DATA = 4,
  // An i/o error from the underlying library.
  ABPERC_STATUS_IO = 5,
  // A required pointer argument was null.
  ABPERC_STATUS_NULL_POINTER = 6,
  // The computation panicked; treat the library state as suspect.
  ABPERC_STATUS_PANIC = 7,
} AbpercStatus;

// Opaque result of a threshold search. Inspect it through the
// `abperc_threshold_*` accessors and release it with
// [`abperc_threshold_free`].
typedef struct AbpercThreshold AbpercThreshold;

// A Bernoulli estimate: raw counts plus a Wilson 95% interval.
typedef struct AbpercEstimate {
  // Number of trials in which the event occurred.
  uint64_t hits;
  // Total number of independent trials.
  uint64_t trials;
  // Point estimate hits / trials.
  double p_hat;
  // Binomial standard error at the point estimate.
  double std_err;
  // Lower end of the Wilson 95% confidence interval.
  double ci_low;
  // Upper end of the Wilson 95% confidence interval.
  double ci_high;
  // Seed that reproduces the estimate exactly.
  uint64_t seed;
} AbpercEstimate;

// Derivative estimates of the crossing probability with respect to the
// two retention probabilities, from pivotal-point counts.
typedef struct AbpercDerivative {
  // Estimated derivative with respect to the useful-point retention p.
  double d_dp;
  // Estimated derivative with respect to the useless-point retention q.
  double d_dq;
  // Standard error of `d_dp`.
  double std_err_p;
  // Standard error of `d_dq`.
  double std_err_q;
  // Total number of independent trials.
  uint64_t trials;
  // Seed that reproduces the estimate exactly.
  uint64_t seed;
} AbpercDerivative;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the underlying library as a static NUL-terminated string.
const char *abperc_version(void);

// Probability that the one-type geometric graph on a Poisson process of
// intensity `lambda` in the box [0,l]^d, with edges at distance <= r,
// has a component touching both slabs x0 <= r and x0 >= l - r.
enum AbpercStatus abperc_one_type_crossing(uint32_t d,
                                           double lambda,
                                           double r,
                                           double l,
                                           uint64_t trials,
                                           uint64_t seed,
                                           struct AbpercEstimate *out);

// Probability that the two-type graph (a-points of intensity `lambda`
// in [0,l]^d, b-points of intensity `mu` in its r-enlargement, edges
// only between types at distance <= r) crosses the box along the first
// axis.
enum AbpercStatus abperc_ab_crossing(uint32_t d,
                                     double lambda,
                                     double mu,
                                     double r,
                                     double l,
                                     uint64_t trials,
                                     uint64_t seed,
                                     struct AbpercEstimate *out);

// Probability that the (p,q)-thinned a-process connects the unit ball
// to the outside of the ball of radius `n` in the distance-1 graph.
// Points are classified useful when some b-point lies within 1/2.
enum AbpercStatus abperc_theta(uint32_t d,
                               double lambda0,
                               double mu,
                               double p,
                               double q,
                               uint32_t n,
                               double sim_margin,
                               uint64_t trials,
                               uint64_t seed,
                               struct AbpercEstimate *out);

// The same annulus crossing without thinning: only the a-process is
// sampled, at intensity `lambda0`. Bit-identical to [`abperc_theta`]
// with p = q = 1.
enum AbpercStatus abperc_annulus_crossing(uint32_t d,
                                          double lambda0,
                                          uint32_t n,
                                          double sim_margin,
                                          uint64_t trials,
                                          uint64_t seed,
                                          struct AbpercEstimate *out);

// Derivatives of the annulus-crossing probability with respect to both
// retention probabilities, estimated from pivotal-point counts. Requires
// p and q strictly inside (0,1).
enum AbpercStatus abperc_russo_pivotal(uint32_t d,
                                       double lambda0,
                                       double mu,
                                       double p,
                                       double q,
                                       uint32_t n,
                                       double sim_margin,
                                       uint64_t trials,
                                       uint64_t seed,
                                       struct AbpercDerivative *out);

// Bisect the intensity of the one-type model to a bracket of width
// <= tol around the intensity where the box-crossing probability passes
// `target`. On success `*out` owns a handle; on failure it is null.
enum AbpercStatus abperc_threshold_lambda(uint32_t d,
                                          double r,
                                          double l,
                                          double lo,
                                          double hi,
                                          double target,
                                          double tol,
                                          uint64_t trials_per_eval,
                                          uint64_t seed,
                                          struct AbpercThreshold **out);

// Bisect the b-intensity of the two-type model, at fixed a-intensity
// `lambda`, to a bracket around the target box-crossing probability.
enum AbpercStatus abperc_threshold_mu(uint32_t d,
                                      double lambda,
                                      double r,
                                      double l,
                                      double lo,
                                      double hi,
                                      double target,
                                      double tol,
                                      uint64_t trials_per_eval,
                                      uint64_t seed,
                                      struct AbpercThreshold **out);

// Final bracket [low, high] of a completed search.
enum AbpercStatus abperc_threshold_bracket(const struct AbpercThreshold *handle,
                                           double *out_low,
                                           double *out_high);

// True when the bracket reached the requested width; false when the
// search stopped early because both endpoint confidence intervals
// contained the target.
enum AbpercStatus abperc_threshold_converged(const struct AbpercThreshold *handle, bool *out);

// Number of parameter evaluations recorded during the search.
enum AbpercStatus abperc_threshold_trace_len(const struct AbpercThreshold *handle, size_t *out);

// Fetch one recorded evaluation: the parameter value tried and the
// estimate observed there. `index` must be below the trace length.
enum AbpercStatus abperc_threshold_trace_get(const struct AbpercThreshold *handle,
                                             size_t index,
                                             double *out_param,
                                             struct AbpercEstimate *out_estimate);

// Release a threshold handle. Null is accepted and ignored.
void abperc_threshold_free(struct AbpercThreshold *handle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ABPERC_H */
