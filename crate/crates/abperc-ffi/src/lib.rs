//! C interface to the abperc continuum percolation estimators.
//!
//! Every function returns an [`AbpercStatus`] and writes its results
//! through out-pointers, so the ABI carries no Rust types. Threshold
//! searches hand back an opaque handle that must be released with
//! [`abperc_threshold_free`]. Panics never unwind across the boundary:
//! they are caught and reported as `Panic`.
//!
//! The generated header lives at `include/abperc.h` and is refreshed on
//! every build.

use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use abperc::estimators::{
    estimate_ab_crossing, estimate_annulus_crossing, estimate_one_type_crossing,
    estimate_theta_n, russo_pivotal_estimate, threshold_bisect, AnnulusSpec, BisectOptions,
    BisectStatus, CrossingEstimate, ThresholdEstimate,
};
use abperc::Error;

/// Outcome of a call. Anything other than `Ok` means the out-parameters
/// were left untouched (except handle out-pointers, which are nulled).
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbpercStatus {
    /// Success; out-parameters are filled in.
    Ok = 0,
    /// An argument was malformed: bad dimension, range, or ordering.
    InvalidArgument = 1,
    /// A stated precondition fails for the given configuration.
    Hypothesis = 2,
    /// Bisection endpoints do not straddle the target with
    /// confidence-interval separation.
    Bracket = 3,
    /// Too few observations to form the requested aggregate.
    InsufficientData = 4,
    /// An i/o error from the underlying library.
    Io = 5,
    /// A required pointer argument was null.
    NullPointer = 6,
    /// The computation panicked; treat the library state as suspect.
    Panic = 7,
}

/// A Bernoulli estimate: raw counts plus a Wilson 95% interval.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct AbpercEstimate {
    /// Number of trials in which the event occurred.
    pub hits: u64,
    /// Total number of independent trials.
    pub trials: u64,
    /// Point estimate hits / trials.
    pub p_hat: f64,
    /// Binomial standard error at the point estimate.
    pub std_err: f64,
    /// Lower end of the Wilson 95% confidence interval.
    pub ci_low: f64,
    /// Upper end of the Wilson 95% confidence interval.
    pub ci_high: f64,
    /// Seed that reproduces the estimate exactly.
    pub seed: u64,
}

/// Derivative estimates of the crossing probability with respect to the
/// two retention probabilities, from pivotal-point counts.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct AbpercDerivative {
    /// Estimated derivative with respect to the useful-point retention p.
    pub d_dp: f64,
    /// Estimated derivative with respect to the useless-point retention q.
    pub d_dq: f64,
    /// Standard error of `d_dp`.
    pub std_err_p: f64,
    /// Standard error of `d_dq`.
    pub std_err_q: f64,
    /// Total number of independent trials.
    pub trials: u64,
    /// Seed that reproduces the estimate exactly.
    pub seed: u64,
}

/// Opaque result of a threshold search. Inspect it through the
/// `abperc_threshold_*` accessors and release it with
/// [`abperc_threshold_free`].
pub struct AbpercThreshold {
    inner: ThresholdEstimate,
}

fn status_of(err: &Error) -> AbpercStatus {
    match err {
        Error::InvalidArgument(_) => AbpercStatus::InvalidArgument,
        Error::Hypothesis(_) => AbpercStatus::Hypothesis,
        Error::Bracket { .. } => AbpercStatus::Bracket,
        Error::InsufficientData(_) => AbpercStatus::InsufficientData,
        Error::Io(_) => AbpercStatus::Io,
    }
}

fn converted(est: &CrossingEstimate) -> AbpercEstimate {
    AbpercEstimate {
        hits: est.hits,
        trials: est.trials,
        p_hat: est.p_hat,
        std_err: est.std_err,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        seed: est.seed,
    }
}

fn guarded<F: FnOnce() -> AbpercStatus>(f: F) -> AbpercStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(AbpercStatus::Panic)
}

fn write_estimate(
    out: *mut AbpercEstimate,
    result: abperc::Result<CrossingEstimate>,
) -> AbpercStatus {
    match result {
        Ok(est) => {
            unsafe { *out = converted(&est) };
            AbpercStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Version of the underlying library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn abperc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Probability that the one-type geometric graph on a Poisson process of
/// intensity `lambda` in the box [0,l]^d, with edges at distance <= r,
/// has a component touching both slabs x0 <= r and x0 >= l - r.
#[no_mangle]
pub extern "C" fn abperc_one_type_crossing(
    d: u32,
    lambda: f64,
    r: f64,
    l: f64,
    trials: u64,
    seed: u64,
    out: *mut AbpercEstimate,
) -> AbpercStatus {
    guarded(|| {
        if out.is_null() {
            return AbpercStatus::NullPointer;
        }
        write_estimate(
            out,
            estimate_one_type_crossing(d as usize, lambda, r, l, trials, seed),
        )
    })
}

/// Probability that the two-type graph (a-points of intensity `lambda`
/// in [0,l]^d, b-points of intensity `mu` in its r-enlargement, edges
/// only between types at distance <= r) crosses the box along the first
/// axis.
#[no_mangle]
pub extern "C" fn abperc_ab_crossing(
    d: u32,
    lambda: f64,
    mu: f64,
    r: f64,
    l: f64,
    trials: u64,
    seed: u64,
    out: *mut AbpercEstimate,
) -> AbpercStatus {
    guarded(|| {
        if out.is_null() {
            return AbpercStatus::NullPointer;
        }
        write_estimate(
            out,
            estimate_ab_crossing(d as usize, lambda, mu, r, l, trials, seed),
        )
    })
}

/// Probability that the (p,q)-thinned a-process connects the unit ball
/// to the outside of the ball of radius `n` in the distance-1 graph.
/// Points are classified useful when some b-point lies within 1/2.
#[no_mangle]
pub extern "C" fn abperc_theta(
    d: u32,
    lambda0: f64,
    mu: f64,
    p: f64,
    q: f64,
    n: u32,
    sim_margin: f64,
    trials: u64,
    seed: u64,
    out: *mut AbpercEstimate,
) -> AbpercStatus {
    guarded(|| {
        if out.is_null() {
            return AbpercStatus::NullPointer;
        }
        let spec = match AnnulusSpec::new(d as usize, n, sim_margin) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        write_estimate(out, estimate_theta_n(lambda0, mu, p, q, spec, trials, seed))
    })
}

/// The same annulus crossing without thinning: only the a-process is
/// sampled, at intensity `lambda0`. Bit-identical to [`abperc_theta`]
/// with p = q = 1.
#[no_mangle]
pub extern "C" fn abperc_annulus_crossing(
    d: u32,
    lambda0: f64,
    n: u32,
    sim_margin: f64,
    trials: u64,
    seed: u64,
    out: *mut AbpercEstimate,
) -> AbpercStatus {
    guarded(|| {
        if out.is_null() {
            return AbpercStatus::NullPointer;
        }
        let spec = match AnnulusSpec::new(d as usize, n, sim_margin) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        write_estimate(out, estimate_annulus_crossing(lambda0, spec, trials, seed))
    })
}

/// Derivatives of the annulus-crossing probability with respect to both
/// retention probabilities, estimated from pivotal-point counts. Requires
/// p and q strictly inside (0,1).
#[no_mangle]
pub extern "C" fn abperc_russo_pivotal(
    d: u32,
    lambda0: f64,
    mu: f64,
    p: f64,
    q: f64,
    n: u32,
    sim_margin: f64,
    trials: u64,
    seed: u64,
    out: *mut AbpercDerivative,
) -> AbpercStatus {
    guarded(|| {
        if out.is_null() {
            return AbpercStatus::NullPointer;
        }
        let spec = match AnnulusSpec::new(d as usize, n, sim_margin) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        match russo_pivotal_estimate(lambda0, mu, p, q, spec, trials, seed) {
            Ok(est) => {
                unsafe {
                    *out = AbpercDerivative {
                        d_dp: est.d_dp,
                        d_dq: est.d_dq,
                        std_err_p: est.std_err_p,
                        std_err_q: est.std_err_q,
                        trials: est.trials,
                        seed: est.seed,
                    };
                }
                AbpercStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

fn new_handle(
    out: *mut *mut AbpercThreshold,
    result: abperc::Result<ThresholdEstimate>,
) -> AbpercStatus {
    match result {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(AbpercThreshold { inner })) };
            AbpercStatus::Ok
        }
        Err(e) => {
            unsafe { *out = std::ptr::null_mut() };
            status_of(&e)
        }
    }
}

/// Bisect the intensity of the one-type model to a bracket of width
/// <= tol around the intensity where the box-crossing probability passes
/// `target`. On success `*out` owns a handle; on failure it is null.
#[no_mangle]
pub extern "C" fn abperc_threshold_lambda(
    d: u32,
    r: f64,
    l: f64,
    lo: f64,
    hi: f64,
    target: f64,
    tol: f64,
    trials_per_eval: u64,
    seed: u64,
    out: *mut *mut AbpercThreshold,
) -> AbpercStatus {
    guarded(|| {
        if out.is_null() {
            return AbpercStatus::NullPointer;
        }
        let opts = BisectOptions {
            lo,
            hi,
            target,
            tol,
            trials_per_eval,
            surrogate: format!("one-type crossing of [0,{}]^{} at r={}", l, d, r),
        };
        new_handle(
            out,
            threshold_bisect(
                |lambda, trials| {
                    estimate_one_type_crossing(d as usize, lambda, r, l, trials, seed)
                },
                &opts,
            ),
        )
    })
}

/// Bisect the b-intensity of the two-type model, at fixed a-intensity
/// `lambda`, to a bracket around the target box-crossing probability.
#[no_mangle]
pub extern "C" fn abperc_threshold_mu(
    d: u32,
    lambda: f64,
    r: f64,
    l: f64,
    lo: f64,
    hi: f64,
    target: f64,
    tol: f64,
    trials_per_eval: u64,
    seed: u64,
    out: *mut *mut AbpercThreshold,
) -> AbpercStatus {
    guarded(|| {
        if out.is_null() {
            return AbpercStatus::NullPointer;
        }
        let opts = BisectOptions {
            lo,
            hi,
            target,
            tol,
            trials_per_eval,
            surrogate: format!(
                "two-type crossing of [0,{}]^{} at lambda={}, r={}",
                l, d, lambda, r
            ),
        };
        new_handle(
            out,
            threshold_bisect(
                |mu, trials| estimate_ab_crossing(d as usize, lambda, mu, r, l, trials, seed),
                &opts,
            ),
        )
    })
}

/// Final bracket [low, high] of a completed search.
#[no_mangle]
pub extern "C" fn abperc_threshold_bracket(
    handle: *const AbpercThreshold,
    out_low: *mut f64,
    out_high: *mut f64,
) -> AbpercStatus {
    guarded(|| {
        if handle.is_null() || out_low.is_null() || out_high.is_null() {
            return AbpercStatus::NullPointer;
        }
        let h = unsafe { &*handle };
        unsafe {
            *out_low = h.inner.bracket_low;
            *out_high = h.inner.bracket_high;
        }
        AbpercStatus::Ok
    })
}

/// True when the bracket reached the requested width; false when the
/// search stopped early because both endpoint confidence intervals
/// contained the target.
#[no_mangle]
pub extern "C" fn abperc_threshold_converged(
    handle: *const AbpercThreshold,
    out: *mut bool,
) -> AbpercStatus {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            return AbpercStatus::NullPointer;
        }
        let h = unsafe { &*handle };
        unsafe { *out = h.inner.status == BisectStatus::Converged };
        AbpercStatus::Ok
    })
}

/// Number of parameter evaluations recorded during the search.
#[no_mangle]
pub extern "C" fn abperc_threshold_trace_len(
    handle: *const AbpercThreshold,
    out: *mut usize,
) -> AbpercStatus {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            return AbpercStatus::NullPointer;
        }
        let h = unsafe { &*handle };
        unsafe { *out = h.inner.trace.len() };
        AbpercStatus::Ok
    })
}

/// Fetch one recorded evaluation: the parameter value tried and the
/// estimate observed there. `index` must be below the trace length.
#[no_mangle]
pub extern "C" fn abperc_threshold_trace_get(
    handle: *const AbpercThreshold,
    index: usize,
    out_param: *mut f64,
    out_estimate: *mut AbpercEstimate,
) -> AbpercStatus {
    guarded(|| {
        if handle.is_null() || out_param.is_null() || out_estimate.is_null() {
            return AbpercStatus::NullPointer;
        }
        let h = unsafe { &*handle };
        match h.inner.trace.get(index) {
            Some((param, est)) => {
                unsafe {
                    *out_param = *param;
                    *out_estimate = converted(est);
                }
                AbpercStatus::Ok
            }
            None => AbpercStatus::InvalidArgument,
        }
    })
}

/// Release a threshold handle. Null is accepted and ignored.
#[no_mangle]
pub extern "C" fn abperc_threshold_free(handle: *mut AbpercThreshold) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    #[test]
    fn version_is_static_and_nonempty() {
        let v = abperc_version();
        assert!(!v.is_null());
        let s = unsafe { CStr::from_ptr(v) }.to_str().unwrap();
        assert!(s.contains('.'));
    }

    #[test]
    fn one_type_matches_direct_call() {
        let mut out = AbpercEstimate {
            hits: 0,
            trials: 0,
            p_hat: 0.0,
            std_err: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            seed: 0,
        };
        let status = abperc_one_type_crossing(2, 1.2, 1.0, 8.0, 300, 17, &mut out);
        assert_eq!(status, AbpercStatus::Ok);
        let direct = estimate_one_type_crossing(2, 1.2, 1.0, 8.0, 300, 17).unwrap();
        assert_eq!(out.hits, direct.hits);
        assert_eq!(out.trials, 300);
        assert_eq!(out.p_hat, direct.p_hat);
        assert_eq!(out.ci_low, direct.ci_low);
        assert_eq!(out.ci_high, direct.ci_high);
        assert_eq!(out.seed, 17);
    }

    #[test]
    fn null_out_pointer_is_rejected() {
        let status = abperc_one_type_crossing(2, 1.0, 1.0, 8.0, 10, 0, ptr::null_mut());
        assert_eq!(status, AbpercStatus::NullPointer);
        let status = abperc_threshold_bracket(ptr::null(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(status, AbpercStatus::NullPointer);
    }

    #[test]
    fn invalid_arguments_map_to_status() {
        let mut out = AbpercEstimate {
            hits: 0,
            trials: 0,
            p_hat: 0.0,
            std_err: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            seed: 0,
        };
        // dimension zero
        let status = abperc_one_type_crossing(0, 1.0, 1.0, 8.0, 10, 0, &mut out);
        assert_eq!(status, AbpercStatus::InvalidArgument);
        // box too small relative to the radius
        let status = abperc_one_type_crossing(2, 1.0, 1.0, 3.0, 10, 0, &mut out);
        assert_eq!(status, AbpercStatus::InvalidArgument);
        // retention probability out of range
        let status = abperc_theta(2, 1.0, 1.0, 1.5, 0.5, 3, 1.0, 10, 0, &mut out);
        assert_eq!(status, AbpercStatus::InvalidArgument);
    }

    #[test]
    fn theta_at_unit_retention_matches_unthinned() {
        let mut thinned = AbpercEstimate {
            hits: 0,
            trials: 0,
            p_hat: 0.0,
            std_err: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            seed: 0,
        };
        let mut plain = thinned;
        let s1 = abperc_theta(2, 1.5, 1.0, 1.0, 1.0, 3, 1.0, 200, 9, &mut thinned);
        let s2 = abperc_annulus_crossing(2, 1.5, 3, 1.0, 200, 9, &mut plain);
        assert_eq!(s1, AbpercStatus::Ok);
        assert_eq!(s2, AbpercStatus::Ok);
        assert_eq!(thinned.hits, plain.hits);
    }

    #[test]
    fn russo_reports_nonnegative_p_derivative() {
        let mut out = AbpercDerivative {
            d_dp: f64::NAN,
            d_dq: f64::NAN,
            std_err_p: f64::NAN,
            std_err_q: f64::NAN,
            trials: 0,
            seed: 0,
        };
        let status = abperc_russo_pivotal(2, 2.0, 1.0, 0.7, 0.7, 3, 1.0, 400, 21, &mut out);
        assert_eq!(status, AbpercStatus::Ok);
        assert!(out.d_dp >= 0.0);
        assert!(out.std_err_p.is_finite());
        assert_eq!(out.trials, 400);
    }

    #[test]
    fn threshold_handle_round_trip() {
        let mut handle: *mut AbpercThreshold = ptr::null_mut();
        let status =
            abperc_threshold_lambda(2, 1.0, 8.0, 0.8, 2.5, 0.5, 0.3, 400, 5, &mut handle);
        assert_eq!(status, AbpercStatus::Ok);
        assert!(!handle.is_null());

        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        assert_eq!(
            abperc_threshold_bracket(handle, &mut lo, &mut hi),
            AbpercStatus::Ok
        );
        assert!(0.8 <= lo && lo < hi && hi <= 2.5);

        let mut n = 0usize;
        assert_eq!(
            abperc_threshold_trace_len(handle, &mut n),
            AbpercStatus::Ok
        );
        assert!(n >= 2);

        let mut param = 0.0f64;
        let mut est = AbpercEstimate {
            hits: 0,
            trials: 0,
            p_hat: 0.0,
            std_err: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            seed: 0,
        };
        for i in 0..n {
            assert_eq!(
                abperc_threshold_trace_get(handle, i, &mut param, &mut est),
                AbpercStatus::Ok
            );
            assert!((0.8..=2.5).contains(&param));
            assert_eq!(est.trials, 400);
        }
        assert_eq!(
            abperc_threshold_trace_get(handle, n, &mut param, &mut est),
            AbpercStatus::InvalidArgument
        );

        let mut converged = false;
        assert_eq!(
            abperc_threshold_converged(handle, &mut converged),
            AbpercStatus::Ok
        );

        abperc_threshold_free(handle);
        abperc_threshold_free(ptr::null_mut());
    }

    #[test]
    fn unbracketed_search_reports_bracket_status() {
        let mut handle: *mut AbpercThreshold = ptr::null_mut();
        // both endpoints far above the crossing threshold
        let status =
            abperc_threshold_lambda(2, 1.0, 8.0, 5.0, 6.0, 0.5, 0.2, 200, 5, &mut handle);
        assert_eq!(status, AbpercStatus::Bracket);
        assert!(handle.is_null());
    }
}
