//! Monte Carlo estimators for crossing probabilities, thresholds,
//! derivatives, and the pivotal-ratio decay experiment.
//!
//! Every estimator keys its randomness by `(master_seed, trial, lane)` and
//! aggregates per-trial outcomes as exact integer tallies, so results are
//! bit-identical whether trials run sequentially or in parallel and
//! independent of thread count.
//!
//! The annulus family works on the window B_{n+sim_margin}: a-points are
//! sampled there, b-points on its (1/2)-enlargement so usefulness is
//! decided without boundary bias, the retained graph connects points at
//! distance <= 1, and the crossing event asks for one component holding a
//! vertex in B_1 and a vertex beyond radius n. Any component that reaches
//! beyond radius n does so through a vertex within n+1 (edges have length
//! at most 1), so the event is decided entirely inside B_{n+1} and its
//! value does not depend on sim_margin.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{sample_poisson, Point, PointConfig, Region, Role};
use crate::graphs::DisjointSet;
use crate::grid::build_cell_grid;
use crate::rng::{Lane, RngStream};
use crate::thinning::{classify_useful, MarkedConfig, ThinningParams};

/// 97.5% standard-normal quantile, for 95% two-sided intervals.
const Z_95: f64 = 1.959963984540054;

/// Radius within which a b-point makes an a-point useful.
const USEFULNESS_RADIUS: f64 = 0.5;

/// Geometry of the annulus crossing event: dimension, the crossed radius
/// `n`, and how far beyond `n` points are sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusSpec {
    d: usize,
    n: u32,
    sim_margin: f64,
}

impl AnnulusSpec {
    /// `n >= 2` keeps B_1 and the outside of B_n disjoint; `sim_margin >=
    /// 1` guarantees witnesses beyond radius n exist inside the window
    /// (edges have length at most 1).
    pub fn new(d: usize, n: u32, sim_margin: f64) -> Result<AnnulusSpec> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if n < 2 {
            return Err(Error::invalid(format!("annulus radius n must be at least 2, got {n}")));
        }
        if !(sim_margin >= 1.0) || !sim_margin.is_finite() {
            return Err(Error::invalid(format!("sim_margin must be at least 1, got {sim_margin}")));
        }
        Ok(AnnulusSpec { d, n, sim_margin })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sim_margin(&self) -> f64 {
        self.sim_margin
    }

    /// Sampling window for the a-process.
    pub fn window(&self) -> Region {
        Region::origin_ball(self.d, self.n as f64 + self.sim_margin).expect("validated")
    }
}

/// A binomial proportion with its 95% Wilson interval.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl CrossingEstimate {
    pub fn from_counts(hits: u64, trials: u64, seed: u64) -> CrossingEstimate {
        assert!(trials >= 1 && hits <= trials);
        let n = trials as f64;
        let p_hat = hits as f64 / n;
        let std_err = (p_hat * (1.0 - p_hat) / n).sqrt();
        let z2 = Z_95 * Z_95;
        let denom = 1.0 + z2 / n;
        let center = (p_hat + z2 / (2.0 * n)) / denom;
        let half = Z_95 * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        // The min/max with p_hat absorb 1-ulp rounding at the extremes so
        // the interval always contains the point estimate.
        CrossingEstimate {
            hits,
            trials,
            p_hat,
            std_err,
            ci_low: (center - half).max(0.0).min(p_hat),
            ci_high: (center + half).min(1.0).max(p_hat),
            seed,
        }
    }

    pub fn ci_contains(&self, v: f64) -> bool {
        self.ci_low <= v && v <= self.ci_high
    }
}

/// Mean pivotal counts per trial: the Monte Carlo derivative of the
/// crossing probability in the two retention probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeEstimate {
    pub d_dp: f64,
    pub d_dq: f64,
    pub std_err_p: f64,
    pub std_err_q: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Outcome frequencies of the added-point experiment at one location.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioEstimate {
    pub x: Point,
    /// Frequency of (added point is decisive) and (no b-point nearby).
    pub num_hat: f64,
    /// Frequency of (added point is decisive) and (a b-point is nearby).
    pub den_hat: f64,
    pub num_count: u64,
    pub den_count: u64,
    /// `num_hat / den_hat`, absent when the denominator never occurred.
    pub ratio: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

/// Log-linear least-squares fit of ratio-vs-mu data.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    /// exp(intercept): the fitted ratio at mu = 0.
    pub c_hat: f64,
    /// Slope of log(ratio) against mu.
    pub slope: f64,
    /// Root-mean-square residual of the fit in log space.
    pub fit_residual: f64,
    /// Number of points with positive ratios actually used.
    pub n_used: usize,
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    Ok(())
}

fn check_intensity(name: &str, v: f64, strictly_positive: bool) -> Result<()> {
    if !v.is_finite() || v < 0.0 || (strictly_positive && v == 0.0) {
        let bound = if strictly_positive { "> 0" } else { ">= 0" };
        return Err(Error::invalid(format!("{name} must be finite and {bound}, got {v}")));
    }
    Ok(())
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::invalid(format!("{name} must lie strictly inside (0, 1), got {v}")));
    }
    Ok(())
}

/// One sampled annulus trial: classified a-points, their distance-1
/// adjacency, and witness flags for the crossing event.
struct AnnulusScene {
    marked: MarkedConfig,
    adj: Vec<Vec<u32>>,
    /// |x| <= 1: candidate witnesses on the inner side.
    in_inner: Vec<bool>,
    /// |x| >= n: witnesses beyond the crossed radius (the boundary itself
    /// is a measure-zero tie kept by the closed convention).
    in_outer: Vec<bool>,
    /// |x| <= n+1: where an added or removed point can influence the event.
    in_domain: Vec<bool>,
}

fn build_annulus_scene(
    spec: AnnulusSpec,
    lambda0: f64,
    mu: f64,
    extra: Option<&Point>,
    master_seed: u64,
    trial: u64,
) -> Result<AnnulusScene> {
    let window = spec.window();
    let b_window = window.enlarge(USEFULNESS_RADIUS)?;
    let mut a = sample_poisson(
        Role::A,
        lambda0,
        &window,
        RngStream::for_trial(master_seed, trial, Lane::PointsA),
    )?;
    if let Some(x) = extra {
        a.points.push(x.clone());
        a = PointConfig::new(a.points, Role::A, lambda0, window)?;
    }
    let b = sample_poisson(
        Role::B,
        mu,
        &b_window,
        RngStream::for_trial(master_seed, trial, Lane::PointsB),
    )?;
    let marked = classify_useful(
        &a,
        &b,
        USEFULNESS_RADIUS,
        RngStream::for_trial(master_seed, trial, Lane::Thinning),
    )?;

    let points = &marked.base.points;
    let grid = build_cell_grid(points, 1.0, spec.d);
    let adj: Vec<Vec<u32>> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut nbr = grid.neighbors_within(p.coords(), 1.0);
            nbr.retain(|&j| j as usize != i);
            nbr
        })
        .collect();
    let norms: Vec<f64> = points.iter().map(|p| p.norm()).collect();
    let n = spec.n as f64;
    Ok(AnnulusScene {
        adj,
        in_inner: norms.iter().map(|&r| r <= 1.0).collect(),
        in_outer: norms.iter().map(|&r| r >= n).collect(),
        in_domain: norms.iter().map(|&r| r <= n + 1.0).collect(),
        marked,
    })
}

impl AnnulusScene {
    /// Whether the retained graph joins an inner witness to an outer one.
    fn crossing(&self, mask: &[bool]) -> bool {
        crossing_from_parts(&self.adj, mask, &self.in_inner, &self.in_outer)
    }
}

fn crossing_from_parts(
    adj: &[Vec<u32>],
    mask: &[bool],
    in_inner: &[bool],
    in_outer: &[bool],
) -> bool {
    let v = adj.len();
    let mut ds = DisjointSet::new(v);
    for i in 0..v {
        if !mask[i] {
            continue;
        }
        for &j in &adj[i] {
            if j as usize > i && mask[j as usize] {
                ds.union(i as u32, j);
            }
        }
    }
    let mut inner_flag = vec![false; v];
    let mut outer_flag = vec![false; v];
    for i in 0..v {
        if !mask[i] || !(in_inner[i] || in_outer[i]) {
            continue;
        }
        let r = ds.find(i as u32) as usize;
        if in_inner[i] {
            inner_flag[r] = true;
        }
        if in_outer[i] {
            outer_flag[r] = true;
        }
        if inner_flag[r] && outer_flag[r] {
            return true;
        }
    }
    false
}

/// Probability that the (p,q)-thinned a-process connects B_1 to the
/// outside of B_n in the distance-1 graph.
pub fn estimate_theta_n(
    lambda0: f64,
    mu: f64,
    p: f64,
    q: f64,
    spec: AnnulusSpec,
    trials: u64,
    seed: u64,
) -> Result<CrossingEstimate> {
    check_intensity("lambda0", lambda0, true)?;
    check_intensity("mu", mu, false)?;
    let params = ThinningParams::new(p, q)?;
    check_trials(trials)?;
    let hits = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64> {
            let scene = build_annulus_scene(spec, lambda0, mu, None, seed, trial)?;
            let mask = scene.marked.retained_mask(params);
            Ok(scene.crossing(&mask) as u64)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    Ok(CrossingEstimate::from_counts(hits, trials, seed))
}

/// The same crossing probability without any thinning: only the a-process
/// is sampled. Bit-identical to [`estimate_theta_n`] at p = q = 1 because
/// the a-points lane is independent of the other lanes.
pub fn estimate_annulus_crossing(
    lambda0: f64,
    spec: AnnulusSpec,
    trials: u64,
    seed: u64,
) -> Result<CrossingEstimate> {
    check_intensity("lambda0", lambda0, true)?;
    check_trials(trials)?;
    let n = spec.n as f64;
    let hits = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64> {
            let window = spec.window();
            let a = sample_poisson(
                Role::A,
                lambda0,
                &window,
                RngStream::for_trial(seed, trial, Lane::PointsA),
            )?;
            let grid = build_cell_grid(&a.points, 1.0, spec.d);
            let adj: Vec<Vec<u32>> = a
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut nbr = grid.neighbors_within(p.coords(), 1.0);
                    nbr.retain(|&j| j as usize != i);
                    nbr
                })
                .collect();
            let norms: Vec<f64> = a.points.iter().map(|p| p.norm()).collect();
            let in_inner: Vec<bool> = norms.iter().map(|&r| r <= 1.0).collect();
            let in_outer: Vec<bool> = norms.iter().map(|&r| r >= n).collect();
            let mask = vec![true; a.len()];
            Ok(crossing_from_parts(&adj, &mask, &in_inner, &in_outer) as u64)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    Ok(CrossingEstimate::from_counts(hits, trials, seed))
}

/// Slab regions for left-right box crossings, spanning the enlarged
/// window so witnesses of either type count.
fn slab_regions(d: usize, r: f64, l: f64) -> Result<(Region, Region)> {
    let lo_all: Vec<f64> = std::iter::repeat(-r).take(d).collect();
    let hi_all: Vec<f64> = std::iter::repeat(l + r).take(d).collect();
    let mut left_hi = hi_all.clone();
    left_hi[0] = r;
    let mut right_lo = lo_all.clone();
    right_lo[0] = l - r;
    Ok((
        Region::axis_box(
            Point::new(lo_all.iter().copied())?,
            Point::new(left_hi.iter().copied())?,
        )?,
        Region::axis_box(
            Point::new(right_lo.iter().copied())?,
            Point::new(hi_all.iter().copied())?,
        )?,
    ))
}

fn check_box_args(d: usize, r: f64, l: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("radius must be positive and finite, got {r}")));
    }
    if !l.is_finite() || !(l > 4.0 * r) {
        return Err(Error::invalid(format!("box side must satisfy L > 4r, got L={l} r={r}")));
    }
    Ok(())
}

/// Probability that the two-type graph on a-points in [0,L]^d and
/// b-points in its r-enlargement (edges only between types, at distance
/// <= r) has a component touching both the slab x0 <= r and the slab
/// x0 >= L-r.
pub fn estimate_ab_crossing(
    d: usize,
    lambda: f64,
    mu: f64,
    r: f64,
    l: f64,
    trials: u64,
    seed: u64,
) -> Result<CrossingEstimate> {
    check_box_args(d, r, l)?;
    check_intensity("lambda", lambda, false)?;
    check_intensity("mu", mu, false)?;
    check_trials(trials)?;
    let (left, right) = slab_regions(d, r, l)?;
    let hits = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64> {
            let a_window = Region::cube(d, l)?;
            let b_window = a_window.enlarge(r)?;
            let a = sample_poisson(
                Role::A,
                lambda,
                &a_window,
                RngStream::for_trial(seed, trial, Lane::PointsA),
            )?;
            let b = sample_poisson(
                Role::B,
                mu,
                &b_window,
                RngStream::for_trial(seed, trial, Lane::PointsB),
            )?;
            let n_a = a.len();
            let n = n_a + b.len();
            let grid = build_cell_grid(&a.points, r, d);
            let mut ds = DisjointSet::new(n);
            let mut nbr = Vec::new();
            for (j, y) in b.points.iter().enumerate() {
                grid.neighbors_within_into(y.coords(), r, &mut nbr);
                for &i in &nbr {
                    ds.union(i, (n_a + j) as u32);
                }
            }
            let coords = |v: usize| {
                if v < n_a {
                    &a.points[v]
                } else {
                    &b.points[v - n_a]
                }
            };
            let mut left_flag = vec![false; n];
            let mut right_flag = vec![false; n];
            let mut crossed = false;
            for v in 0..n {
                let p = coords(v);
                let in_left = left.contains(p);
                let in_right = right.contains(p);
                if !(in_left || in_right) {
                    continue;
                }
                let root = ds.find(v as u32) as usize;
                if in_left {
                    left_flag[root] = true;
                }
                if in_right {
                    right_flag[root] = true;
                }
                if left_flag[root] && right_flag[root] {
                    crossed = true;
                    break;
                }
            }
            debug_assert!(
                ab_domination_holds(&mut ds, &a, &b, r, &left, &right),
                "two-type crossing between a-witnesses must imply a one-type crossing at 2r"
            );
            Ok(crossed as u64)
        })
        .try_reduce(|| 0u64, |x, y| Ok(x + y))?;
    Ok(CrossingEstimate::from_counts(hits, trials, seed))
}

/// Debug check: whenever the two-type graph joins an a-witness in the left
/// slab to one in the right slab, the one-type graph on a-points at
/// doubled radius joins a-witnesses of the same slabs (consecutive
/// a-points on an alternating path are within 2r of each other).
fn ab_domination_holds(
    ds: &mut DisjointSet,
    a: &PointConfig,
    b: &PointConfig,
    r: f64,
    left: &Region,
    right: &Region,
) -> bool {
    let _ = b;
    let n_a = a.len();
    let mut left_flag = std::collections::HashMap::new();
    let mut right_flag = std::collections::HashMap::new();
    let mut ab_crosses = false;
    for (i, p) in a.points.iter().enumerate() {
        let root = ds.find(i as u32);
        if left.contains(p) {
            left_flag.insert(root, true);
        }
        if right.contains(p) {
            right_flag.insert(root, true);
        }
        if left_flag.contains_key(&root) && right_flag.contains_key(&root) {
            ab_crosses = true;
            break;
        }
    }
    if !ab_crosses {
        return true;
    }
    let labels = match crate::graphs::one_type_components(a, 2.0 * r) {
        Ok(l) => l,
        Err(_) => return false,
    };
    let mut l_flag = vec![false; n_a];
    let mut r_flag = vec![false; n_a];
    for (i, p) in a.points.iter().enumerate() {
        let root = labels.labels[i] as usize;
        if left.contains(p) {
            l_flag[root] = true;
        }
        if right.contains(p) {
            r_flag[root] = true;
        }
        if l_flag[root] && r_flag[root] {
            return true;
        }
    }
    false
}

/// Probability that the one-type graph on points in [0,L]^d with edges at
/// distance <= r has a component touching both slabs x0 <= r and
/// x0 >= L-r.
pub fn estimate_one_type_crossing(
    d: usize,
    lambda: f64,
    r: f64,
    l: f64,
    trials: u64,
    seed: u64,
) -> Result<CrossingEstimate> {
    check_box_args(d, r, l)?;
    check_intensity("lambda", lambda, false)?;
    check_trials(trials)?;
    let (left, right) = slab_regions(d, r, l)?;
    let hits = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<u64> {
            let window = Region::cube(d, l)?;
            let x = sample_poisson(
                Role::A,
                lambda,
                &window,
                RngStream::for_trial(seed, trial, Lane::PointsA),
            )?;
            let n = x.len();
            let grid = build_cell_grid(&x.points, r, d);
            let mut ds = DisjointSet::new(n);
            let mut nbr = Vec::new();
            for i in 0..n {
                grid.neighbors_within_into(x.points[i].coords(), r, &mut nbr);
                for &j in &nbr {
                    if (j as usize) > i {
                        ds.union(i as u32, j);
                    }
                }
            }
            let mut left_flag = vec![false; n];
            let mut right_flag = vec![false; n];
            let mut crossed = false;
            for (i, p) in x.points.iter().enumerate() {
                let in_left = left.contains(p);
                let in_right = right.contains(p);
                if !(in_left || in_right) {
                    continue;
                }
                let root = ds.find(i as u32) as usize;
                if in_left {
                    left_flag[root] = true;
                }
                if in_right {
                    right_flag[root] = true;
                }
                if left_flag[root] && right_flag[root] {
                    crossed = true;
                    break;
                }
            }
            Ok(crossed as u64)
        })
        .try_reduce(|| 0u64, |x, y| Ok(x + y))?;
    Ok(CrossingEstimate::from_counts(hits, trials, seed))
}

/// Why a bisection stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BisectStatus {
    /// The bracket reached the requested width.
    Converged,
    /// The estimates at both bracket endpoints have confidence intervals
    /// containing the target: inconclusive at this trial budget.
    CiOverlap,
}

/// Result of a threshold search: a bracket around the parameter where the
/// estimated probability passes the target, with the full evaluation
/// trace.
#[derive(Clone, Debug)]
pub struct ThresholdEstimate {
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub target_prob: f64,
    /// Human-readable description of the finite-size crossing event used.
    pub surrogate: String,
    pub trace: Vec<(f64, CrossingEstimate)>,
    pub status: BisectStatus,
}

#[derive(Clone, Debug)]
pub struct BisectOptions {
    pub lo: f64,
    pub hi: f64,
    pub target: f64,
    pub tol: f64,
    pub trials_per_eval: u64,
    pub surrogate: String,
}

/// Bisect a monotone nondecreasing probability curve to a bracket of
/// width <= tol around the target level.
///
/// `prob(parameter, trials)` evaluates the curve. The initial endpoints
/// must be separated from the target by their confidence intervals;
/// otherwise a bracket error carrying both endpoint estimates is
/// returned. Stops early (status [`BisectStatus::CiOverlap`]) when the
/// estimates at both current endpoints have intervals containing the
/// target, since further halving would only chase noise.
pub fn threshold_bisect<F>(mut prob: F, opts: &BisectOptions) -> Result<ThresholdEstimate>
where
    F: FnMut(f64, u64) -> Result<CrossingEstimate>,
{
    if !(opts.lo < opts.hi) || !opts.lo.is_finite() || !opts.hi.is_finite() {
        return Err(Error::invalid(format!(
            "bisection needs finite lo < hi, got {} and {}",
            opts.lo, opts.hi
        )));
    }
    if !(opts.target > 0.0 && opts.target < 1.0) {
        return Err(Error::invalid(format!(
            "target probability must lie in (0, 1), got {}",
            opts.target
        )));
    }
    if !(opts.tol > 0.0) || !opts.tol.is_finite() {
        return Err(Error::invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    check_trials(opts.trials_per_eval)?;

    let mut trace = Vec::new();
    let e_lo = prob(opts.lo, opts.trials_per_eval)?;
    trace.push((opts.lo, e_lo.clone()));
    let e_hi = prob(opts.hi, opts.trials_per_eval)?;
    trace.push((opts.hi, e_hi.clone()));
    if !(e_lo.ci_high < opts.target && opts.target < e_hi.ci_low) {
        return Err(Error::Bracket {
            target: opts.target,
            lo: opts.lo,
            p_lo: e_lo.p_hat,
            lo_ci_low: e_lo.ci_low,
            lo_ci_high: e_lo.ci_high,
            hi: opts.hi,
            p_hi: e_hi.p_hat,
            hi_ci_low: e_hi.ci_low,
            hi_ci_high: e_hi.ci_high,
        });
    }

    let (mut lo, mut hi) = (opts.lo, opts.hi);
    let (mut lo_est, mut hi_est) = (e_lo, e_hi);
    let status = loop {
        if hi - lo <= opts.tol {
            break BisectStatus::Converged;
        }
        if lo_est.ci_contains(opts.target) && hi_est.ci_contains(opts.target) {
            break BisectStatus::CiOverlap;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Float resolution exhausted.
            break BisectStatus::Converged;
        }
        let e = prob(mid, opts.trials_per_eval)?;
        trace.push((mid, e.clone()));
        if e.p_hat < opts.target {
            lo = mid;
            lo_est = e;
        } else {
            hi = mid;
            hi_est = e;
        }
    };
    Ok(ThresholdEstimate {
        bracket_low: lo,
        bracket_high: hi,
        target_prob: opts.target,
        surrogate: opts.surrogate.clone(),
        trace,
        status,
    })
}

/// Per-trial tallies of decisive (pivotal) points, split by usefulness.
#[derive(Clone, Copy, Default)]
struct PivotTally {
    useful_sum: u64,
    useless_sum: u64,
    useful_sumsq: u128,
    useless_sumsq: u128,
}

impl PivotTally {
    fn add(self, other: PivotTally) -> PivotTally {
        PivotTally {
            useful_sum: self.useful_sum + other.useful_sum,
            useless_sum: self.useless_sum + other.useless_sum,
            useful_sumsq: self.useful_sumsq + other.useful_sumsq,
            useless_sumsq: self.useless_sumsq + other.useless_sumsq,
        }
    }
}

fn mean_and_se(sum: u64, sumsq: u128, trials: u64) -> (f64, f64) {
    let t = trials as f64;
    let mean = sum as f64 / t;
    if trials < 2 {
        return (mean, 0.0);
    }
    let var = ((sumsq as f64) - (sum as f64) * (sum as f64) / t) / (t - 1.0);
    (mean, (var.max(0.0) / t).sqrt())
}

/// Derivatives of the annulus crossing probability in p and q, estimated
/// by counting decisive points: per trial, an a-point within B_{n+1} is
/// decisive when forcing it present makes the crossing occur and forcing
/// it absent makes it fail, with every other point thinned by its own
/// uniform. The mean number of decisive useful points estimates the
/// p-derivative; decisive useless points the q-derivative.
pub fn russo_pivotal_estimate(
    lambda0: f64,
    mu: f64,
    p: f64,
    q: f64,
    spec: AnnulusSpec,
    trials: u64,
    seed: u64,
) -> Result<DerivativeEstimate> {
    check_intensity("lambda0", lambda0, false)?;
    check_intensity("mu", mu, false)?;
    check_open_unit("p", p)?;
    check_open_unit("q", q)?;
    check_trials(trials)?;
    let params = ThinningParams::new(p, q)?;
    let total = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<PivotTally> {
            let scene = build_annulus_scene(spec, lambda0, mu, None, seed, trial)?;
            let mut mask = scene.marked.retained_mask(params);
            let base = scene.crossing(&mask);
            let mut useful = 0u64;
            let mut useless = 0u64;
            for i in 0..mask.len() {
                if !scene.in_domain[i] {
                    continue;
                }
                // Flipping i's state can only change the event on the side
                // the baseline does not already decide: a retained point
                // can only be decisive by its removal breaking a crossing,
                // an absent point only by its addition creating one.
                if mask[i] != base {
                    continue;
                }
                mask[i] = !mask[i];
                let flipped = scene.crossing(&mask);
                mask[i] = !mask[i];
                if flipped != base {
                    if scene.marked.useful[i] {
                        useful += 1;
                    } else {
                        useless += 1;
                    }
                }
            }
            Ok(PivotTally {
                useful_sum: useful,
                useless_sum: useless,
                useful_sumsq: (useful as u128) * (useful as u128),
                useless_sumsq: (useless as u128) * (useless as u128),
            })
        })
        .try_reduce(PivotTally::default, |a, b| Ok(a.add(b)))?;
    let (d_dp, std_err_p) = mean_and_se(total.useful_sum, total.useful_sumsq, trials);
    let (d_dq, std_err_q) = mean_and_se(total.useless_sum, total.useless_sumsq, trials);
    Ok(DerivativeEstimate { d_dp, d_dq, std_err_p, std_err_q, trials, seed })
}

/// Central finite differences of the crossing probability, coupled: each
/// trial evaluates all four shifted parameter pairs on the same sampled
/// configuration and uniforms, so each difference is 0 or 1 and the
/// variance stays far below independent re-estimation.
pub fn finite_difference_theta(
    lambda0: f64,
    mu: f64,
    p: f64,
    q: f64,
    h: f64,
    spec: AnnulusSpec,
    trials: u64,
    seed: u64,
) -> Result<DerivativeEstimate> {
    check_intensity("lambda0", lambda0, false)?;
    check_intensity("mu", mu, false)?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!("step h must be positive, got {h}")));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if !(v - h > 0.0 && v + h < 1.0) {
            return Err(Error::invalid(format!(
                "{name} +- h must stay strictly inside (0, 1), got {name}={v} h={h}"
            )));
        }
    }
    check_trials(trials)?;
    let shifts = [
        ThinningParams::new(p + h, q)?,
        ThinningParams::new(p - h, q)?,
        ThinningParams::new(p, q + h)?,
        ThinningParams::new(p, q - h)?,
    ];
    let (dp_sum, dq_sum) = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(u64, u64)> {
            let scene = build_annulus_scene(spec, lambda0, mu, None, seed, trial)?;
            let ind: Vec<bool> = shifts
                .iter()
                .map(|s| scene.crossing(&scene.marked.retained_mask(*s)))
                .collect();
            debug_assert!(ind[0] || !ind[1], "crossing must be monotone in p");
            debug_assert!(ind[2] || !ind[3], "crossing must be monotone in q");
            Ok(((ind[0] && !ind[1]) as u64, (ind[2] && !ind[3]) as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    // Differences are 0/1, so the sum of squares equals the sum.
    let (mean_p, se_p) = mean_and_se(dp_sum, dp_sum as u128, trials);
    let (mean_q, se_q) = mean_and_se(dq_sum, dq_sum as u128, trials);
    Ok(DerivativeEstimate {
        d_dp: mean_p / (2.0 * h),
        d_dq: mean_q / (2.0 * h),
        std_err_p: se_p / (2.0 * h),
        std_err_q: se_q / (2.0 * h),
        trials,
        seed,
    })
}

/// Frequencies of the decisive-point event at a fixed location `x`, split
/// by whether a b-point lies within 1/2 of `x`.
///
/// Per trial everything except `x` is sampled; the event asks that adding
/// `x` (retained) creates a crossing that fails without it. The reported
/// ratio compares the no-b-point-near-x slice against the
/// b-point-near-x slice.
pub fn estimate_pivotal_ratio(
    x: &Point,
    lambda0: f64,
    mu: f64,
    p: f64,
    q: f64,
    spec: AnnulusSpec,
    trials: u64,
    seed: u64,
) -> Result<RatioEstimate> {
    check_intensity("lambda0", lambda0, false)?;
    check_intensity("mu", mu, false)?;
    check_open_unit("p", p)?;
    check_open_unit("q", q)?;
    check_trials(trials)?;
    if x.dim() != spec.d {
        return Err(Error::invalid(format!(
            "location has dimension {}, expected {}",
            x.dim(),
            spec.d
        )));
    }
    if x.norm() > spec.n as f64 + 1.0 {
        return Err(Error::invalid(format!(
            "location must lie within radius n+1 = {}, got |x| = {}",
            spec.n as f64 + 1.0,
            x.norm()
        )));
    }
    let params = ThinningParams::new(p, q)?;
    let (num_count, den_count) = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(u64, u64)> {
            let scene = build_annulus_scene(spec, lambda0, mu, Some(x), seed, trial)?;
            let xi = scene.marked.len() - 1;
            let mut mask = scene.marked.retained_mask(params);
            mask[xi] = false;
            let without = scene.crossing(&mask);
            let decisive = if without {
                false
            } else {
                mask[xi] = true;
                scene.crossing(&mask)
            };
            let near_b = scene.marked.useful[xi];
            Ok(((decisive && !near_b) as u64, (decisive && near_b) as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let num_hat = num_count as f64 / trials as f64;
    let den_hat = den_count as f64 / trials as f64;
    Ok(RatioEstimate {
        x: x.clone(),
        num_hat,
        den_hat,
        num_count,
        den_count,
        ratio: (den_count > 0).then(|| num_hat / den_hat),
        trials,
        seed,
    })
}

/// Least-squares fit of log(ratio) against mu over the entries with a
/// positive ratio. Returns the intercept as a level `c_hat = exp(a)`, the
/// slope, and the root-mean-square residual in log space.
pub fn ratio_decay_fit(results: &[(f64, RatioEstimate)]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = results
        .iter()
        .filter_map(|(mu, est)| match est.ratio {
            Some(r) if r > 0.0 => Some((*mu, r.ln())),
            _ => None,
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "log-linear fit needs at least 3 positive ratios, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::InsufficientData(
            "fit needs at least two distinct mu values".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss: f64 = pts
        .iter()
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(FitResult {
        c_hat: intercept.exp(),
        slope,
        fit_residual: (ss / n).sqrt(),
        n_used: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(d: usize, n: u32) -> AnnulusSpec {
        AnnulusSpec::new(d, n, 1.0).unwrap()
    }

    #[test]
    fn annulus_spec_validation() {
        assert!(AnnulusSpec::new(2, 2, 1.0).is_ok());
        assert!(AnnulusSpec::new(0, 2, 1.0).is_err());
        assert!(AnnulusSpec::new(2, 1, 1.0).is_err());
        assert!(AnnulusSpec::new(2, 2, 0.5).is_err());
    }

    #[test]
    fn wilson_interval_contains_point_estimate() {
        for (hits, trials) in [(0u64, 50u64), (1, 50), (25, 50), (49, 50), (50, 50), (3, 7)] {
            let e = CrossingEstimate::from_counts(hits, trials, 1);
            assert!(e.ci_low <= e.p_hat && e.p_hat <= e.ci_high, "{hits}/{trials}");
            assert!((0.0..=1.0).contains(&e.ci_low) && (0.0..=1.0).contains(&e.ci_high));
            let expect_se = (e.p_hat * (1.0 - e.p_hat) / trials as f64).sqrt();
            assert_relative_eq!(e.std_err, expect_se);
        }
        let zero = CrossingEstimate::from_counts(0, 100, 1);
        assert_eq!(zero.ci_low, 0.0);
        assert!(zero.ci_high > 0.0 && zero.ci_high < 0.05);
        let full = CrossingEstimate::from_counts(100, 100, 1);
        assert_eq!(full.ci_high, 1.0);
        assert!(full.ci_low < 1.0 && full.ci_low > 0.95);
    }

    #[test]
    fn theta_zero_retention_never_crosses() {
        // ThinningParams allow 0 but estimate_theta_n accepts the closed
        // interval; with p=q=0 nothing is retained.
        let e = estimate_theta_n(2.0, 1.0, 0.0, 0.0, spec(2, 2), 50, 7).unwrap();
        assert_eq!(e.hits, 0);
        assert_eq!(e.p_hat, 0.0);
    }

    #[test]
    fn theta_full_retention_matches_unthinned_bitwise() {
        let s = spec(2, 3);
        let thinned = estimate_theta_n(1.5, 0.7, 1.0, 1.0, s, 150, 11).unwrap();
        let plain = estimate_annulus_crossing(1.5, s, 150, 11).unwrap();
        assert_eq!(thinned.hits, plain.hits);
        assert_eq!(thinned.p_hat.to_bits(), plain.p_hat.to_bits());
        // And mu is irrelevant at full retention.
        let other_mu = estimate_theta_n(1.5, 3.0, 1.0, 1.0, s, 150, 11).unwrap();
        assert_eq!(thinned.hits, other_mu.hits);
    }

    #[test]
    fn theta_rejects_invalid_arguments() {
        let s = spec(2, 2);
        assert!(estimate_theta_n(0.0, 1.0, 0.5, 0.5, s, 10, 1).is_err());
        assert!(estimate_theta_n(2.0, -1.0, 0.5, 0.5, s, 10, 1).is_err());
        assert!(estimate_theta_n(2.0, 1.0, 1.5, 0.5, s, 10, 1).is_err());
        assert!(estimate_theta_n(2.0, 1.0, 0.5, -0.1, s, 10, 1).is_err());
        assert!(estimate_theta_n(2.0, 1.0, 0.5, 0.5, s, 0, 1).is_err());
    }

    #[test]
    fn theta_hits_are_monotone_in_retention_on_one_seed() {
        let s = spec(2, 2);
        let lo = estimate_theta_n(2.5, 1.0, 0.3, 0.3, s, 120, 5).unwrap();
        let mid = estimate_theta_n(2.5, 1.0, 0.6, 0.6, s, 120, 5).unwrap();
        let hi = estimate_theta_n(2.5, 1.0, 1.0, 1.0, s, 120, 5).unwrap();
        assert!(lo.hits <= mid.hits && mid.hits <= hi.hits);
        assert!(hi.hits > 0, "at lambda0=2.5 some trial must cross");
    }

    #[test]
    fn crossing_event_weakens_as_the_shell_moves_in() {
        // One fixed configuration: a chain reaching radius 3.6. The event
        // to radius m holds for m <= 3 and fails for m >= 4.
        let coords: Vec<Point> = (0..5)
            .map(|i| Point::new([0.9 * i as f64, 0.0]).unwrap())
            .collect();
        let adj: Vec<Vec<u32>> = (0..5)
            .map(|i: i64| {
                (0..5)
                    .filter(|&j| j != i && (j - i).abs() == 1)
                    .map(|j| j as u32)
                    .collect()
            })
            .collect();
        let mask = vec![true; 5];
        let in_inner: Vec<bool> = coords.iter().map(|p| p.norm() <= 1.0).collect();
        let mut results = Vec::new();
        for m in 2..=5 {
            let in_outer: Vec<bool> = coords.iter().map(|p| p.norm() >= m as f64).collect();
            results.push(crossing_from_parts(&adj, &mask, &in_inner, &in_outer));
        }
        assert_eq!(results, vec![true, true, false, false]);
        for w in results.windows(2) {
            assert!(w[0] || !w[1], "event must be nonincreasing in the shell radius");
        }
    }

    #[test]
    fn box_estimators_trivial_zero_cases() {
        let ab = estimate_ab_crossing(2, 1.0, 0.0, 0.5, 5.0, 40, 3).unwrap();
        assert_eq!(ab.p_hat, 0.0);
        let ab = estimate_ab_crossing(2, 0.0, 4.0, 0.5, 5.0, 40, 3).unwrap();
        assert_eq!(ab.p_hat, 0.0);
        let one = estimate_one_type_crossing(2, 0.0, 1.0, 6.0, 40, 3).unwrap();
        assert_eq!(one.p_hat, 0.0);
    }

    #[test]
    fn box_estimators_reject_small_sides() {
        assert!(estimate_ab_crossing(2, 1.0, 1.0, 1.0, 3.9, 10, 1).is_err());
        assert!(estimate_one_type_crossing(2, 1.0, 1.0, 4.0, 10, 1).is_err());
        assert!(estimate_one_type_crossing(0, 1.0, 1.0, 8.0, 10, 1).is_err());
    }

    #[test]
    fn dense_processes_cross_boxes() {
        let one = estimate_one_type_crossing(2, 8.0, 1.0, 6.0, 60, 9).unwrap();
        assert!(one.p_hat > 0.9, "dense one-type should cross, got {}", one.p_hat);
        let ab = estimate_ab_crossing(2, 6.0, 12.0, 0.5, 4.0, 60, 9).unwrap();
        assert!(ab.p_hat > 0.5, "dense two-type should cross, got {}", ab.p_hat);
    }

    #[test]
    fn estimates_are_deterministic_and_seed_sensitive() {
        let s = spec(2, 2);
        let a = estimate_theta_n(2.0, 1.0, 0.8, 0.6, s, 80, 42).unwrap();
        let b = estimate_theta_n(2.0, 1.0, 0.8, 0.6, s, 80, 42).unwrap();
        assert_eq!(a, b);
        let c = estimate_theta_n(2.0, 1.0, 0.8, 0.6, s, 80, 43).unwrap();
        assert_ne!(a.hits, c.hits);
    }

    #[test]
    fn bisect_deterministic_step() {
        let opts = BisectOptions {
            lo: 0.0,
            hi: 10.0,
            target: 0.5,
            tol: 0.1,
            trials_per_eval: 1000,
            surrogate: "step".into(),
        };
        let est = threshold_bisect(
            |x, t| Ok(CrossingEstimate::from_counts(if x >= 5.0 { t } else { 0 }, t, 0)),
            &opts,
        )
        .unwrap();
        assert_eq!(est.status, BisectStatus::Converged);
        assert!(est.bracket_low >= 4.9 && est.bracket_high <= 5.1);
        assert!(est.bracket_high - est.bracket_low <= 0.1);
        assert!(est.trace.len() >= 2);
    }

    #[test]
    fn bisect_identity_curve() {
        let opts = BisectOptions {
            lo: 0.0,
            hi: 1.0,
            target: 0.5,
            tol: 0.01,
            trials_per_eval: 10_000,
            surrogate: "identity".into(),
        };
        let est = threshold_bisect(
            |x, t| {
                let hits = (x * t as f64).round() as u64;
                Ok(CrossingEstimate::from_counts(hits.min(t), t, 0))
            },
            &opts,
        )
        .unwrap();
        assert!(est.bracket_low <= 0.5 && 0.5 <= est.bracket_high);
        assert!(est.bracket_high - est.bracket_low <= 0.01);
    }

    #[test]
    fn bisect_reports_failed_brackets() {
        let opts = BisectOptions {
            lo: 6.0,
            hi: 10.0,
            target: 0.5,
            tol: 0.1,
            trials_per_eval: 100,
            surrogate: "step".into(),
        };
        let err = threshold_bisect(
            |x, t| Ok(CrossingEstimate::from_counts(if x >= 5.0 { t } else { 0 }, t, 0)),
            &opts,
        )
        .unwrap_err();
        match err {
            Error::Bracket { p_lo, p_hi, .. } => {
                assert_eq!(p_lo, 1.0);
                assert_eq!(p_hi, 1.0);
            }
            other => panic!("expected bracket error, got {other:?}"),
        }
    }

    #[test]
    fn bisect_flags_noise_limited_brackets() {
        // Clearly separated endpoints, but near the target the few-trial
        // CIs swallow it long before the (absurd) width tolerance.
        let opts = BisectOptions {
            lo: 0.0,
            hi: 1.0,
            target: 0.5,
            tol: 1e-9,
            trials_per_eval: 100,
            surrogate: "shallow-line".into(),
        };
        let est = threshold_bisect(
            |x, t| {
                let p = 0.25 + 0.5 * x;
                Ok(CrossingEstimate::from_counts((p * t as f64).round() as u64, t, 0))
            },
            &opts,
        )
        .unwrap();
        assert_eq!(est.status, BisectStatus::CiOverlap);
        assert!(est.bracket_high - est.bracket_low > 1e-9);
    }

    #[test]
    fn russo_no_points_means_zero_derivatives() {
        let e = russo_pivotal_estimate(0.0, 1.0, 0.5, 0.5, spec(2, 2), 30, 1).unwrap();
        assert_eq!(e.d_dp, 0.0);
        assert_eq!(e.d_dq, 0.0);
        assert_eq!(e.std_err_p, 0.0);
    }

    #[test]
    fn russo_without_b_points_has_no_useful_pivots() {
        let e = russo_pivotal_estimate(2.0, 0.0, 0.5, 0.5, spec(2, 2), 60, 2).unwrap();
        assert_eq!(e.d_dp, 0.0);
        assert!(e.d_dq >= 0.0);
    }

    #[test]
    fn russo_rejects_boundary_retention() {
        let s = spec(2, 2);
        assert!(russo_pivotal_estimate(2.0, 1.0, 0.0, 0.5, s, 10, 1).is_err());
        assert!(russo_pivotal_estimate(2.0, 1.0, 0.5, 1.0, s, 10, 1).is_err());
    }

    #[test]
    fn finite_difference_validates_the_step() {
        let s = spec(2, 2);
        assert!(finite_difference_theta(2.0, 1.0, 0.5, 0.5, 0.5, s, 10, 1).is_err());
        assert!(finite_difference_theta(2.0, 1.0, 0.05, 0.5, 0.05, s, 10, 1).is_err());
        assert!(finite_difference_theta(2.0, 1.0, 0.5, 0.5, -0.1, s, 10, 1).is_err());
        assert!(finite_difference_theta(2.0, 1.0, 0.5, 0.5, 0.1, s, 10, 1).is_ok());
    }

    #[test]
    fn finite_difference_is_zero_when_nothing_ever_crosses() {
        let e = finite_difference_theta(0.001, 1.0, 0.5, 0.5, 0.1, spec(2, 4), 200, 3).unwrap();
        assert_eq!(e.d_dp, 0.0);
        assert_eq!(e.d_dq, 0.0);
    }

    #[test]
    fn derivatives_agree_between_methods_at_small_scale() {
        // Cross-check the two derivative estimators on a small instance;
        // the full-size comparison lives in the acceptance suite.
        let s = spec(2, 2);
        let piv = russo_pivotal_estimate(2.0, 1.0, 0.7, 0.7, s, 1200, 17).unwrap();
        let fd = finite_difference_theta(2.0, 1.0, 0.7, 0.7, 0.05, s, 1200, 17).unwrap();
        for (a, b, sa, sb, name) in [
            (piv.d_dp, fd.d_dp, piv.std_err_p, fd.std_err_p, "p"),
            (piv.d_dq, fd.d_dq, piv.std_err_q, fd.std_err_q, "q"),
        ] {
            let combined = (sa * sa + sb * sb).sqrt();
            assert!(
                (a - b).abs() <= 3.0 * combined,
                "{name}: {a} vs {b} (3se = {})",
                3.0 * combined
            );
        }
    }

    #[test]
    fn ratio_without_b_points_has_empty_denominator() {
        let x = Point::new([1.5, 0.0]).unwrap();
        let e = estimate_pivotal_ratio(&x, 2.0, 0.0, 0.5, 0.5, spec(2, 2), 200, 5).unwrap();
        assert_eq!(e.den_count, 0);
        assert!(e.ratio.is_none());
        assert!(e.num_hat >= 0.0);
    }

    #[test]
    fn ratio_validates_location() {
        let s = spec(2, 2);
        let far = Point::new([5.0, 0.0]).unwrap();
        assert!(estimate_pivotal_ratio(&far, 2.0, 1.0, 0.5, 0.5, s, 10, 1).is_err());
        let wrong_dim = Point::new([1.0]).unwrap();
        assert!(estimate_pivotal_ratio(&wrong_dim, 2.0, 1.0, 0.5, 0.5, s, 10, 1).is_err());
        let x = Point::new([1.5, 0.0]).unwrap();
        assert!(estimate_pivotal_ratio(&x, 2.0, 1.0, 1.0, 0.5, s, 10, 1).is_err());
    }

    #[test]
    fn ratio_no_b_slice_shrinks_with_mu() {
        // The probability that no b-point sits near x decays like
        // exp(-mu * vol); the decisive-and-isolated frequency inherits
        // the decay. Compare a small and a large mu far beyond noise.
        let x = Point::new([1.5, 0.0]).unwrap();
        let s = spec(2, 2);
        let low = estimate_pivotal_ratio(&x, 2.0, 0.5, 0.7, 0.7, s, 800, 5).unwrap();
        let high = estimate_pivotal_ratio(&x, 2.0, 4.0, 0.7, 0.7, s, 800, 5).unwrap();
        assert!(
            low.num_hat > high.num_hat,
            "isolated-decisive frequency should drop: {} vs {}",
            low.num_hat,
            high.num_hat
        );
    }

    #[test]
    fn fit_recovers_exact_exponential_decay() {
        let x = Point::new([1.5, 0.0]).unwrap();
        let mk = |mu: f64| {
            let ratio = 0.3 * (-mu / 0.3).exp();
            (
                mu,
                RatioEstimate {
                    x: x.clone(),
                    num_hat: ratio,
                    den_hat: 1.0,
                    num_count: 1,
                    den_count: 1,
                    ratio: Some(ratio),
                    trials: 1,
                    seed: 0,
                },
            )
        };
        let data: Vec<_> = [0.5, 1.0, 1.5, 2.0, 2.5].iter().map(|&m| mk(m)).collect();
        let fit = ratio_decay_fit(&data).unwrap();
        assert_relative_eq!(fit.c_hat, 0.3, max_relative = 1e-9);
        assert_relative_eq!(fit.slope, -1.0 / 0.3, max_relative = 1e-9);
        assert!(fit.fit_residual < 1e-9);
        assert_eq!(fit.n_used, 5);
    }

    #[test]
    fn fit_constant_ratios_have_zero_slope() {
        let x = Point::new([1.5, 0.0]).unwrap();
        let data: Vec<_> = [0.5, 1.0, 1.5]
            .iter()
            .map(|&mu| {
                (
                    mu,
                    RatioEstimate {
                        x: x.clone(),
                        num_hat: 0.2,
                        den_hat: 1.0,
                        num_count: 1,
                        den_count: 1,
                        ratio: Some(0.2),
                        trials: 1,
                        seed: 0,
                    },
                )
            })
            .collect();
        let fit = ratio_decay_fit(&data).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert_relative_eq!(fit.c_hat, 0.2, max_relative = 1e-9);
    }

    #[test]
    fn fit_requires_three_positive_ratios() {
        let x = Point::new([1.5, 0.0]).unwrap();
        let none = RatioEstimate {
            x: x.clone(),
            num_hat: 0.1,
            den_hat: 0.0,
            num_count: 1,
            den_count: 0,
            ratio: None,
            trials: 10,
            seed: 0,
        };
        let some = RatioEstimate { ratio: Some(0.5), ..none.clone() };
        let data = vec![(0.5, some.clone()), (1.0, some), (1.5, none)];
        assert!(matches!(ratio_decay_fit(&data), Err(Error::InsufficientData(_))));
    }
}
