//! Points, sampling regions, and homogeneous Poisson samples in d dimensions.
//!
//! Conventions used throughout the crate: every ball/annulus membership and
//! every distance predicate is closed (`<=`, boundary ties kept), distances
//! are Euclidean computed through IEEE `sqrt`, and all coordinates must be
//! finite. Dimensions 1 through 6 are exercised by the test suite; 2 and 3
//! are the primary targets.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Inline coordinate storage; dimensions above 4 spill to the heap.
pub type Coords = SmallVec<[f64; 4]>;

/// Cap on the expected number of points of one sample, to reject absurd
/// intensity/volume combinations before they exhaust memory.
const MAX_EXPECTED_POINTS: f64 = 5e7;

/// Which of the two point types a configuration plays.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    A,
    B,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::A => "a",
            Role::B => "b",
        }
    }

    pub fn parse(s: &str) -> Result<Role> {
        match s {
            "a" | "A" => Ok(Role::A),
            "b" | "B" => Ok(Role::B),
            other => Err(Error::invalid(format!("unknown role {other:?}, expected a or b"))),
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Coords,
}

impl Point {
    pub fn new(coords: impl IntoIterator<Item = f64>) -> Result<Point> {
        let coords: Coords = coords.into_iter().collect();
        if coords.is_empty() {
            return Err(Error::invalid("point must have at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(Point { coords })
    }

    /// Internal constructor for coordinates that are finite by construction.
    pub(crate) fn from_coords(coords: Coords) -> Point {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn distance_to(&self, other: &Point) -> f64 {
        dist(&self.coords, &other.coords)
    }
}

/// Euclidean norm of a coordinate slice.
pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Euclidean distance between coordinate slices of equal length.
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Coords {
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

pub(crate) fn scale(a: &[f64], s: f64) -> Coords {
    a.iter().map(|x| x * s).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// a + s*b
pub(crate) fn axpy(a: &[f64], s: f64, b: &[f64]) -> Coords {
    a.iter().zip(b.iter()).map(|(x, y)| x + s * y).collect()
}

/// Volume of the unit-radius ball in `d` dimensions, via the two-step
/// recurrence v_d = v_{d-2} * 2*pi/d with v_0 = 1, v_1 = 2 (exact for
/// integer d, no gamma function needed).
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let mut even = 1.0; // v_0
    let mut odd = 2.0; // v_1
    for k in 2..=d {
        let next = (if k % 2 == 0 { even } else { odd }) * std::f64::consts::TAU / k as f64;
        if k % 2 == 0 {
            even = next;
        } else {
            odd = next;
        }
    }
    Ok(if d % 2 == 0 { even } else { odd })
}

/// A sampling window. Membership is closed on every boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Ball { center: Point, radius: f64 },
    Box { lower: Point, upper: Point },
    Annulus { center: Point, inner: f64, outer: f64 },
}

impl Region {
    pub fn ball(center: Point, radius: f64) -> Result<Region> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be positive and finite, got {radius}")));
        }
        Ok(Region::Ball { center, radius })
    }

    /// Ball centered at the origin.
    pub fn origin_ball(d: usize, radius: f64) -> Result<Region> {
        Region::ball(Point::new(std::iter::repeat(0.0).take(d.max(1)))?, radius)
    }

    pub fn axis_box(lower: Point, upper: Point) -> Result<Region> {
        if lower.dim() != upper.dim() {
            return Err(Error::invalid("box corners must share a dimension"));
        }
        if lower
            .coords()
            .iter()
            .zip(upper.coords())
            .any(|(l, u)| !(l <= u))
        {
            return Err(Error::invalid("box needs lower <= upper in every coordinate"));
        }
        Ok(Region::Box { lower, upper })
    }

    /// The cube `[0, side]^d`.
    pub fn cube(d: usize, side: f64) -> Result<Region> {
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::invalid(format!("cube side must be positive and finite, got {side}")));
        }
        let lower = Point::new(std::iter::repeat(0.0).take(d.max(1)))?;
        let upper = Point::new(std::iter::repeat(side).take(d.max(1)))?;
        Region::axis_box(lower, upper)
    }

    pub fn annulus(center: Point, inner: f64, outer: f64) -> Result<Region> {
        if !(inner >= 0.0) || !inner.is_finite() || !outer.is_finite() || !(outer > inner) {
            return Err(Error::invalid(format!(
                "annulus needs 0 <= inner < outer, got inner={inner} outer={outer}"
            )));
        }
        Ok(Region::Annulus { center, inner, outer })
    }

    pub fn origin_annulus(d: usize, inner: f64, outer: f64) -> Result<Region> {
        Region::annulus(Point::new(std::iter::repeat(0.0).take(d.max(1)))?, inner, outer)
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } => center.dim(),
            Region::Box { lower, .. } => lower.dim(),
            Region::Annulus { center, .. } => center.dim(),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        if p.dim() != self.dim() {
            return false;
        }
        match self {
            Region::Ball { center, radius } => p.distance_to(center) <= *radius,
            Region::Box { lower, upper } => p
                .coords()
                .iter()
                .zip(lower.coords().iter().zip(upper.coords()))
                .all(|(x, (l, u))| *l <= *x && *x <= *u),
            Region::Annulus { center, inner, outer } => {
                let r = p.distance_to(center);
                *inner <= r && r <= *outer
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Region::Ball { center, radius } => {
                unit_ball_volume(center.dim()).expect("dim >= 1") * radius.powi(center.dim() as i32)
            }
            Region::Box { lower, upper } => lower
                .coords()
                .iter()
                .zip(upper.coords())
                .map(|(l, u)| u - l)
                .product(),
            Region::Annulus { center, inner, outer } => {
                let d = center.dim() as i32;
                unit_ball_volume(center.dim()).expect("dim >= 1") * (outer.powi(d) - inner.powi(d))
            }
        }
    }

    /// Axis-aligned bounding box as (lower, upper) coordinate vectors.
    pub fn bounding_box(&self) -> (Coords, Coords) {
        match self {
            Region::Ball { center, radius } => (
                center.coords().iter().map(|c| c - radius).collect(),
                center.coords().iter().map(|c| c + radius).collect(),
            ),
            Region::Box { lower, upper } => (lower.coords().into(), upper.coords().into()),
            Region::Annulus { center, outer, .. } => (
                center.coords().iter().map(|c| c - outer).collect(),
                center.coords().iter().map(|c| c + outer).collect(),
            ),
        }
    }

    /// Grow the region by `margin` in every direction. Balls and annuli grow
    /// exactly (Minkowski sum with a ball); boxes grow to the enclosing
    /// expanded box, which contains the exact sum.
    pub fn enlarge(&self, margin: f64) -> Result<Region> {
        if !(margin >= 0.0) || !margin.is_finite() {
            return Err(Error::invalid(format!("margin must be nonnegative, got {margin}")));
        }
        Ok(match self {
            Region::Ball { center, radius } => Region::Ball {
                center: center.clone(),
                radius: radius + margin,
            },
            Region::Box { lower, upper } => Region::Box {
                lower: Point::from_coords(lower.coords().iter().map(|c| c - margin).collect()),
                upper: Point::from_coords(upper.coords().iter().map(|c| c + margin).collect()),
            },
            Region::Annulus { center, inner, outer } => {
                if inner - margin > 0.0 {
                    Region::Annulus {
                        center: center.clone(),
                        inner: inner - margin,
                        outer: outer + margin,
                    }
                } else {
                    Region::Ball { center: center.clone(), radius: outer + margin }
                }
            }
        })
    }

    /// Distance from `p` to this region (0 if `p` lies inside).
    pub fn distance_to(&self, p: &Point) -> f64 {
        match self {
            Region::Ball { center, radius } => (p.distance_to(center) - radius).max(0.0),
            Region::Box { lower, upper } => p
                .coords()
                .iter()
                .zip(lower.coords().iter().zip(upper.coords()))
                .map(|(x, (l, u))| {
                    let gap = if x < l { l - x } else if x > u { x - u } else { 0.0 };
                    gap * gap
                })
                .sum::<f64>()
                .sqrt(),
            Region::Annulus { center, inner, outer } => {
                let r = p.distance_to(center);
                if r < *inner {
                    inner - r
                } else {
                    (r - outer).max(0.0)
                }
            }
        }
    }

    /// Largest distance from `c` to any point of the region.
    fn max_distance_from(&self, c: &Point) -> f64 {
        match self {
            Region::Ball { center, radius } => c.distance_to(center) + radius,
            Region::Box { lower, upper } => c
                .coords()
                .iter()
                .zip(lower.coords().iter().zip(upper.coords()))
                .map(|(x, (l, u))| (x - l).abs().max((x - u).abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            Region::Annulus { center, outer, .. } => c.distance_to(center) + outer,
        }
    }

    /// Smallest distance from `c` to any point of the region.
    fn min_distance_from(&self, c: &Point) -> f64 {
        self.distance_to(c)
    }

    /// Whether this region contains `inner` entirely. Exact for ball/box
    /// combinations; annuli as the inner region are handled through their
    /// bounding description, which can only err toward `false`.
    pub fn contains_region(&self, inner: &Region) -> bool {
        if self.dim() != inner.dim() {
            return false;
        }
        match self {
            Region::Ball { center, radius } => inner.max_distance_from(center) <= *radius,
            Region::Box { lower, upper } => {
                let (ilo, ihi) = inner.bounding_box();
                match inner {
                    // Bounding boxes of balls and annuli are tight enough: a
                    // box contains a ball iff it contains its bounding box.
                    Region::Ball { .. } | Region::Annulus { .. } | Region::Box { .. } => lower
                        .coords()
                        .iter()
                        .zip(ilo.iter())
                        .all(|(l, i)| l <= i)
                        && upper.coords().iter().zip(ihi.iter()).all(|(u, i)| i <= u),
                }
            }
            Region::Annulus { center, inner: lo, outer } => {
                inner.max_distance_from(center) <= *outer
                    && inner.min_distance_from(center) >= *lo
            }
        }
    }

    /// Whether this region provably does not intersect `other`. Errs toward
    /// `false` (possible intersection) for combinations without a closed
    /// form.
    pub fn disjoint_from(&self, other: &Region) -> bool {
        use Region::*;
        match (self, other) {
            (Ball { center: c1, radius: r1 }, Ball { center: c2, radius: r2 }) => {
                c1.distance_to(c2) > r1 + r2
            }
            (Box { lower: l1, upper: u1 }, Box { lower: l2, upper: u2 }) => l1
                .coords()
                .iter()
                .zip(u1.coords())
                .zip(l2.coords().iter().zip(u2.coords()))
                .any(|((l1, u1), (l2, u2))| u1 < l2 || u2 < l1),
            (Ball { center, radius }, b @ Box { .. }) | (b @ Box { .. }, Ball { center, radius }) => {
                b.distance_to(center) > *radius
            }
            (Ball { center: cb, radius: rb }, Annulus { center, inner, outer })
            | (Annulus { center, inner, outer }, Ball { center: cb, radius: rb }) => {
                let d = cb.distance_to(center);
                d + rb < *inner || d - rb > *outer
            }
            (b @ Box { .. }, Annulus { center, inner, outer })
            | (Annulus { center, inner, outer }, b @ Box { .. }) => {
                b.max_distance_from(center) < *inner || b.min_distance_from(center) > *outer
            }
            (Annulus { center: c1, inner: i1, outer: o1 }, Annulus { center: c2, inner: i2, outer: o2 }) => {
                let d = c1.distance_to(c2);
                // Same-center annuli separate by radius ranges; otherwise
                // only the enclosing-ball separation is checked.
                if d == 0.0 {
                    o1 < i2 || o2 < i1
                } else {
                    d - o1 > *o2 || d + o1 < *i2 || d + o2 < *i1
                }
            }
        }
    }

    /// One point uniform on the region. Balls reject from the bounding box;
    /// annuli draw a direction and an inverse-CDF radius (both exact).
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Point {
        match self {
            Region::Ball { center, radius } => loop {
                let cand: Coords = center
                    .coords()
                    .iter()
                    .map(|c| rng.random_range(c - radius..=c + radius))
                    .collect();
                if dist(&cand, center.coords()) <= *radius {
                    return Point::from_coords(cand);
                }
            },
            Region::Box { lower, upper } => {
                let cand: Coords = lower
                    .coords()
                    .iter()
                    .zip(upper.coords())
                    .map(|(l, u)| if u > l { rng.random_range(*l..*u) } else { *l })
                    .collect();
                Point::from_coords(cand)
            }
            Region::Annulus { center, inner, outer } => {
                let d = center.dim();
                let dir = sample_unit_vector(d, rng);
                let u: f64 = rng.random();
                let di = d as f64;
                let radius = (inner.powf(di) + u * (outer.powf(di) - inner.powf(di))).powf(1.0 / di);
                Point::from_coords(axpy(center.coords(), radius, &dir))
            }
        }
    }
}

/// Uniform direction via normalized Gaussian coordinates.
pub(crate) fn sample_unit_vector<R: Rng>(d: usize, rng: &mut R) -> Coords {
    loop {
        let v: Coords = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return scale(&v, 1.0 / n);
        }
    }
}

/// A realized point sample together with the window and intensity that
/// generated it.
#[derive(Clone, Debug)]
pub struct PointConfig {
    pub points: Vec<Point>,
    pub role: Role,
    pub intensity: f64,
    pub generating_region: Region,
}

impl PointConfig {
    pub fn new(
        points: Vec<Point>,
        role: Role,
        intensity: f64,
        generating_region: Region,
    ) -> Result<PointConfig> {
        if !intensity.is_finite() || intensity < 0.0 {
            return Err(Error::invalid(format!("intensity must be finite and >= 0, got {intensity}")));
        }
        for p in &points {
            if p.dim() != generating_region.dim() {
                return Err(Error::invalid("point dimension differs from region dimension"));
            }
            if !generating_region.contains(p) {
                return Err(Error::invalid("every point must lie in the generating region"));
            }
        }
        Ok(PointConfig { points, role, intensity, generating_region })
    }

    pub fn dim(&self) -> usize {
        self.generating_region.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `p` to the nearest point of the configuration
    /// (`+inf` when empty).
    pub fn distance_to(&self, p: &Point) -> f64 {
        self.points
            .iter()
            .map(|q| q.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Draw a homogeneous Poisson sample of the given intensity on `region`.
///
/// The count is Poisson(intensity * volume); positions are iid uniform. The
/// draw is fully determined by `stream`.
pub fn sample_poisson(
    role: Role,
    intensity: f64,
    region: &Region,
    stream: RngStream,
) -> Result<PointConfig> {
    if !intensity.is_finite() || intensity < 0.0 {
        return Err(Error::invalid(format!("intensity must be finite and >= 0, got {intensity}")));
    }
    let mean = intensity * region.volume();
    if !mean.is_finite() || mean > MAX_EXPECTED_POINTS {
        return Err(Error::invalid(format!(
            "expected point count {mean} exceeds the supported maximum {MAX_EXPECTED_POINTS}"
        )));
    }
    let mut rng = stream.rng();
    let n = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::invalid(format!("poisson mean {mean}: {e}")))?
            .sample(&mut rng) as u64
    } else {
        0
    };
    let points = (0..n).map(|_| region.sample_uniform(&mut rng)).collect();
    Ok(PointConfig {
        points,
        role,
        intensity,
        generating_region: region.clone(),
    })
}

/// Format a float so that reading it back reproduces the same bits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_coords(c: &[f64]) -> String {
    c.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

fn parse_coords(s: &str) -> Result<Coords> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad coordinate {t:?}: {e}")))
        })
        .collect()
}

pub(crate) fn region_to_string(r: &Region) -> String {
    match r {
        Region::Ball { center, radius } => {
            format!("ball:{};{}", fmt_coords(center.coords()), fmt_f64(*radius))
        }
        Region::Box { lower, upper } => {
            format!("box:{};{}", fmt_coords(lower.coords()), fmt_coords(upper.coords()))
        }
        Region::Annulus { center, inner, outer } => format!(
            "annulus:{};{};{}",
            fmt_coords(center.coords()),
            fmt_f64(*inner),
            fmt_f64(*outer)
        ),
    }
}

/// Parse the textual region format used in CSV headers and on the command
/// line: `ball:<center>;<radius>`, `box:<lower>;<upper>`,
/// `annulus:<center>;<inner>;<outer>` with comma-separated coordinates.
pub fn parse_region(s: &str) -> Result<Region> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("region {s:?} needs a kind prefix")))?;
    let parts: Vec<&str> = rest.split(';').collect();
    match (kind, parts.as_slice()) {
        ("ball", [c, r]) => Region::ball(
            Point::new(parse_coords(c)?)?,
            r.trim().parse().map_err(|e| Error::invalid(format!("bad radius {r:?}: {e}")))?,
        ),
        ("box", [l, u]) => Region::axis_box(Point::new(parse_coords(l)?)?, Point::new(parse_coords(u)?)?),
        ("annulus", [c, i, o]) => Region::annulus(
            Point::new(parse_coords(c)?)?,
            i.trim().parse().map_err(|e| Error::invalid(format!("bad inner radius {i:?}: {e}")))?,
            o.trim().parse().map_err(|e| Error::invalid(format!("bad outer radius {o:?}: {e}")))?,
        ),
        _ => Err(Error::invalid(format!("unrecognized region format {s:?}"))),
    }
}

/// Write configurations as CSV: comment lines carry the metadata needed to
/// reconstruct each configuration, rows are `role,x0,...,x{d-1}`.
pub fn write_points_csv<W: Write>(mut w: W, configs: &[&PointConfig]) -> Result<()> {
    let d = configs.first().map(|c| c.dim()).unwrap_or(0);
    for c in configs {
        if c.dim() != d {
            return Err(Error::invalid("all configurations in one file must share a dimension"));
        }
        writeln!(
            w,
            "# config role={} intensity={} region={}",
            c.role,
            fmt_f64(c.intensity),
            region_to_string(&c.generating_region)
        )?;
    }
    write!(w, "role")?;
    for i in 0..d {
        write!(w, ",x{i}")?;
    }
    writeln!(w)?;
    for c in configs {
        for p in &c.points {
            writeln!(w, "{},{}", c.role, fmt_coords(p.coords()))?;
        }
    }
    Ok(())
}

/// Inverse of [`write_points_csv`].
pub fn read_points_csv<R: BufRead>(r: R) -> Result<Vec<PointConfig>> {
    let mut meta: Vec<(Role, f64, Region)> = Vec::new();
    let mut rows: HashMap<&'static str, Vec<Point>> = HashMap::new();
    let mut saw_header = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(cfg) = rest.strip_prefix("config ") {
                let mut role = None;
                let mut intensity = None;
                let mut region = None;
                for field in cfg.split_whitespace() {
                    let (k, v) = field
                        .split_once('=')
                        .ok_or_else(|| Error::invalid(format!("bad config field {field:?}")))?;
                    match k {
                        "role" => role = Some(Role::parse(v)?),
                        "intensity" => {
                            intensity = Some(v.parse::<f64>().map_err(|e| {
                                Error::invalid(format!("bad intensity {v:?}: {e}"))
                            })?)
                        }
                        "region" => region = Some(parse_region(v)?),
                        _ => return Err(Error::invalid(format!("unknown config field {k:?}"))),
                    }
                }
                match (role, intensity, region) {
                    (Some(role), Some(intensity), Some(region)) => {
                        meta.push((role, intensity, region))
                    }
                    _ => return Err(Error::invalid("config line must set role, intensity, region")),
                }
            }
            continue;
        }
        if !saw_header {
            if !line.starts_with("role,") {
                return Err(Error::invalid(format!("expected point header, got {line:?}")));
            }
            saw_header = true;
            continue;
        }
        let (role_s, coords_s) = line
            .split_once(',')
            .ok_or_else(|| Error::invalid(format!("bad point row {line:?}")))?;
        let role = Role::parse(role_s)?;
        rows.entry(role.as_str()).or_default().push(Point::new(parse_coords(coords_s)?)?);
    }
    meta.into_iter()
        .map(|(role, intensity, region)| {
            let points = rows.remove(role.as_str()).unwrap_or_default();
            PointConfig::new(points, role, intensity, region)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.iter().copied()).unwrap()
    }

    #[test]
    fn unit_ball_volumes_match_known_values() {
        assert_relative_eq!(unit_ball_volume(1).unwrap(), 2.0);
        assert_relative_eq!(unit_ball_volume(2).unwrap(), std::f64::consts::PI);
        assert_relative_eq!(unit_ball_volume(3).unwrap(), 4.0 * std::f64::consts::PI / 3.0);
        assert_relative_eq!(
            unit_ball_volume(4).unwrap(),
            std::f64::consts::PI * std::f64::consts::PI / 2.0
        );
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn closed_membership_keeps_boundary() {
        let ball = Region::origin_ball(2, 0.5).unwrap();
        assert!(ball.contains(&pt(&[0.5, 0.0])));
        assert!(!ball.contains(&pt(&[0.5 + 1e-12, 0.0])));

        let ann = Region::origin_annulus(2, 1.0, 2.0).unwrap();
        assert!(ann.contains(&pt(&[1.0, 0.0])));
        assert!(ann.contains(&pt(&[2.0, 0.0])));
        assert!(!ann.contains(&pt(&[0.99, 0.0])));
    }

    #[test]
    fn distance_to_point_sets_and_regions() {
        let a = pt(&[0.0, 0.0]);
        let b = pt(&[3.0, 4.0]);
        assert_relative_eq!(a.distance_to(&b), 5.0);

        let cfg = PointConfig::new(
            vec![b.clone()],
            Role::A,
            1.0,
            Region::origin_ball(2, 10.0).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(cfg.distance_to(&a), 5.0);

        let empty = PointConfig::new(vec![], Role::A, 1.0, Region::origin_ball(2, 10.0).unwrap())
            .unwrap();
        assert_eq!(empty.distance_to(&a), f64::INFINITY);

        let ball = Region::origin_ball(2, 1.0).unwrap();
        assert_relative_eq!(ball.distance_to(&pt(&[2.0, 0.0])), 1.0);
        assert_eq!(ball.distance_to(&pt(&[0.3, 0.0])), 0.0);

        let bx = Region::cube(2, 1.0).unwrap();
        assert_relative_eq!(bx.distance_to(&pt(&[2.0, 2.0])), std::f64::consts::SQRT_2);
    }

    #[test]
    fn degenerate_and_invalid_regions_error() {
        assert!(Region::ball(pt(&[0.0]), 0.0).is_err());
        assert!(Region::ball(pt(&[0.0]), f64::NAN).is_err());
        assert!(Region::axis_box(pt(&[1.0, 0.0]), pt(&[0.0, 1.0])).is_err());
        assert!(Region::annulus(pt(&[0.0]), 2.0, 1.0).is_err());
        // Zero-width boxes are allowed; they just have volume 0.
        let flat = Region::axis_box(pt(&[0.0, 0.0]), pt(&[1.0, 0.0])).unwrap();
        assert_eq!(flat.volume(), 0.0);
    }

    #[test]
    fn sample_poisson_zero_intensity_is_empty() {
        let cfg = sample_poisson(
            Role::A,
            0.0,
            &Region::cube(2, 10.0).unwrap(),
            RngStream::new(1, 0),
        )
        .unwrap();
        assert!(cfg.is_empty());
    }

    #[test]
    fn sample_poisson_rejects_bad_arguments() {
        let region = Region::cube(2, 10.0).unwrap();
        assert!(sample_poisson(Role::A, f64::NAN, &region, RngStream::new(1, 0)).is_err());
        assert!(sample_poisson(Role::A, -1.0, &region, RngStream::new(1, 0)).is_err());
        assert!(sample_poisson(Role::A, 1e30, &region, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn sample_poisson_is_reproducible_and_in_region() {
        let region = Region::origin_ball(3, 2.0).unwrap();
        let a = sample_poisson(Role::B, 1.5, &region, RngStream::new(9, 4)).unwrap();
        let b = sample_poisson(Role::B, 1.5, &region, RngStream::new(9, 4)).unwrap();
        assert_eq!(a.points, b.points);
        assert!(a.points.iter().all(|p| region.contains(p)));

        let c = sample_poisson(Role::B, 1.5, &region, RngStream::new(9, 5)).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn sample_poisson_count_matches_mean_on_box_and_ball() {
        // Mean over many trials stays within four standard errors.
        for (region, intensity) in [
            (Region::cube(2, 4.0).unwrap(), 2.0),
            (Region::origin_ball(3, 1.5).unwrap(), 1.0),
        ] {
            let mean = intensity * region.volume();
            let trials = 4000u64;
            let total: u64 = (0..trials)
                .map(|t| {
                    sample_poisson(Role::A, intensity, &region, RngStream::new(123, t))
                        .unwrap()
                        .len() as u64
                })
                .sum();
            let observed = total as f64 / trials as f64;
            let se = (mean / trials as f64).sqrt();
            assert!(
                (observed - mean).abs() <= 4.0 * se,
                "observed {observed}, expected {mean} +- {se}"
            );
        }
    }

    #[test]
    fn annulus_sampling_covers_thin_shells() {
        let region = Region::origin_annulus(3, 99.9, 100.1).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        for _ in 0..200 {
            let p = region.sample_uniform(&mut rng);
            assert!(region.contains(&p));
        }
    }

    #[test]
    fn enlarge_region_kinds() {
        let ball = Region::origin_ball(2, 1.0).unwrap().enlarge(0.5).unwrap();
        assert!(matches!(ball, Region::Ball { radius, .. } if radius == 1.5));

        let bx = Region::cube(2, 1.0).unwrap().enlarge(0.25).unwrap();
        assert!(bx.contains(&pt(&[-0.25, 1.25])));

        let ann = Region::origin_annulus(2, 1.0, 2.0).unwrap().enlarge(0.5).unwrap();
        assert!(matches!(ann, Region::Annulus { inner, outer, .. } if inner == 0.5 && outer == 2.5));

        // Enlarging past the hole turns the annulus into a ball.
        let filled = Region::origin_annulus(2, 1.0, 2.0).unwrap().enlarge(1.5).unwrap();
        assert!(matches!(filled, Region::Ball { radius, .. } if radius == 3.5));
    }

    #[test]
    fn containment_checks_are_exact_for_balls_and_boxes() {
        let big = Region::origin_ball(2, 2.0).unwrap();
        let small = Region::ball(pt(&[1.0, 0.0]), 1.0).unwrap();
        assert!(big.contains_region(&small));
        let poking = Region::ball(pt(&[1.0, 0.0]), 1.0 + 1e-9).unwrap();
        assert!(!big.contains_region(&poking));

        let bx = Region::cube(2, 4.0).unwrap();
        let inner = Region::ball(pt(&[2.0, 2.0]), 2.0).unwrap();
        assert!(bx.contains_region(&inner));
        assert!(!bx.contains_region(&Region::ball(pt(&[2.0, 2.0]), 2.1).unwrap()));

        assert!(Region::origin_ball(2, 3.0)
            .unwrap()
            .contains_region(&Region::cube(2, 2.0).unwrap()));
    }

    #[test]
    fn disjointness_checks() {
        let b1 = Region::origin_ball(2, 1.0).unwrap();
        let far = Region::ball(pt(&[3.0, 0.0]), 1.0).unwrap();
        assert!(b1.disjoint_from(&far));
        let touching = Region::ball(pt(&[2.0, 0.0]), 1.0).unwrap();
        assert!(!b1.disjoint_from(&touching));

        let ann = Region::origin_annulus(2, 4.0, 9.0).unwrap();
        assert!(b1.disjoint_from(&ann));
        assert!(ann.disjoint_from(&b1));
    }

    #[test]
    fn scaling_by_two_is_exact() {
        // Doubling coordinates and radii multiplies IEEE distances exactly
        // by two, so membership and adjacency decisions are unchanged.
        let mut rng = RngStream::new(77, 0).rng();
        let region = Region::cube(2, 8.0).unwrap();
        for _ in 0..500 {
            let a = region.sample_uniform(&mut rng);
            let b = region.sample_uniform(&mut rng);
            let d1 = a.distance_to(&b);
            let a2 = Point::new(a.coords().iter().map(|c| 2.0 * c)).unwrap();
            let b2 = Point::new(b.coords().iter().map(|c| 2.0 * c)).unwrap();
            assert_eq!(2.0 * d1, a2.distance_to(&b2));
        }
    }

    #[test]
    fn points_csv_round_trips() {
        let region = Region::origin_ball(2, 5.0).unwrap();
        let a = sample_poisson(Role::A, 0.5, &region, RngStream::new(3, 0)).unwrap();
        let b = sample_poisson(Role::B, 0.25, &region.enlarge(0.5).unwrap(), RngStream::new(3, 1))
            .unwrap();
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &[&a, &b]).unwrap();
        let back = read_points_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].points, a.points);
        assert_eq!(back[0].role, Role::A);
        assert_eq!(back[0].generating_region, a.generating_region);
        assert_eq!(back[1].points, b.points);
        assert_eq!(back[1].intensity, b.intensity);
    }

    #[test]
    fn region_text_format_round_trips() {
        for r in [
            Region::origin_ball(2, 1.25).unwrap(),
            Region::cube(3, 4.0).unwrap(),
            Region::origin_annulus(2, 0.5, 9.0).unwrap(),
        ] {
            assert_eq!(parse_region(&region_to_string(&r)).unwrap(), r);
        }
        assert!(parse_region("pyramid:0,0;1").is_err());
    }
}
