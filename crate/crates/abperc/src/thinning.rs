//! Classification and dependent thinning of the a-process.
//!
//! Each a-point is *useful* when some b-point lies within the usefulness
//! radius (closed test), and carries an independent uniform drawn at
//! classification time. Thinning keeps useful points with probability `p`
//! and useless points with probability `q` by comparing the stored uniform
//! against the matching threshold: retained iff `uniform < p` (or `q`).
//! Because the uniforms are fixed once, retention is monotone in `(p, q)`
//! — raising either probability never drops a retained point — and
//! thinnings at different `(p, q)` of one marked configuration are coupled
//! through the same uniforms. Thinning of the b-process is intentionally
//! not provided.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{fmt_f64, Point, PointConfig, Role};
use crate::grid::build_cell_grid;
use crate::rng::RngStream;

/// Retention probabilities for useful (`p`) and useless (`q`) points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThinningParams {
    pub p: f64,
    pub q: f64,
}

impl ThinningParams {
    pub fn new(p: f64, q: f64) -> Result<ThinningParams> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(ThinningParams { p, q })
    }
}

/// Per-point override of the probabilistic retention rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ForceState {
    #[default]
    None,
    Retain,
    Remove,
}

/// An a-configuration whose points carry a usefulness flag and a uniform
/// retention mark.
#[derive(Clone, Debug)]
pub struct MarkedConfig {
    pub base: PointConfig,
    pub useful: Vec<bool>,
    pub uniforms: Vec<f64>,
    pub usefulness_radius: f64,
    forced: Vec<ForceState>,
}

/// Classify every point of `a` by proximity to `b` and attach uniforms
/// drawn from `stream`.
///
/// The classification is only unbiased when `b` covers everything within
/// the usefulness radius of `a`'s window, so `b`'s generating region must
/// contain `a`'s enlarged by that radius; anything smaller silently
/// misclassifies boundary points and is rejected.
pub fn classify_useful(
    a: &PointConfig,
    b: &PointConfig,
    usefulness_radius: f64,
    stream: RngStream,
) -> Result<MarkedConfig> {
    if !(usefulness_radius > 0.0) || !usefulness_radius.is_finite() {
        return Err(Error::invalid(format!(
            "usefulness radius must be positive and finite, got {usefulness_radius}"
        )));
    }
    if a.role != Role::A || b.role != Role::B {
        return Err(Error::invalid("classification expects roles a then b"));
    }
    if a.dim() != b.dim() {
        return Err(Error::invalid("classification needs equal dimensions"));
    }
    let needed = a.generating_region.enlarge(usefulness_radius)?;
    if !b.generating_region.contains_region(&needed) {
        return Err(Error::invalid(
            "b-region must cover the a-region enlarged by the usefulness radius",
        ));
    }
    let grid = build_cell_grid(&b.points, usefulness_radius, b.dim());
    let useful: Vec<bool> = a
        .points
        .iter()
        .map(|x| grid.has_neighbor_within(x.coords(), usefulness_radius))
        .collect();
    let mut rng = stream.rng();
    let uniforms: Vec<f64> = (0..a.len()).map(|_| rng.random()).collect();
    let forced = vec![ForceState::None; a.len()];
    Ok(MarkedConfig { base: a.clone(), useful, uniforms, usefulness_radius, forced })
}

impl MarkedConfig {
    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn n_useful(&self) -> usize {
        self.useful.iter().filter(|u| **u).count()
    }

    /// Override the retention decision of one point.
    pub fn force_state(&mut self, index: usize, state: ForceState) -> Result<()> {
        if index >= self.len() {
            return Err(Error::invalid(format!(
                "point index {index} out of range for {} points",
                self.len()
            )));
        }
        self.forced[index] = state;
        Ok(())
    }

    pub fn clear_forced(&mut self) {
        self.forced.fill(ForceState::None);
    }

    /// Retention mask: useful points need `uniform < p`, useless points
    /// `uniform < q`, except where a force overrides.
    pub fn retained_mask(&self, params: ThinningParams) -> Vec<bool> {
        self.useful
            .iter()
            .zip(&self.uniforms)
            .zip(&self.forced)
            .map(|((useful, u), forced)| match forced {
                ForceState::Retain => true,
                ForceState::Remove => false,
                ForceState::None => *u < if *useful { params.p } else { params.q },
            })
            .collect()
    }

    /// The thinned configuration: retained points only, same window.
    pub fn pq_thin(&self, params: ThinningParams) -> PointConfig {
        let mask = self.retained_mask(params);
        let points: Vec<Point> = self
            .base
            .points
            .iter()
            .zip(&mask)
            .filter(|(_, keep)| **keep)
            .map(|(pt, _)| pt.clone())
            .collect();
        PointConfig::new(
            points,
            self.base.role,
            self.base.intensity,
            self.base.generating_region.clone(),
        )
        .expect("retained points stay inside the original window")
    }
}

/// Write a marked configuration as CSV rows `x0,...,x{d-1},useful,uniform`.
pub fn write_marked_csv<W: Write>(mut w: W, m: &MarkedConfig) -> Result<()> {
    writeln!(
        w,
        "# config role={} intensity={} region={} usefulness_radius={}",
        m.base.role,
        fmt_f64(m.base.intensity),
        crate::geometry::region_to_string(&m.base.generating_region),
        fmt_f64(m.usefulness_radius)
    )?;
    let d = m.base.dim();
    for i in 0..d {
        write!(w, "x{i},")?;
    }
    writeln!(w, "useful,uniform")?;
    for ((pt, useful), u) in m.base.points.iter().zip(&m.useful).zip(&m.uniforms) {
        for c in pt.coords() {
            write!(w, "{},", fmt_f64(*c))?;
        }
        writeln!(w, "{},{}", if *useful { 1 } else { 0 }, fmt_f64(*u))?;
    }
    Ok(())
}

/// Inverse of [`write_marked_csv`].
pub fn read_marked_csv<R: BufRead>(r: R) -> Result<MarkedConfig> {
    let mut meta: Option<(Role, f64, crate::geometry::Region, f64)> = None;
    let mut useful = Vec::new();
    let mut uniforms = Vec::new();
    let mut points = Vec::new();
    let mut saw_header = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(cfg) = rest.trim().strip_prefix("config ") {
                let mut role = None;
                let mut intensity = None;
                let mut region = None;
                let mut radius = None;
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
                        "region" => region = Some(crate::geometry::parse_region(v)?),
                        "usefulness_radius" => {
                            radius = Some(v.parse::<f64>().map_err(|e| {
                                Error::invalid(format!("bad usefulness radius {v:?}: {e}"))
                            })?)
                        }
                        _ => return Err(Error::invalid(format!("unknown config field {k:?}"))),
                    }
                }
                match (role, intensity, region, radius) {
                    (Some(role), Some(i), Some(reg), Some(rad)) => meta = Some((role, i, reg, rad)),
                    _ => {
                        return Err(Error::invalid(
                            "config line must set role, intensity, region, usefulness_radius",
                        ))
                    }
                }
            }
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 3 {
            return Err(Error::invalid(format!("bad marked row {line:?}")));
        }
        let (coord_fields, tail) = fields.split_at(fields.len() - 2);
        let coords: crate::geometry::Coords = coord_fields
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::invalid(format!("bad coordinate {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        points.push(Point::new(coords)?);
        useful.push(match tail[0] {
            "1" => true,
            "0" => false,
            other => return Err(Error::invalid(format!("bad useful flag {other:?}"))),
        });
        uniforms.push(
            tail[1]
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad uniform {:?}: {e}", tail[1])))?,
        );
    }
    let (role, intensity, region, usefulness_radius) =
        meta.ok_or_else(|| Error::invalid("marked csv is missing its config line"))?;
    let n = points.len();
    let base = PointConfig::new(points, role, intensity, region)?;
    Ok(MarkedConfig {
        base,
        useful,
        uniforms,
        usefulness_radius,
        forced: vec![ForceState::None; n],
    })
}
