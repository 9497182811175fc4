//! Uniform cell grid for fixed-radius neighbor queries.
//!
//! Points are hashed into cubic cells of side `cell_size`; a query radius
//! `rho <= cell_size` only needs to scan the 3^d surrounding cells. The
//! final distance test is the same closed `<=` comparison used everywhere
//! else, so grid answers agree bit-for-bit with brute force.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::geometry::{dist, Point};

type CellKey = SmallVec<[i64; 4]>;

#[derive(Clone, Debug)]
pub struct CellGrid {
    dim: usize,
    cell_size: f64,
    /// Flat coordinate storage: point i occupies coords[i*dim .. (i+1)*dim].
    coords: Vec<f64>,
    buckets: HashMap<CellKey, Vec<u32>>,
}

fn cell_of(coords: &[f64], cell_size: f64) -> CellKey {
    coords.iter().map(|c| (c / cell_size).floor() as i64).collect()
}

/// Index `points` for queries of radius up to `max_radius`.
pub fn build_cell_grid(points: &[Point], max_radius: f64, dim: usize) -> CellGrid {
    assert!(max_radius > 0.0 && max_radius.is_finite());
    let cell_size = max_radius;
    let mut coords = Vec::with_capacity(points.len() * dim);
    let mut buckets: HashMap<CellKey, Vec<u32>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        debug_assert_eq!(p.dim(), dim);
        coords.extend_from_slice(p.coords());
        buckets
            .entry(cell_of(p.coords(), cell_size))
            .or_default()
            .push(i as u32);
    }
    CellGrid { dim, cell_size, coords, buckets }
}

impl CellGrid {
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point_coords(&self, i: u32) -> &[f64] {
        let i = i as usize;
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Indices of stored points within `radius` of `q` (closed ball),
    /// ascending. `radius` may not exceed the radius the grid was built for.
    pub fn neighbors_within(&self, q: &[f64], radius: f64) -> Vec<u32> {
        let mut out = Vec::new();
        self.neighbors_within_into(q, radius, &mut out);
        out
    }

    pub fn neighbors_within_into(&self, q: &[f64], radius: f64, out: &mut Vec<u32>) {
        out.clear();
        self.scan(q, radius, |i| {
            out.push(i);
            false
        });
        out.sort_unstable();
    }

    /// Whether any stored point lies within `radius` of `q`.
    pub fn has_neighbor_within(&self, q: &[f64], radius: f64) -> bool {
        let mut found = false;
        self.scan(q, radius, |_| {
            found = true;
            true
        });
        found
    }

    /// Visit every point within `radius` of `q`; the visitor returns `true`
    /// to stop early.
    fn scan<F: FnMut(u32) -> bool>(&self, q: &[f64], radius: f64, mut visit: F) {
        assert_eq!(q.len(), self.dim);
        assert!(
            radius <= self.cell_size,
            "query radius {radius} exceeds grid radius {}",
            self.cell_size
        );
        if self.is_empty() {
            return;
        }
        // The floor-cell of q plus one cell either way covers the closed
        // ball; the extra cell guards rounding at cell boundaries.
        let base: CellKey = cell_of(q, self.cell_size);
        let mut offsets: CellKey = SmallVec::from_elem(-1, self.dim);
        'outer: loop {
            let key: CellKey = base
                .iter()
                .zip(offsets.iter())
                .map(|(b, o)| b + o)
                .collect();
            if let Some(bucket) = self.buckets.get(&key) {
                for &i in bucket {
                    if dist(self.point_coords(i), q) <= radius && visit(i) {
                        return;
                    }
                }
            }
            // Odometer over {-1,0,1}^d.
            for k in 0..self.dim {
                if offsets[k] < 1 {
                    offsets[k] += 1;
                    continue 'outer;
                }
                offsets[k] = -1;
            }
            break;
        }
    }
}
