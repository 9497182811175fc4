//! Geometric graphs and their connected components.
//!
//! Two graph families share one component representation: the one-type
//! graph connecting points of a single configuration at distance <= 2r,
//! and the bipartite AB graph connecting a-points to b-points at distance
//! <= r (no edges within a type). Components are labeled canonically by
//! their smallest vertex id, so labelings are comparable across
//! implementations and thread counts.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::{fmt_f64, PointConfig, Region, Role};
use crate::grid::build_cell_grid;

/// Union-find over u32 ids with union by size and path halving. Find order
/// never affects the final partition, so results are deterministic.
#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    pub fn new(n: usize) -> DisjointSet {
        DisjointSet {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Union the sets containing `a` and `b`; returns false when already
    /// joined. Ties between equal sizes keep the smaller root id.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        let (big, small) = match self.size[ra as usize].cmp(&self.size[rb as usize]) {
            std::cmp::Ordering::Greater => (ra, rb),
            std::cmp::Ordering::Less => (rb, ra),
            std::cmp::Ordering::Equal => (ra.min(rb), ra.max(rb)),
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        true
    }

    pub fn connected(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }

    /// Component label per element: the smallest element id in its set.
    pub fn canonical_labels(&mut self) -> Vec<u32> {
        let n = self.len();
        // find() halves paths rather than fully compressing them, so
        // parent entries may still point at intermediate ancestors; the
        // labels must come from the find results themselves.
        let roots: Vec<u32> = (0..n as u32).map(|i| self.find(i)).collect();
        let mut min_of_root: HashMap<u32, u32> = HashMap::new();
        for (i, &r) in roots.iter().enumerate() {
            min_of_root.entry(r).and_modify(|m| *m = (*m).min(i as u32)).or_insert(i as u32);
        }
        roots.iter().map(|r| min_of_root[r]).collect()
    }
}

/// How a vertex id maps back onto the input configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    /// All vertices come from one configuration, ids follow point order.
    OneType,
    /// Vertices `0..n_a` are the a-points, `n_a..n_a+n_b` the b-points.
    Bipartite { n_a: usize },
}

/// Connected-component labeling of a geometric graph.
#[derive(Clone, Debug)]
pub struct ClusterLabels {
    /// Per-vertex component label; the label is the smallest vertex id of
    /// the component.
    pub labels: Vec<u32>,
    pub kind: VertexKind,
    /// The edge rule's distance threshold.
    pub edge_radius: f64,
}

impl ClusterLabels {
    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn n_components(&self) -> usize {
        let mut seen: Vec<u32> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Sizes keyed by component label.
    pub fn component_sizes(&self) -> HashMap<u32, usize> {
        let mut sizes = HashMap::new();
        for &l in &self.labels {
            *sizes.entry(l).or_insert(0) += 1;
        }
        sizes
    }
}

fn check_radius(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("edge radius must be positive and finite, got {r}")));
    }
    Ok(r)
}

/// Components of the one-type graph on `config` with edges at distance
/// <= `edge_radius` (conventionally `2r`).
pub fn one_type_components(config: &PointConfig, edge_radius: f64) -> Result<ClusterLabels> {
    let edge_radius = check_radius(edge_radius)?;
    let n = config.len();
    let grid = build_cell_grid(&config.points, edge_radius, config.dim());
    let mut ds = DisjointSet::new(n);
    let mut nbr = Vec::new();
    for i in 0..n {
        grid.neighbors_within_into(config.points[i].coords(), edge_radius, &mut nbr);
        for &j in &nbr {
            if (j as usize) > i {
                ds.union(i as u32, j);
            }
        }
    }
    Ok(ClusterLabels {
        labels: ds.canonical_labels(),
        kind: VertexKind::OneType,
        edge_radius,
    })
}

/// Components of the bipartite AB graph: a-b edges at distance
/// <= `edge_radius` (conventionally `r`), no edges within a type.
///
/// Vertex ids list the a-points first, then the b-points.
pub fn ab_components(
    a: &PointConfig,
    b: &PointConfig,
    edge_radius: f64,
) -> Result<ClusterLabels> {
    let edge_radius = check_radius(edge_radius)?;
    if a.role != Role::A || b.role != Role::B {
        return Err(Error::invalid("ab graph expects configurations with roles a then b"));
    }
    if a.dim() != b.dim() {
        return Err(Error::invalid("ab graph needs equal dimensions"));
    }
    let n_a = a.len();
    let grid = build_cell_grid(&a.points, edge_radius, a.dim());
    let mut ds = DisjointSet::new(n_a + b.len());
    let mut nbr = Vec::new();
    for (j, q) in b.points.iter().enumerate() {
        grid.neighbors_within_into(q.coords(), edge_radius, &mut nbr);
        for &i in &nbr {
            ds.union(i, (n_a + j) as u32);
        }
    }
    Ok(ClusterLabels {
        labels: ds.canonical_labels(),
        kind: VertexKind::Bipartite { n_a },
        edge_radius,
    })
}

/// The two point sets a crossing must join. Estimators use an inner region
/// and the complement of a larger one realized as a far shell or slab.
#[derive(Clone, Debug)]
pub struct CrossingQuery {
    pub inner: Region,
    pub outer: Region,
}

impl CrossingQuery {
    /// `inner` and `outer` should be disjoint; overlap makes the crossing
    /// event trivially true for a single vertex and is almost always a
    /// setup bug, so provable overlap is rejected.
    pub fn new(inner: Region, outer: Region) -> Result<CrossingQuery> {
        if inner.dim() != outer.dim() {
            return Err(Error::invalid("crossing regions must share a dimension"));
        }
        if !inner.disjoint_from(&outer) {
            return Err(Error::invalid(
                "crossing regions overlap (or cannot be proven disjoint)",
            ));
        }
        Ok(CrossingQuery { inner, outer })
    }
}

/// Whether some component holds a vertex in `query.inner` and a vertex in
/// `query.outer`. `restrict` limits the witnesses on BOTH sides to one
/// point type (bipartite graphs only).
pub fn crosses(
    labels: &ClusterLabels,
    a: &PointConfig,
    b: Option<&PointConfig>,
    query: &CrossingQuery,
    restrict: Option<Role>,
) -> Result<bool> {
    let n_a = a.len();
    match (labels.kind, b) {
        (VertexKind::OneType, None) => {
            if labels.n_vertices() != n_a {
                return Err(Error::invalid("label count does not match configuration"));
            }
        }
        (VertexKind::Bipartite { n_a: expect_a }, Some(b)) => {
            if expect_a != n_a || labels.n_vertices() != n_a + b.len() {
                return Err(Error::invalid("label count does not match configurations"));
            }
        }
        (VertexKind::OneType, Some(_)) => {
            return Err(Error::invalid("one-type labels take no second configuration"))
        }
        (VertexKind::Bipartite { .. }, None) => {
            return Err(Error::invalid("bipartite labels need the b configuration"))
        }
    }
    if restrict.is_some() && labels.kind == VertexKind::OneType {
        return Err(Error::invalid("role restriction applies to bipartite graphs only"));
    }

    // Component label -> (has inner witness, has outer witness).
    let mut flags: HashMap<u32, (bool, bool)> = HashMap::new();
    let mut visit = |label: u32, role: Role, coords: &crate::geometry::Point| -> bool {
        if let Some(want) = restrict {
            if role != want {
                return false;
            }
        }
        let e = flags.entry(label).or_insert((false, false));
        if !e.0 && query.inner.contains(coords) {
            e.0 = true;
        }
        if !e.1 && query.outer.contains(coords) {
            e.1 = true;
        }
        e.0 && e.1
    };
    for (i, p) in a.points.iter().enumerate() {
        if visit(labels.labels[i], a.role, p) {
            return Ok(true);
        }
    }
    if let Some(b) = b {
        for (j, q) in b.points.iter().enumerate() {
            if visit(labels.labels[n_a + j], b.role, q) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Write components as CSV rows `vertex_id,role,component_id`.
pub fn write_components_csv<W: Write>(
    mut w: W,
    labels: &ClusterLabels,
    a: &PointConfig,
    b: Option<&PointConfig>,
) -> Result<()> {
    writeln!(w, "# edge_radius={}", fmt_f64(labels.edge_radius))?;
    writeln!(w, "vertex_id,role,component_id")?;
    let n_a = a.len();
    for (i, &l) in labels.labels.iter().enumerate() {
        let role = match labels.kind {
            VertexKind::OneType => a.role,
            VertexKind::Bipartite { .. } => {
                if i < n_a {
                    Role::A
                } else {
                    Role::B
                }
            }
        };
        let _ = b;
        writeln!(w, "{i},{role},{l}")?;
    }
    Ok(())
}

/// Read back rows written by [`write_components_csv`] as
/// `(vertex_id, role, component_id)`.
pub fn read_components_csv<R: BufRead>(r: R) -> Result<Vec<(u32, Role, u32)>> {
    let mut out = Vec::new();
    let mut saw_header = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "vertex_id,role,component_id" {
                return Err(Error::invalid(format!("unexpected component header {line:?}")));
            }
            saw_header = true;
            continue;
        }
        let mut parts = line.split(',');
        let (Some(v), Some(role), Some(c), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(Error::invalid(format!("bad component row {line:?}")));
        };
        out.push((
            v.parse().map_err(|e| Error::invalid(format!("bad vertex id {v:?}: {e}")))?,
            Role::parse(role)?,
            c.parse().map_err(|e| Error::invalid(format!("bad component id {c:?}: {e}")))?,
        ));
    }
    Ok(out)
}
