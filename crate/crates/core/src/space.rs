//! Finite metric spaces: validation, graph metrics, balls and diameters.

use std::sync::OnceLock;

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, MetricViolation, Result};
use crate::pointset::PointSet;

/// Default absolute tolerance for metric axioms.
pub const DEFAULT_TOL_METRIC: f64 = 1e-9;
/// Default slack on closed-ball membership.
pub const DEFAULT_TAU_BALL: f64 = 1e-9;

/// Norms available for planar point samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    #[inline]
    pub fn eval(self, v: [f64; 2]) -> f64 {
        match self {
            Norm::L1 => v[0].abs() + v[1].abs(),
            Norm::L2 => v[0].hypot(v[1]),
            Norm::Linf => v[0].abs().max(v[1].abs()),
        }
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<f64>),
    /// Planar points with norm-induced distances, divided by `divisor`.
    Normed { coords: Vec<[f64; 2]>, norm: Norm, divisor: f64 },
}

/// Tight edges of the space: pairs with no third point metrically between them.
/// Neighbor lists are sorted by index.
pub type Adjacency = Vec<Vec<(usize, f64)>>;

/// A validated finite metric space.
///
/// Immutable after construction. Geodesic structure (the adjacency used for
/// shortest paths) is either inherited from the graph the space was built
/// from, or derived lazily from betweenness in the matrix.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    n: usize,
    storage: Storage,
    labels: Option<Vec<String>>,
    tol_metric: f64,
    adjacency: OnceLock<Adjacency>,
    quantum: OnceLock<f64>,
}

impl FiniteMetricSpace {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn tol_metric(&self) -> f64 {
        self.tol_metric
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.n + j],
            Storage::Normed { coords, norm, divisor } => {
                let (a, b) = (coords[i], coords[j]);
                norm.eval([a[0] - b[0], a[1] - b[1]]) / divisor
            }
        }
    }

    /// Row `i` of the distance matrix, when stored densely.
    pub fn row(&self, i: usize) -> Option<&[f64]> {
        match &self.storage {
            Storage::Dense(d) => Some(&d[i * self.n..(i + 1) * self.n]),
            Storage::Normed { .. } => None,
        }
    }

    /// Planar coordinates, for spaces sampled from a normed plane.
    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        match &self.storage {
            Storage::Normed { coords, .. } => Some(coords),
            Storage::Dense(_) => None,
        }
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.n })
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Overrides the quantization quantum (the largest jump between
    /// consecutive points of a discrete geodesic).
    pub fn with_quantum(self, quantum: f64) -> Self {
        let q = OnceLock::new();
        let _ = q.set(quantum);
        Self { quantum: q, ..self }
    }

    /// The edge-length quantum: the largest tight edge. Every continuum
    /// bound certified on this space is stated up to this allowance.
    pub fn quantum(&self) -> f64 {
        *self.quantum.get_or_init(|| {
            self.adjacency()
                .iter()
                .flat_map(|nb| nb.iter().map(|&(_, w)| w))
                .fold(0.0, f64::max)
        })
    }

    pub fn adjacency(&self) -> &Adjacency {
        self.adjacency.get_or_init(|| betweenness_skeleton(self))
    }

    pub fn diameter(&self) -> f64 {
        (0..self.n)
            .into_par_iter()
            .map(|i| (0..self.n).map(|j| self.dist(i, j)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    /// Sorted distinct distances from `center`, including 0.
    pub fn realized_radii(&self, center: usize) -> Vec<f64> {
        let mut r: Vec<f64> = (0..self.n).map(|p| self.dist(center, p)).collect();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }

    /// The same point set with every distance divided by `sigma`.
    pub fn rescaled(&self, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::ParameterOutOfRange {
                name: "sigma",
                value: sigma,
                reason: "scale must be positive".into(),
            });
        }
        let storage = match &self.storage {
            Storage::Dense(d) => Storage::Dense(d.iter().map(|x| x / sigma).collect()),
            Storage::Normed { coords, norm, divisor } => Storage::Normed {
                coords: coords.clone(),
                norm: *norm,
                divisor: divisor * sigma,
            },
        };
        let adjacency = OnceLock::new();
        if let Some(adj) = self.adjacency.get() {
            let scaled = adj
                .iter()
                .map(|nb| nb.iter().map(|&(v, w)| (v, w / sigma)).collect())
                .collect();
            let _ = adjacency.set(scaled);
        }
        let quantum = OnceLock::new();
        if let Some(q) = self.quantum.get() {
            let _ = quantum.set(q / sigma);
        }
        Ok(Self {
            n: self.n,
            storage,
            labels: self.labels.clone(),
            tol_metric: self.tol_metric,
            adjacency,
            quantum,
        })
    }

    /// Builds a space from planar points with a norm-induced metric.
    /// Norms satisfy the metric axioms, so no O(n³) validation is run.
    pub fn from_normed_points(coords: Vec<[f64; 2]>, norm: Norm) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptySpace);
        }
        if coords.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        Ok(Self {
            n: coords.len(),
            storage: Storage::Normed { coords, norm, divisor: 1.0 },
            labels: None,
            tol_metric: DEFAULT_TOL_METRIC,
            adjacency: OnceLock::new(),
            quantum: OnceLock::new(),
        })
    }

    /// Full distance matrix as nested rows (for serialization).
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.dist(i, j)).collect()).collect()
    }
}

fn dense(n: usize, dist: Vec<f64>, tol_metric: f64) -> FiniteMetricSpace {
    FiniteMetricSpace {
        n,
        storage: Storage::Dense(dist),
        labels: None,
        tol_metric,
        adjacency: OnceLock::new(),
        quantum: OnceLock::new(),
    }
}

/// Validates a square distance matrix and returns the space.
///
/// On failure every violated axiom is listed once, with its worst offender.
pub fn validate_metric(matrix: &[Vec<f64>], tol_metric: f64) -> Result<FiniteMetricSpace> {
    let n = matrix.len();
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    if let Some((row, r)) = matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::NotSquare { rows: n, row, cols: r.len() });
    }
    let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
    validate_flat(n, flat, tol_metric)
}

/// Same as [`validate_metric`] on a row-major buffer of length `n * n`.
pub fn validate_flat(n: usize, flat: Vec<f64>, tol_metric: f64) -> Result<FiniteMetricSpace> {
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    if flat.len() != n * n {
        return Err(Error::NotSquare { rows: n, row: flat.len() / n, cols: flat.len() % n });
    }
    let at = |i: usize, j: usize| flat[i * n + j];
    let mut violations = Vec::new();

    if let Some(idx) = flat.iter().position(|x| !x.is_finite()) {
        violations.push(MetricViolation::NonFinite { i: idx / n, j: idx % n });
        return Err(Error::InvalidMetric(violations));
    }
    // worst = most negative; first in row-major order on ties
    let mut neg: Option<(usize, usize, f64)> = None;
    let mut diag: Option<(usize, f64)> = None;
    let mut asym: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        if at(i, i) != 0.0 && diag.is_none_or(|(_, v)| at(i, i).abs() > v.abs()) {
            diag = Some((i, at(i, i)));
        }
        for j in 0..n {
            let v = at(i, j);
            if v < 0.0 && neg.is_none_or(|(_, _, w)| v < w) {
                neg = Some((i, j, v));
            }
            if i < j {
                let diff = (v - at(j, i)).abs();
                if diff > 0.0 && asym.is_none_or(|(_, _, w)| diff > w) {
                    asym = Some((i, j, diff));
                }
            }
        }
    }
    if let Some((i, j, value)) = neg {
        violations.push(MetricViolation::NegativeEntry { i, j, value });
    }
    if let Some((i, value)) = diag {
        violations.push(MetricViolation::NonzeroDiagonal { i, value });
    }
    if let Some((i, j, difference)) = asym {
        violations.push(MetricViolation::AsymmetricInput { i, j, difference });
    }

    // Worst triangle slack; ties go to the smallest (i, k, j).
    let worst = (0..n)
        .into_par_iter()
        .filter_map(|i| {
            let mut best: Option<(f64, usize, usize)> = None;
            for k in 0..n {
                let dik = at(i, k);
                for j in 0..n {
                    let slack = dik - at(i, j) - at(j, k);
                    if slack > tol_metric && best.is_none_or(|(s, _, _)| slack > s) {
                        best = Some((slack, k, j));
                    }
                }
            }
            best.map(|(s, k, j)| (s, i, k, j))
        })
        .reduce_with(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2, b.3) < (a.1, a.2, a.3)) {
                b
            } else {
                a
            }
        });
    if let Some((slack, i, k, j)) = worst {
        violations.push(MetricViolation::TriangleViolation { i, j, k, slack });
    }

    if violations.is_empty() {
        Ok(dense(n, flat, tol_metric))
    } else {
        Err(Error::InvalidMetric(violations))
    }
}

/// An undirected weighted graph whose shortest-path metric is a finite
/// model of a geodesic space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphSpec {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize, f64)>) -> Self {
        Self { vertex_count, edges }
    }

    pub fn max_edge_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).fold(0.0, f64::max)
    }
}

/// All-pairs shortest-path metric of a connected graph.
///
/// The tight graph edges (those realizing the distance between their
/// endpoints) become the adjacency used for geodesics, and the quantum is
/// the largest edge weight.
pub fn metric_from_graph(g: &GraphSpec) -> Result<FiniteMetricSpace> {
    let n = g.vertex_count;
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    let mut graph = UnGraph::<(), f64>::with_capacity(n, g.edges.len());
    for _ in 0..n {
        graph.add_node(());
    }
    for &(u, v, w) in &g.edges {
        if u >= n || v >= n {
            return Err(Error::IndexOutOfRange { index: u.max(v), len: n });
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop at {u}")));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidGraph(format!("edge ({u},{v}) has weight {w}")));
        }
        graph.add_edge(NodeIndex::new(u), NodeIndex::new(v), w);
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let reach = dijkstra(&graph, NodeIndex::new(s), None, |e| *e.weight());
            let mut row = vec![f64::INFINITY; n];
            for (node, d) in reach {
                row[node.index()] = d;
            }
            row
        })
        .collect();
    if let Some(v) = rows[0].iter().position(|d| d.is_infinite()) {
        return Err(Error::DisconnectedGraph { u: 0, v });
    }
    let mut flat: Vec<f64> = rows.into_iter().flatten().collect();
    // Dijkstra sums along different paths can differ in the last ulp.
    for i in 0..n {
        for j in i + 1..n {
            let m = flat[i * n + j].min(flat[j * n + i]);
            flat[i * n + j] = m;
            flat[j * n + i] = m;
        }
    }

    let mut adjacency: Adjacency = vec![Vec::new(); n];
    for &(u, v, w) in &g.edges {
        if w <= flat[u * n + v] + DEFAULT_TOL_METRIC {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
    }
    for nb in &mut adjacency {
        nb.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        nb.dedup_by_key(|e| e.0);
    }
    let space = dense(n, flat, DEFAULT_TOL_METRIC);
    let _ = space.adjacency.set(adjacency);
    Ok(space.with_quantum(g.max_edge_weight()))
}

/// Pairs `(u, v)` with no third point `w` satisfying `d(u,w) + d(w,v) = d(u,v)`.
/// Shortest paths over these edges realize every distance.
fn betweenness_skeleton(space: &FiniteMetricSpace) -> Adjacency {
    let n = space.len();
    let tol = space.tol_metric();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|u| {
            (0..n)
                .filter(|&v| v != u)
                .filter_map(|v| {
                    let duv = space.dist(u, v);
                    let between = (0..n).any(|w| {
                        if w == u || w == v {
                            return false;
                        }
                        let (a, b) = (space.dist(u, w), space.dist(w, v));
                        a > 0.0 && b > 0.0 && a + b <= duv + tol
                    });
                    (!between).then_some((v, duv))
                })
                .collect()
        })
        .collect();
    rows
}

/// A closed ball `{p : d(center, p) <= radius + tau}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
}

fn default_tau() -> f64 {
    DEFAULT_TAU_BALL
}

impl Ball {
    pub fn new(center: usize, radius: f64) -> Self {
        Self { center, radius, tau: DEFAULT_TAU_BALL }
    }

    #[inline]
    pub fn contains(&self, space: &FiniteMetricSpace, p: usize) -> bool {
        space.dist(self.center, p) <= self.radius + self.tau
    }
}

pub fn ball_members(space: &FiniteMetricSpace, ball: &Ball) -> Result<PointSet> {
    space.check_index(ball.center)?;
    Ok(PointSet::from_indices(space.len(), (0..space.len()).filter(|&p| ball.contains(space, p))))
}

/// Largest pairwise distance within `set`.
pub fn set_diameter(space: &FiniteMetricSpace, set: &PointSet) -> Result<f64> {
    let pts = set.to_vec();
    if pts.is_empty() {
        return Err(Error::EmptySetDiameter);
    }
    let mut d = 0.0f64;
    for (a, &p) in pts.iter().enumerate() {
        for &q in &pts[a + 1..] {
            d = d.max(space.dist(p, q));
        }
    }
    Ok(d)
}

/// How far the pair `(x, y)` is from having a metric midpoint: the best
/// candidate `m` minimizes `max(|d(x,m) - d/2|, |d(m,y) - d/2|)`.
/// Returns `(defect, m)`, ties to the smallest `m`.
pub fn midpoint_defect(space: &FiniteMetricSpace, x: usize, y: usize) -> (f64, usize) {
    let half = space.dist(x, y) / 2.0;
    let mut best = (f64::INFINITY, 0);
    for m in 0..space.len() {
        let e = (space.dist(x, m) - half).abs().max((space.dist(m, y) - half).abs());
        if e < best.0 {
            best = (e, m);
        }
    }
    best
}

/// Maximum midpoint defect over all pairs. Zero for spaces where every pair
/// has an exact midpoint; positive values quantify failure of geodesicity.
pub fn geodesicity_defect(space: &FiniteMetricSpace) -> f64 {
    let n = space.len();
    (0..n)
        .into_par_iter()
        .map(|x| (x + 1..n).map(|y| midpoint_defect(space, x, y).0).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}
