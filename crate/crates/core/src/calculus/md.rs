//! Finite-difference metric derivatives of lattice maps.
//!
//! At node `z` and unit direction `v` the estimate is
//! `d(φ(z'), φ(z)) / |z' - z|` where `z'` is the lattice node nearest to
//! `z + r·v`. Offsets are rounded symmetrically, so `-v` probes exactly the
//! mirrored node.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::map::SampledMap;
use crate::error::{Error, Result};
use crate::space::FiniteMetricSpace;

pub const DEFAULT_DIRECTIONS: usize = 16;
pub const DEFAULT_LADDER: [usize; 2] = [4, 2];
pub const DEFAULT_TAU: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdConfig {
    pub directions: usize,
    /// Probe distances in lattice steps, coarsest first.
    pub ladder: Vec<usize>,
}

impl Default for MdConfig {
    fn default() -> Self {
        Self { directions: DEFAULT_DIRECTIONS, ladder: DEFAULT_LADDER.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdNode {
    pub node: usize,
    /// `md[s][j]`: estimate at ladder rung `s` in direction `j`.
    pub md: Vec<Vec<f64>>,
    pub converged: bool,
    /// Largest disagreement between consecutive rungs.
    pub ladder_gap: f64,
    pub min: f64,
    pub max: f64,
}

impl MdNode {
    /// Estimates at the finest rung.
    pub fn finest(&self) -> &[f64] {
        self.md.last().expect("ladder is nonempty")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdField {
    pub config: MdConfig,
    pub spacing: f64,
    pub lip_est: f64,
    /// Declared estimator tolerance `2q/r_min + 2h·lip_est`, `q` the space quantum.
    pub tolerance: f64,
    pub nodes: Vec<MdNode>,
}

impl MdField {
    pub fn unit(&self, j: usize) -> [f64; 2] {
        let a = std::f64::consts::TAU * j as f64 / self.config.directions as f64;
        [a.cos(), a.sin()]
    }

    pub fn converged_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.converged).count()
    }
}

fn offsets(directions: usize, steps: usize) -> Vec<(i64, i64)> {
    (0..directions)
        .map(|j| {
            let a = std::f64::consts::TAU * j as f64 / directions as f64;
            ((steps as f64 * a.cos()).round() as i64, (steps as f64 * a.sin()).round() as i64)
        })
        .collect()
}

pub fn md_field(space: &FiniteMetricSpace, map: &SampledMap, config: &MdConfig) -> Result<MdField> {
    if config.directions < 4 || config.directions % 2 != 0 {
        return Err(Error::ParameterOutOfRange {
            name: "directions",
            value: config.directions as f64,
            reason: "need an even count of at least 4".into(),
        });
    }
    if config.ladder.is_empty() || config.ladder.contains(&0) {
        return Err(Error::InvalidInput("scale ladder must hold positive step counts".into()));
    }
    let grid = &map.grid;
    let h = grid.spacing;
    let probes: Vec<Vec<(i64, i64)>> = config.ladder.iter().map(|&s| offsets(config.directions, s)).collect();
    let r_min = *config.ladder.iter().min().unwrap() as f64 * h;
    let tolerance = 2.0 * space.quantum() / r_min + 2.0 * h * map.lip_est;
    let nodes: Vec<MdNode> = (0..grid.len())
        .into_par_iter()
        .filter_map(|k| {
            let p = map.at(k)?;
            let mut md = Vec::with_capacity(probes.len());
            for rung in &probes {
                let mut row = Vec::with_capacity(rung.len());
                for &(a, b) in rung {
                    let q = map.at(grid.offset(k, a, b)?)?;
                    row.push(space.dist(p, q) / (h * ((a * a + b * b) as f64).sqrt()));
                }
                md.push(row);
            }
            let ladder_gap = md
                .windows(2)
                .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            let fine = md.last().unwrap();
            let min = fine.iter().copied().fold(f64::INFINITY, f64::min);
            let max = fine.iter().copied().fold(0.0, f64::max);
            Some(MdNode { node: k, converged: ladder_gap <= tolerance, ladder_gap, min, max, md })
        })
        .collect();
    if nodes.is_empty() {
        return Err(Error::DomainTooSmall("no node has every probe inside the domain".into()));
    }
    Ok(MdField { config: config.clone(), spacing: h, lip_est: map.lip_est, tolerance, nodes })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct NodeResiduals {
    pub node: usize,
    /// Largest change between ladder rungs.
    pub homogeneity: f64,
    /// Largest `|md(v) - md(-v)|`.
    pub symmetry: f64,
    /// Largest `(|md(v) - md(v′)| - lip_est·|v - v′|)₊`.
    pub direction_lipschitz: f64,
    /// Largest `(md(v + w) - md(v) - md(w))₊` over direction pairs whose sum
    /// is again along a sampled direction.
    pub subadditivity: f64,
}

impl NodeResiduals {
    pub fn max(&self) -> f64 {
        self.homogeneity.max(self.symmetry).max(self.direction_lipschitz).max(self.subadditivity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormReport {
    pub tolerance: f64,
    pub converged_nodes: usize,
    pub within_tolerance: usize,
    pub fraction_within: f64,
    pub max: NodeResiduals,
    pub nodes: Vec<NodeResiduals>,
}

fn residuals(field: &MdField, node: &MdNode) -> NodeResiduals {
    let d = field.config.directions;
    let md = node.finest();
    let mut r = NodeResiduals { node: node.node, homogeneity: node.ladder_gap, ..Default::default() };
    for j in 0..d {
        r.symmetry = r.symmetry.max((md[j] - md[(j + d / 2) % d]).abs());
        for k in j + 1..d {
            let (u, v) = (field.unit(j), field.unit(k));
            let dv = (u[0] - v[0]).hypot(u[1] - v[1]);
            r.direction_lipschitz = r.direction_lipschitz.max((md[j] - md[k]).abs() - field.lip_est * dv);
            if (j + k) % 2 == 0 && k - j != d / 2 {
                // v_j + v_k = 2cos(Δ/2)·v_m with m the bisecting direction.
                let half = std::f64::consts::PI * (k - j) as f64 / d as f64;
                let mut c = 2.0 * half.cos();
                let mut m = (j + k) / 2;
                if c < 0.0 {
                    c = -c;
                    m = (m + d / 2) % d;
                }
                r.subadditivity = r.subadditivity.max(c * md[m] - md[j] - md[k]);
            }
        }
    }
    r.direction_lipschitz = r.direction_lipschitz.max(0.0);
    r.subadditivity = r.subadditivity.max(0.0);
    r
}

/// Seminorm residuals at every converged node.
pub fn seminorm_check(field: &MdField) -> SeminormReport {
    let nodes: Vec<NodeResiduals> = field.nodes.iter().filter(|n| n.converged).map(|n| residuals(field, n)).collect();
    let within = nodes.iter().filter(|r| r.max() <= field.tolerance).count();
    let mut max = NodeResiduals::default();
    for r in &nodes {
        max.homogeneity = max.homogeneity.max(r.homogeneity);
        max.symmetry = max.symmetry.max(r.symmetry);
        max.direction_lipschitz = max.direction_lipschitz.max(r.direction_lipschitz);
        max.subadditivity = max.subadditivity.max(r.subadditivity);
    }
    max.node = usize::MAX;
    SeminormReport {
        tolerance: field.tolerance,
        converged_nodes: nodes.len(),
        within_tolerance: within,
        fraction_within: if nodes.is_empty() { 0.0 } else { within as f64 / nodes.len() as f64 },
        max,
        nodes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Degeneracy {
    pub tau: f64,
    pub converged_nodes: usize,
    pub degenerate_nodes: usize,
    pub fraction_degenerate: f64,
    /// Converged nodes flagged degenerate, by lattice index.
    pub mask: Vec<usize>,
}

/// A converged node is degenerate when `min_v md < τ·max_v md` or `max_v md = 0`.
pub fn degeneracy_field(field: &MdField, tau: f64) -> Result<Degeneracy> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::ParameterOutOfRange { name: "tau", value: tau, reason: "must lie in (0, 1)".into() });
    }
    let converged: Vec<&MdNode> = field.nodes.iter().filter(|n| n.converged).collect();
    let mask: Vec<usize> =
        converged.iter().filter(|n| n.max == 0.0 || n.min < tau * n.max).map(|n| n.node).collect();
    Ok(Degeneracy {
        tau,
        converged_nodes: converged.len(),
        degenerate_nodes: mask.len(),
        fraction_degenerate: if converged.is_empty() { 0.0 } else { mask.len() as f64 / converged.len() as f64 },
        mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::map::identity_disc_map;
    use crate::space::Norm;

    #[test]
    fn identity_has_unit_metric_derivative() {
        let (space, map) = identity_disc_map(32, Norm::L2).unwrap();
        let field = md_field(&space, &map, &MdConfig::default()).unwrap();
        for n in &field.nodes {
            assert!(n.converged);
            for &v in n.finest() {
                assert!((v - 1.0).abs() <= 2.0 * field.spacing);
            }
        }
        let report = seminorm_check(&field);
        assert!(report.max.max() <= 2.0 * field.spacing);
        assert_eq!(degeneracy_field(&field, 0.1).unwrap().fraction_degenerate, 0.0);
    }

    #[test]
    fn constant_map_is_fully_degenerate() {
        let (space, mut map) = identity_disc_map(16, Norm::L2).unwrap();
        let c = map.values.iter().flatten().next().copied();
        for v in map.values.iter_mut().filter(|v| v.is_some()) {
            *v = c;
        }
        let map = SampledMap::new(&space, map.grid, map.values).unwrap();
        let field = md_field(&space, &map, &MdConfig::default()).unwrap();
        assert!(field.nodes.iter().all(|n| n.max == 0.0));
        assert_eq!(seminorm_check(&field).max.max(), 0.0);
        assert_eq!(degeneracy_field(&field, 0.1).unwrap().fraction_degenerate, 1.0);
        assert!(degeneracy_field(&field, 1.0).is_err());
    }
}
