//! Maps from a planar lattice into a finite metric space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::grid::GridSpec;
use crate::calculus::loops::SampledLoop;
use crate::error::{Error, Result};
use crate::geodesic::{eval_geodesic, geodesic};
use crate::space::{FiniteMetricSpace, Norm};

/// `values[k]` is the image of lattice node `k`; unmasked nodes map to `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledMap {
    pub grid: GridSpec,
    pub values: Vec<Option<usize>>,
    /// Largest `d(φ(u), φ(v)) / |u - v|` over lattice-adjacent masked nodes.
    pub lip_est: f64,
}

impl SampledMap {
    pub fn new(space: &FiniteMetricSpace, grid: GridSpec, values: Vec<Option<usize>>) -> Result<Self> {
        grid.check()?;
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!("map has {} values for {} nodes", values.len(), grid.len())));
        }
        for (k, v) in values.iter().enumerate() {
            match (grid.mask[k], v) {
                (true, Some(p)) => space.check_index(*p)?,
                (true, None) => return Err(Error::InvalidInput(format!("masked node {k} has no value"))),
                (false, _) => {}
            }
        }
        let mut lip_est: f64 = 0.0;
        for k in 0..grid.len() {
            let Some(p) = values[k] else { continue };
            for (a, b) in [(1, 0), (0, 1)] {
                if let Some(q) = grid.offset(k, a, b).and_then(|m| values[m]) {
                    lip_est = lip_est.max(space.dist(p, q) / grid.spacing);
                }
            }
        }
        Ok(Self { grid, values, lip_est })
    }

    pub fn at(&self, k: usize) -> Option<usize> {
        self.values[k]
    }
}

/// Position of a node in turns, `θ/2π ∈ [0, 1)`.
fn turns(p: [f64; 2]) -> f64 {
    let t = p[1].atan2(p[0]) / std::f64::consts::TAU;
    if t < 0.0 {
        t + 1.0
    } else {
        t
    }
}

/// Index of the loop sample whose time is circularly nearest to `t`.
fn nearest_sample(lp: &SampledLoop, t: f64) -> usize {
    let n = lp.segments();
    let mut best = (f64::INFINITY, 0);
    for i in 0..n {
        let d = (lp.times[i] - t).abs();
        let d = d.min(1.0 - d);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Radial geodesic filling of a loop on the Euclidean disc grid:
/// `x₀` for `r <= ½`, and the point at arclength `2(r - ½)·d(x₀, γ(θ))` on
/// the canonical geodesic from `x₀` to `γ(θ)` otherwise, where `γ(θ)` is the
/// loop sample at the nearest angle. Nodes on the boundary cycle take `γ(θ)`.
pub fn cone_extension(space: &FiniteMetricSpace, lp: &SampledLoop, x0: usize, grid_n: usize) -> Result<SampledMap> {
    space.check_index(x0)?;
    lp.check()?;
    lp.check_points(space)?;
    let grid = GridSpec::disc(grid_n, Norm::L2)?;
    let mut on_boundary = vec![false; grid.len()];
    for k in grid.boundary_cycle()? {
        on_boundary[k] = true;
    }
    // One canonical geodesic per loop sample.
    let geos = (0..lp.segments())
        .map(|i| geodesic(space, x0, lp.points[i]))
        .collect::<Result<Vec<_>>>()?;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if !grid.mask[k] {
                return Ok(None);
            }
            let p = grid.position(k);
            let r = Norm::L2.eval(p);
            let sample = nearest_sample(lp, turns(p));
            if on_boundary[k] {
                return Ok(Some(lp.points[sample]));
            }
            if r <= 0.5 {
                return Ok(Some(x0));
            }
            let g = &geos[sample];
            let s = (2.0 * (r - 0.5)).min(1.0) * g.length();
            eval_geodesic(g, s).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    SampledMap::new(space, grid, values)
}

/// Whether every boundary-cycle node carries the loop sample at its nearest
/// angle and every sample shows up along the cycle.
pub fn boundary_reproduces_loop(map: &SampledMap, lp: &SampledLoop) -> Result<bool> {
    let mut seen = vec![false; lp.segments()];
    for k in map.grid.boundary_cycle()? {
        let i = nearest_sample(lp, turns(map.grid.position(k)));
        if map.values[k] != Some(lp.points[i]) {
            return Ok(false);
        }
        seen[i] = true;
    }
    Ok(seen.into_iter().all(|s| s))
}

/// Whether every masked node with Euclidean radius at most ½ maps to `x0`.
pub fn inner_disc_constant(map: &SampledMap, x0: usize) -> bool {
    (0..map.grid.len())
        .filter(|&k| map.grid.mask[k] && Norm::L2.eval(map.grid.position(k)) <= 0.5)
        .all(|k| map.values[k] == Some(x0))
}

/// The disc grid of `grid_n` nodes mapped identically onto a space built
/// from the masked node positions under `norm`.
pub fn identity_disc_map(grid_n: usize, norm: Norm) -> Result<(FiniteMetricSpace, SampledMap)> {
    let grid = GridSpec::disc(grid_n, norm)?;
    let nodes: Vec<usize> = (0..grid.len()).filter(|&k| grid.mask[k]).collect();
    let space = FiniteMetricSpace::from_normed_points(nodes.iter().map(|&k| grid.position(k)).collect(), norm)?
        .with_quantum(grid.spacing);
    let mut values = vec![None; grid.len()];
    for (p, &k) in nodes.iter().enumerate() {
        values[k] = Some(p);
    }
    let map = SampledMap::new(&space, grid, values)?;
    Ok((space, map))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BicombingCheck {
    pub max_dev: f64,
    /// Parameter in `[0, 1]` where `max_dev` is attained.
    pub t_worst: f64,
    pub bound: f64,
    pub allowance: f64,
    pub pass: bool,
    /// `max_dev <= d(y, y′) + allowance`, the sharper bound that holds on trees.
    pub within_endpoint_distance: bool,
}

/// Largest `d(c(t), c′(t))` for the canonical geodesics `c: x → y`,
/// `c′: x → y′` on `[0, 1]`, sampled at the vertex parameters of both.
pub fn bicombing_check(space: &FiniteMetricSpace, x: usize, y: usize, y2: usize, lambda: f64) -> Result<BicombingCheck> {
    let c = geodesic(space, x, y)?;
    let c2 = geodesic(space, x, y2)?;
    let (l, l2) = (c.length(), c2.length());
    let mut ts: Vec<f64> = vec![0.0, 1.0];
    ts.extend(c.arclen.iter().filter(|_| l > 0.0).map(|s| s / l));
    ts.extend(c2.arclen.iter().filter(|_| l2 > 0.0).map(|s| s / l2));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut worst = (0.0, 0.0);
    for t in ts {
        let d = space.dist(eval_geodesic(&c, t * l)?, eval_geodesic(&c2, t * l2)?);
        if d > worst.0 {
            worst = (d, t);
        }
    }
    let dy = space.dist(y, y2);
    let allowance = space.quantum();
    let bound = 4.0 * lambda * dy;
    Ok(BicombingCheck {
        max_dev: worst.0,
        t_worst: worst.1,
        bound,
        allowance,
        pass: worst.0 <= bound + allowance,
        within_endpoint_distance: worst.0 <= dy + allowance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{metric_from_graph, GraphSpec};

    fn star() -> FiniteMetricSpace {
        metric_from_graph(&GraphSpec::new(4, vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])).unwrap()
    }

    #[test]
    fn constant_loop_gives_constant_map() {
        let s = star();
        let lp = SampledLoop::uniform(vec![2; 33]).unwrap();
        let m = cone_extension(&s, &lp, 2, 16).unwrap();
        assert!(m.values.iter().flatten().all(|&v| v == 2));
        assert_eq!(m.lip_est, 0.0);
    }

    #[test]
    fn cone_structure() {
        let s = star();
        let pts: Vec<usize> = (0..=32).map(|i| [1, 0, 2, 0, 3, 0, 1, 0][i % 8]).collect();
        let lp = SampledLoop::uniform(pts).unwrap();
        let m = cone_extension(&s, &lp, 0, 24).unwrap();
        for k in 0..m.grid.len() {
            if m.grid.mask[k] && Norm::L2.eval(m.grid.position(k)) <= 0.5 {
                assert_eq!(m.values[k], Some(0));
            }
        }
        for k in m.grid.boundary_cycle().unwrap() {
            assert!(lp.points.contains(&m.values[k].unwrap()));
        }
    }

    #[test]
    fn identity_map_is_isometric_on_edges() {
        let (_, m) = identity_disc_map(16, Norm::L2).unwrap();
        assert!((m.lip_est - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bicombing_on_a_star() {
        let s = star();
        let b = bicombing_check(&s, 1, 2, 3, 1.0).unwrap();
        assert_eq!((b.max_dev, b.t_worst), (2.0, 1.0));
        assert!(b.pass && b.within_endpoint_distance);
        assert_eq!(bicombing_check(&s, 1, 2, 2, 1.0).unwrap().max_dev, 0.0);
    }
}
