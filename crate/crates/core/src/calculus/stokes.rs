//! Discrete Stokes identity for lattice maps.

use serde::Serialize;

use crate::calculus::loops::{closed_trapezoid, fsum, ScalarField};
use crate::calculus::map::SampledMap;
use crate::error::{Error, Result};
use crate::space::FiniteMetricSpace;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesReport {
    pub spacing: f64,
    pub cells: usize,
    pub boundary_nodes: usize,
    /// Trapezoid `∮ (f∘φ) d(π∘φ)` around the counter-clockwise boundary cycle.
    pub boundary_integral: f64,
    /// `Σ det J · h²` over full cells, `J` the cell-averaged difference Jacobian.
    pub area_integral: f64,
    pub residual: f64,
}

pub fn stokes_check(space: &FiniteMetricSpace, map: &SampledMap, f: &ScalarField, pi: &ScalarField) -> Result<StokesReport> {
    for field in [f, pi] {
        if field.values.len() != space.len() {
            return Err(Error::InvalidInput("field size does not match the space".into()));
        }
    }
    let grid = &map.grid;
    let cycle = grid.boundary_cycle()?;
    let image = |k: usize| map.at(k).ok_or_else(|| Error::InvalidInput(format!("node {k} is not mapped")));
    let mut fb = Vec::with_capacity(cycle.len());
    let mut pb = Vec::with_capacity(cycle.len());
    for &k in &cycle {
        let p = image(k)?;
        fb.push(f.values[p]);
        pb.push(pi.values[p]);
    }
    let boundary_integral = closed_trapezoid(&fb, &pb);

    let nx = grid.shape.0;
    let cells = grid.cells();
    let h = grid.spacing;
    let mut terms = Vec::with_capacity(cells.len());
    for &c in &cells {
        let corners = [c, c + 1, c + nx, c + nx + 1];
        let mut fv = [0.0; 4];
        let mut pv = [0.0; 4];
        for (slot, &k) in corners.iter().enumerate() {
            let p = image(k)?;
            fv[slot] = f.values[p];
            pv[slot] = pi.values[p];
        }
        // Differences averaged over the two parallel cell edges, times h.
        let dx = |v: &[f64; 4]| 0.5 * ((v[1] - v[0]) + (v[3] - v[2]));
        let dy = |v: &[f64; 4]| 0.5 * ((v[2] - v[0]) + (v[3] - v[1]));
        terms.push(dx(&fv) * dy(&pv) - dy(&fv) * dx(&pv));
    }
    let area_integral = fsum(terms);
    Ok(StokesReport {
        spacing: h,
        cells: cells.len(),
        boundary_nodes: cycle.len() - 1,
        boundary_integral,
        area_integral,
        residual: (boundary_integral - area_integral).abs(),
    })
}
