//! Square lattices over `[-1, 1]²` with a disc mask.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Norm;

/// `shape.0 × shape.1` nodes at `origin + (i, j)·spacing`; node `(i, j)` has
/// index `j·shape.0 + i`. A cell is the square with lower-left node `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub shape: (usize, usize),
    pub spacing: f64,
    #[serde(default = "default_origin")]
    pub origin: [f64; 2],
    pub mask: Vec<bool>,
}

fn default_origin() -> [f64; 2] {
    [-1.0, -1.0]
}

impl GridSpec {
    /// `grid_n` nodes per side over `[-1, 1]²`. A cell belongs to the domain
    /// when all four corners lie in the closed unit disc of `norm`; the mask
    /// holds the corners of those cells.
    pub fn disc(grid_n: usize, norm: Norm) -> Result<Self> {
        if grid_n < 8 {
            return Err(Error::DomainTooSmall(format!("grid_n must be at least 8, got {grid_n}")));
        }
        let spacing = 2.0 / (grid_n - 1) as f64;
        let mut g = Self { shape: (grid_n, grid_n), spacing, origin: default_origin(), mask: vec![false; grid_n * grid_n] };
        let inside = |g: &Self, i, j| norm.eval(g.position_ij(i, j)) <= 1.0 + 1e-12;
        let mut mask = vec![false; grid_n * grid_n];
        for j in 0..grid_n - 1 {
            for i in 0..grid_n - 1 {
                if inside(&g, i, j) && inside(&g, i + 1, j) && inside(&g, i, j + 1) && inside(&g, i + 1, j + 1) {
                    for (a, b) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                        mask[b * grid_n + a] = true;
                    }
                }
            }
        }
        g.mask = mask;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        let (nx, ny) = self.shape;
        if nx < 2 || ny < 2 || self.mask.len() != nx * ny || !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid shape {:?} with spacing {} does not match a mask of {} entries",
                self.shape,
                self.spacing,
                self.mask.len()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.shape.0 * self.shape.1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.shape.0 + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.shape.0, idx / self.shape.0)
    }

    fn position_ij(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.spacing, self.origin[1] + j as f64 * self.spacing]
    }

    pub fn position(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.coords(idx);
        self.position_ij(i, j)
    }

    /// Node index at integer offset `(di, dj)` from `idx`, if it exists and is masked.
    pub fn offset(&self, idx: usize, di: i64, dj: i64) -> Option<usize> {
        let (i, j) = self.coords(idx);
        let (a, b) = (i as i64 + di, j as i64 + dj);
        if a < 0 || b < 0 || a >= self.shape.0 as i64 || b >= self.shape.1 as i64 {
            return None;
        }
        let k = self.index(a as usize, b as usize);
        self.mask[k].then_some(k)
    }

    /// Cells whose four corners are all masked, by lower-left node index.
    pub fn cells(&self) -> Vec<usize> {
        let (nx, ny) = self.shape;
        let mut out = Vec::new();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let k = self.index(i, j);
                if self.mask[k] && self.mask[k + 1] && self.mask[k + nx] && self.mask[k + nx + 1] {
                    out.push(k);
                }
            }
        }
        out
    }

    /// Masked nodes whose four lattice neighbors are all masked.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| {
                self.mask[k]
                    && [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().all(|&(a, b)| self.offset(k, a, b).is_some())
            })
            .collect()
    }

    /// Counter-clockwise boundary of the union of full cells, as a closed
    /// node sequence (first = last) starting at its lowest index.
    pub fn boundary_cycle(&self) -> Result<Vec<usize>> {
        self.check()?;
        let nx = self.shape.0;
        let cells = self.cells();
        if cells.is_empty() {
            return Err(Error::DomainTooSmall("grid has no full cells".into()));
        }
        let is_cell: std::collections::HashSet<usize> = cells.iter().copied().collect();
        let full = |i: i64, j: i64| -> bool {
            i >= 0 && j >= 0 && (i as usize) < nx - 1 && (j as usize) < self.shape.1 - 1 && is_cell.contains(&self.index(i as usize, j as usize))
        };
        // Directed boundary edges, each cell traversed counter-clockwise.
        let mut next: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &c in &cells {
            let (i, j) = self.coords(c);
            let (ii, jj) = (i as i64, j as i64);
            let (a, b, cc, d) = (c, c + 1, c + nx + 1, c + nx);
            if !full(ii, jj - 1) {
                next.entry(a).or_default().push(b);
            }
            if !full(ii + 1, jj) {
                next.entry(b).or_default().push(cc);
            }
            if !full(ii, jj + 1) {
                next.entry(cc).or_default().push(d);
            }
            if !full(ii - 1, jj) {
                next.entry(d).or_default().push(a);
            }
        }
        let total: usize = next.values().map(Vec::len).sum();
        let start = *next.keys().next().expect("a full cell has boundary edges");
        let mut cycle = vec![start];
        let mut cur = start;
        loop {
            let outs = next.get_mut(&cur).expect("boundary edges chain into a cycle");
            let v = outs.remove(0);
            cycle.push(v);
            cur = v;
            if cur == start && next.get(&start).is_none_or(Vec::is_empty) {
                break;
            }
        }
        if cycle.len() - 1 != total {
            return Err(Error::InvalidInput("mask boundary is not a single closed curve".into()));
        }
        Ok(cycle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_grid_boundary_encloses_cells() {
        let g = GridSpec::disc(16, Norm::L2).unwrap();
        let cycle = g.boundary_cycle().unwrap();
        assert_eq!(cycle.first(), cycle.last());
        // Shoelace area of the boundary equals the cell count times h².
        let area: f64 = cycle
            .windows(2)
            .map(|w| {
                let (p, q) = (g.position(w[0]), g.position(w[1]));
                0.5 * (p[0] * q[1] - q[0] * p[1])
            })
            .sum();
        let cells = g.cells().len() as f64 * g.spacing * g.spacing;
        assert!((area - cells).abs() < 1e-12, "{area} vs {cells}");
        assert!(area > 0.0);
        for w in cycle.windows(2) {
            let ((a, b), (c, d)) = (g.coords(w[0]), g.coords(w[1]));
            assert_eq!(a.abs_diff(c) + b.abs_diff(d), 1);
        }
    }

    #[test]
    fn square_norm_fills_everything() {
        let g = GridSpec::disc(8, Norm::Linf).unwrap();
        assert!(g.mask.iter().all(|&m| m));
        assert_eq!(g.cells().len(), 49);
        assert_eq!(g.boundary_cycle().unwrap().len(), 29);
        assert_eq!(g.interior().len(), 36);
        assert!(GridSpec::disc(7, Norm::L2).is_err());
    }
}
