//! Discrete geodesics: shortest paths with arc-length parameterization.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::FiniteMetricSpace;

/// A shortest path `p_0 .. p_m` with cumulative arclength `s_i = d(p_0, p_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteGeodesic {
    pub points: Vec<usize>,
    pub arclen: Vec<f64>,
}

impl DiscreteGeodesic {
    pub fn start(&self) -> usize {
        self.points[0]
    }

    pub fn end(&self) -> usize {
        *self.points.last().expect("geodesic has at least one point")
    }

    pub fn length(&self) -> f64 {
        *self.arclen.last().expect("geodesic has at least one point")
    }

    /// Number of steps `m`.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    /// The point whose arclength is nearest to `t`; ties go to the smaller index.
    pub fn eval(&self, t: f64) -> Result<usize> {
        eval_geodesic(self, t)
    }

    /// Largest single step along the path.
    pub fn max_step(&self) -> f64 {
        self.arclen.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Evaluates the discrete geodesic at arclength `t`.
pub fn eval_geodesic(geo: &DiscreteGeodesic, t: f64) -> Result<usize> {
    let total = geo.length();
    let slack = 1e-9 * total.max(1.0);
    if !(t >= -slack && t <= total + slack) {
        return Err(Error::ParameterOutOfRange {
            name: "t",
            value: t,
            reason: format!("must lie in [0, {total}]"),
        });
    }
    Ok(geo.points[nearest_index(&geo.arclen, t)])
}

/// Index of the entry of the sorted slice `s` nearest to `t` (smaller index on ties).
pub(crate) fn nearest_index(s: &[f64], t: f64) -> usize {
    let k = s.partition_point(|&x| x < t);
    if k == 0 {
        0
    } else if k == s.len() {
        s.len() - 1
    } else if t - s[k - 1] <= s[k] - t {
        k - 1
    } else {
        k
    }
}

fn is_geodesic_step(space: &FiniteMetricSpace, u: usize, v: usize, w: f64, y: usize) -> bool {
    let rest = space.dist(v, y);
    rest < space.dist(u, y) && w + rest <= space.dist(u, y) + space.tol_metric()
}

fn with_arclen(space: &FiniteMetricSpace, points: Vec<usize>) -> DiscreteGeodesic {
    let x = points[0];
    let arclen = points.iter().map(|&p| space.dist(x, p)).collect();
    DiscreteGeodesic { points, arclen }
}

/// The canonical geodesic from `x` to `y`: among all shortest paths over
/// the space's tight edges, the one with the lexicographically smallest
/// vertex sequence.
pub fn geodesic(space: &FiniteMetricSpace, x: usize, y: usize) -> Result<DiscreteGeodesic> {
    space.check_index(x)?;
    space.check_index(y)?;
    let adj = space.adjacency();
    let mut points = vec![x];
    let mut u = x;
    while u != y {
        // Every feasible neighbor extends to a full shortest path, so the
        // greedy choice of the smallest one is lexicographically minimal.
        let next = adj[u].iter().find(|&&(v, w)| is_geodesic_step(space, u, v, w, y));
        match next {
            Some(&(v, _)) => {
                points.push(v);
                u = v;
            }
            None => {
                // Tight edges always realize distances; reaching this means the
                // adjacency and the matrix disagree beyond tolerance.
                return Err(Error::InvalidInput(format!("no geodesic step from {u} towards {y}")));
            }
        }
    }
    Ok(with_arclen(space, points))
}

/// All geodesics from `x` to `y` in lexicographic order, or
/// `Err(partial_list)` once more than `cap` have been found.
pub fn all_geodesics(
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    cap: usize,
) -> Result<std::result::Result<Vec<DiscreteGeodesic>, Vec<DiscreteGeodesic>>> {
    space.check_index(x)?;
    space.check_index(y)?;
    let adj = space.adjacency();
    let mut found = Vec::new();
    let mut stack: Vec<usize> = vec![x];
    let exceeded = dfs(space, adj, y, &mut stack, &mut found, cap);
    let list = found.into_iter().map(|p| with_arclen(space, p)).collect();
    Ok(if exceeded { Err(list) } else { Ok(list) })
}

fn dfs(
    space: &FiniteMetricSpace,
    adj: &crate::space::Adjacency,
    y: usize,
    stack: &mut Vec<usize>,
    found: &mut Vec<Vec<usize>>,
    cap: usize,
) -> bool {
    let u = *stack.last().unwrap();
    if u == y {
        if found.len() == cap {
            return true;
        }
        found.push(stack.clone());
        return false;
    }
    for &(v, w) in &adj[u] {
        if is_geodesic_step(space, u, v, w, y) {
            stack.push(v);
            let stop = dfs(space, adj, y, stack, found, cap);
            stack.pop();
            if stop {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{metric_from_graph, GraphSpec};

    fn graph(n: usize, edges: &[(usize, usize)]) -> FiniteMetricSpace {
        metric_from_graph(&GraphSpec::new(n, edges.iter().map(|&(u, v)| (u, v, 1.0)).collect()))
            .unwrap()
    }

    #[test]
    fn path_geodesic() {
        let p = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let g = geodesic(&p, 0, 4).unwrap();
        assert_eq!(g.points, vec![0, 1, 2, 3, 4]);
        assert_eq!(g.arclen, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(eval_geodesic(&g, 2.4).unwrap(), 2);
        assert_eq!(eval_geodesic(&g, 0.0).unwrap(), 0);
        assert_eq!(eval_geodesic(&g, 4.0).unwrap(), 4);
        assert_eq!(eval_geodesic(&g, 0.5).unwrap(), 0);
        assert!(matches!(eval_geodesic(&g, 4.5), Err(Error::ParameterOutOfRange { .. })));
        assert!(eval_geodesic(&g, -0.1).is_err());
    }

    #[test]
    fn cycle_tie_break_is_lexicographic() {
        let c = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(geodesic(&c, 0, 2).unwrap().points, vec![0, 1, 2]);
        let all = all_geodesics(&c, 0, 2, 10).unwrap().unwrap();
        let seqs: Vec<_> = all.iter().map(|g| g.points.clone()).collect();
        assert_eq!(seqs, vec![vec![0, 1, 2], vec![0, 3, 2]]);
        let capped = all_geodesics(&c, 0, 2, 1).unwrap();
        assert_eq!(capped.unwrap_err().len(), 1);
    }

    #[test]
    fn star_geodesic_passes_center() {
        let s = graph(3, &[(0, 1), (0, 2)]);
        assert_eq!(geodesic(&s, 1, 2).unwrap().points, vec![1, 0, 2]);
        assert_eq!(geodesic(&s, 1, 1).unwrap().points, vec![1]);
    }
}
