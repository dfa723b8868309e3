//! Thin triangles, tripod lengths, four-point hyperbolicity and tree certification.
//!
//! Thinness follows the matched-parameter definition: for a triangle with
//! vertices `x_1, x_2, x_3` and tripod lengths `a_k`, the points at
//! arclength `t` on the two edges leaving `x_i` are compared for every
//! `t` in `[0, a_i]`. On discrete spaces `t` ranges over the vertex times of
//! the two compared edges, so every measurement carries a quantization
//! allowance of twice the space's edge quantum.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{all_geodesics, geodesic, DiscreteGeodesic};
use crate::sampling::{choose, sorted_tuples};
use crate::space::FiniteMetricSpace;

/// Which geodesics a triangle is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GeodesicMode {
    /// The lexicographically smallest shortest path for every edge.
    Canonical,
    /// Every geodesic choice, up to `cap` geodesics per vertex pair.
    Exhaustive { cap: usize },
}

impl fmt::Display for GeodesicMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeodesicMode::Canonical => f.write_str("canonical"),
            GeodesicMode::Exhaustive { cap } => write!(f, "exhaustive:{cap}"),
        }
    }
}

impl FromStr for GeodesicMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "canonical" {
            return Ok(GeodesicMode::Canonical);
        }
        if let Some(cap) = s.strip_prefix("exhaustive:") {
            let cap = cap
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad geodesic cap in {s:?}")))?;
            return Ok(GeodesicMode::Exhaustive { cap });
        }
        if s == "exhaustive" {
            return Ok(GeodesicMode::Exhaustive { cap: 64 });
        }
        Err(Error::InvalidInput(format!("unknown geodesic mode {s:?}")))
    }
}

/// Where a triangle's thinness is attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThinnessWitness {
    /// Vertex positions `(σ(1), σ(2), σ(3))`, each in `0..3`.
    pub sigma: [usize; 3],
    pub t: f64,
    pub points: (usize, usize),
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleAnalysis {
    pub vertices: [usize; 3],
    /// Edges `c_12`, `c_23`, `c_13`, each oriented from the lower vertex position.
    pub edges: [DiscreteGeodesic; 3],
    pub tripod: [f64; 3],
    pub thinness: f64,
    pub worst_witness: Option<ThinnessWitness>,
    pub quantization_allowance: f64,
}

/// Tripod lengths: the unique `a_k >= 0` with `d(x_k, x_l) = a_k + a_l`.
pub fn tripod_lengths(space: &FiniteMetricSpace, x1: usize, x2: usize, x3: usize) -> Result<[f64; 3]> {
    for x in [x1, x2, x3] {
        space.check_index(x)?;
    }
    let (d12, d13, d23) = (space.dist(x1, x2), space.dist(x1, x3), space.dist(x2, x3));
    let raw = [(d12 + d13 - d23) / 2.0, (d12 + d23 - d13) / 2.0, (d13 + d23 - d12) / 2.0];
    let mut a = [0.0; 3];
    for (k, &v) in raw.iter().enumerate() {
        if v < -space.tol_metric() {
            return Err(Error::NegativeTripod { index: k + 1, value: v });
        }
        a[k] = v.max(0.0);
    }
    Ok(a)
}

fn edge_slot(k: usize, l: usize) -> usize {
    match (k.min(l), k.max(l)) {
        (0, 1) => 0,
        (1, 2) => 1,
        (0, 2) => 2,
        _ => unreachable!("edge between distinct positions"),
    }
}

/// Point at arclength `t` on the edge from position `k` to position `l`,
/// using the reversal `c_lk(t) = c_kl(a_k + a_l - t)`.
fn point_on(edges: &[&DiscreteGeodesic; 3], k: usize, l: usize, t: f64) -> usize {
    let g = edges[edge_slot(k, l)];
    let s = if k < l { t } else { g.length() - t };
    g.points[crate::geodesic::nearest_index(&g.arclen, s)]
}

/// Vertex times of the edge `k -> l`, measured from position `k`.
fn times_from<'a>(edges: &[&'a DiscreteGeodesic; 3], k: usize, l: usize) -> impl Iterator<Item = f64> + 'a {
    let g = edges[edge_slot(k, l)];
    let len = g.length();
    g.arclen.iter().map(move |&s| if k < l { s } else { len - s })
}

const PERMUTATIONS: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn thinness_of(
    space: &FiniteMetricSpace,
    tripod: &[f64; 3],
    edges: &[&DiscreteGeodesic; 3],
) -> (f64, Option<ThinnessWitness>) {
    let mut best: (f64, Option<ThinnessWitness>) = (0.0, None);
    for sigma in PERMUTATIONS {
        let [i, j, k] = sigma;
        let limit = tripod[i] + space.tol_metric();
        let mut times: Vec<f64> =
            times_from(edges, i, j).chain(times_from(edges, i, k)).filter(|&t| t <= limit).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        for t in times {
            let (p, q) = (point_on(edges, i, j, t), point_on(edges, i, k, t));
            let d = space.dist(p, q);
            if best.1.is_none() || d > best.0 {
                best = (d, Some(ThinnessWitness { sigma, t, points: (p, q), distance: d }));
            }
        }
    }
    best
}

/// Lazily computed canonical geodesics for every ordered pair.
struct GeodesicCache<'a> {
    space: &'a FiniteMetricSpace,
    slots: Vec<OnceLock<DiscreteGeodesic>>,
}

impl<'a> GeodesicCache<'a> {
    fn new(space: &'a FiniteMetricSpace) -> Self {
        Self { space, slots: (0..space.len() * space.len()).map(|_| OnceLock::new()).collect() }
    }

    fn get(&self, x: usize, y: usize) -> &DiscreteGeodesic {
        self.slots[x * self.space.len() + y].get_or_init(|| {
            geodesic(self.space, x, y).expect("indices validated by caller")
        })
    }
}

fn analyze_canonical(
    space: &FiniteMetricSpace,
    v: [usize; 3],
    c12: &DiscreteGeodesic,
    c23: &DiscreteGeodesic,
    c13: &DiscreteGeodesic,
) -> Result<TriangleAnalysis> {
    let tripod = tripod_lengths(space, v[0], v[1], v[2])?;
    let edges = [c12, c23, c13];
    let (thinness, worst_witness) = thinness_of(space, &tripod, &edges);
    Ok(TriangleAnalysis {
        vertices: v,
        edges: [c12.clone(), c23.clone(), c13.clone()],
        tripod,
        thinness,
        worst_witness,
        quantization_allowance: 2.0 * space.quantum(),
    })
}

/// Thinness of the geodesic triangle on `x1, x2, x3`.
///
/// In exhaustive mode the maximum is taken over every combination of edge
/// geodesics; if a vertex pair has more than `cap` geodesics the error
/// carries the result over the enumerated ones.
pub fn triangle_thinness(
    space: &FiniteMetricSpace,
    x1: usize,
    x2: usize,
    x3: usize,
    mode: GeodesicMode,
) -> Result<TriangleAnalysis> {
    let v = [x1, x2, x3];
    match mode {
        GeodesicMode::Canonical => {
            let c12 = geodesic(space, x1, x2)?;
            let c23 = geodesic(space, x2, x3)?;
            let c13 = geodesic(space, x1, x3)?;
            analyze_canonical(space, v, &c12, &c23, &c13)
        }
        GeodesicMode::Exhaustive { cap } => {
            let mut capped = false;
            let mut lists = Vec::with_capacity(3);
            for (a, b) in [(x1, x2), (x2, x3), (x1, x3)] {
                match all_geodesics(space, a, b, cap)? {
                    Ok(l) => lists.push(l),
                    Err(l) => {
                        capped = true;
                        lists.push(l);
                    }
                }
            }
            let mut best: Option<TriangleAnalysis> = None;
            for c12 in &lists[0] {
                for c23 in &lists[1] {
                    for c13 in &lists[2] {
                        let t = analyze_canonical(space, v, c12, c23, c13)?;
                        if best.as_ref().is_none_or(|b| t.thinness > b.thinness) {
                            best = Some(t);
                        }
                    }
                }
            }
            let best = best.expect("every pair has at least one geodesic");
            if capped {
                Err(Error::GeodesicEnumerationCapExceeded { cap, partial: Box::new(best) })
            } else {
                Ok(best)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThinnessReport {
    pub delta: f64,
    pub worst: Option<TriangleAnalysis>,
    /// True when every triangle was examined; otherwise `delta` is a lower bound.
    pub exact: bool,
    pub triangles_examined: usize,
    pub budget: usize,
    pub seed: u64,
    pub geodesics: String,
    /// Triangles whose exhaustive geodesic enumeration hit the cap.
    pub cap_hits: usize,
    pub quantization_allowance: f64,
}

/// Keeps the larger value; ties go to the lexicographically smaller key.
fn better<K: Ord>(a: (f64, K), b: (f64, K)) -> (f64, K) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Thinness of the whole space: exact over all triangles when
/// `C(n,3) <= budget`, otherwise the maximum over `budget` uniformly drawn
/// triangles (a lower bound on δ).
pub fn space_thinness(
    space: &FiniteMetricSpace,
    budget: usize,
    seed: u64,
    mode: GeodesicMode,
) -> Result<ThinnessReport> {
    if budget == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "budget",
            value: 0.0,
            reason: "must be at least 1".into(),
        });
    }
    let n = space.len();
    let total = choose(n, 3);
    let exact = total <= budget as u128;
    let triples: Vec<[usize; 3]> = if n < 3 {
        Vec::new()
    } else if exact {
        (0..n)
            .flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| [i, j, k])))
            .collect()
    } else {
        sorted_tuples::<3>(n, budget, seed)
    };

    let cache = GeodesicCache::new(space);
    let evaluate = |t: [usize; 3]| -> Result<(TriangleAnalysis, bool)> {
        match mode {
            GeodesicMode::Canonical => {
                let a = analyze_canonical(
                    space,
                    t,
                    cache.get(t[0], t[1]),
                    cache.get(t[1], t[2]),
                    cache.get(t[0], t[2]),
                )?;
                Ok((a, false))
            }
            GeodesicMode::Exhaustive { .. } => match triangle_thinness(space, t[0], t[1], t[2], mode) {
                Ok(a) => Ok((a, false)),
                Err(Error::GeodesicEnumerationCapExceeded { partial, .. }) => Ok((*partial, true)),
                Err(e) => Err(e),
            },
        }
    };

    let scored: Vec<(f64, [usize; 3], bool)> = triples
        .par_iter()
        .map(|&t| evaluate(t).map(|(a, hit)| (a.thinness, t, hit)))
        .collect::<Result<_>>()?;
    let cap_hits = scored.iter().filter(|s| s.2).count();
    let worst_key = scored.iter().map(|&(d, t, _)| (d, t)).reduce(better);
    let worst = match worst_key {
        Some((_, t)) => Some(evaluate(t)?.0),
        None => None,
    };
    Ok(ThinnessReport {
        delta: worst.as_ref().map_or(0.0, |w| w.thinness),
        worst,
        exact,
        triangles_examined: triples.len(),
        budget,
        seed,
        geodesics: mode.to_string(),
        cap_hits,
        quantization_allowance: 2.0 * space.quantum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quadruple {
    pub indices: [usize; 4],
    /// Opposite-pair sums, sorted descending.
    pub sums: [f64; 3],
    pub defect: f64,
}

/// Four-point defect `(S1 - S2) / 2` of one quadruple.
pub fn quadruple_defect(space: &FiniteMetricSpace, q: [usize; 4]) -> Quadruple {
    let d = |a: usize, b: usize| space.dist(q[a], q[b]);
    let mut sums = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
    sums.sort_by(|a, b| b.total_cmp(a));
    Quadruple { indices: q, sums, defect: (sums[0] - sums[1]) / 2.0 }
}

#[derive(Debug, Clone, Serialize)]
pub struct FourPointReport {
    pub delta: f64,
    pub worst: Option<Quadruple>,
    pub exact: bool,
    pub quadruples_examined: u128,
    pub budget: usize,
    pub seed: u64,
}

/// Four-point hyperbolicity: the maximum quadruple defect, exact when
/// `C(n,4) <= budget`, otherwise over `budget` uniformly drawn quadruples.
pub fn four_point_delta(space: &FiniteMetricSpace, budget: usize, seed: u64) -> FourPointReport {
    let n = space.len();
    let total = choose(n, 4);
    let exact = total <= budget as u128;
    let best = if n < 4 {
        None
    } else if exact {
        (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (i + 1..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let mut best: Option<(f64, [usize; 4])> = None;
                for k in j + 1..n {
                    for l in k + 1..n {
                        let q = [i, j, k, l];
                        let d = quadruple_defect(space, q).defect;
                        best = Some(best.map_or((d, q), |b| better(b, (d, q))));
                    }
                }
                best
            })
            .reduce_with(better)
    } else {
        sorted_tuples::<4>(n, budget, seed)
            .into_par_iter()
            .map(|q| (quadruple_defect(space, q).defect, q))
            .reduce_with(better)
    };
    let worst = best.map(|(_, q)| quadruple_defect(space, q));
    FourPointReport {
        delta: worst.as_ref().map_or(0.0, |w| w.defect),
        worst,
        exact,
        quadruples_examined: if exact { total } else { budget as u128 },
        budget,
        seed,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeCertificate {
    pub is_tree: bool,
    pub delta4: f64,
    pub tol: f64,
    /// The worst quadruple, whether or not the space is a tree.
    pub certificate: Option<Quadruple>,
}

/// Exact four-point test: the space is a metric tree iff every quadruple
/// defect is at most `tol`.
pub fn certify_tree(space: &FiniteMetricSpace, tol: f64) -> TreeCertificate {
    let r = four_point_delta(space, usize::MAX, 0);
    TreeCertificate { is_tree: r.delta <= tol, delta4: r.delta, tol, certificate: r.worst }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{metric_from_graph, validate_metric, GraphSpec};

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> FiniteMetricSpace {
        metric_from_graph(&GraphSpec::new(n, edges.to_vec())).unwrap()
    }

    fn cycle(n: usize) -> FiniteMetricSpace {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        graph(n, &e)
    }

    #[test]
    fn tripods() {
        let eq = validate_metric(
            &[vec![0.0, 2.0, 2.0], vec![2.0, 0.0, 2.0], vec![2.0, 2.0, 0.0]],
            1e-9,
        )
        .unwrap();
        assert_eq!(tripod_lengths(&eq, 0, 1, 2).unwrap(), [1.0, 1.0, 1.0]);
        let p = graph(2, &[(0, 1, 3.0)]);
        assert_eq!(tripod_lengths(&p, 0, 1, 1).unwrap(), [3.0, 0.0, 0.0]);
        // star: c=0, u=1 (1), v=2 (2), w=3 (3)
        let s = graph(4, &[(0, 1, 1.0), (0, 2, 2.0), (0, 3, 3.0)]);
        assert_eq!(tripod_lengths(&s, 1, 2, 3).unwrap(), [1.0, 2.0, 3.0]);
        assert!(tripod_lengths(&s, 1, 2, 9).is_err());
    }

    /// Independent oracle: evaluates thinness straight from the definition,
    /// stepping `t` over a fine uniform grid instead of vertex times.
    fn brute_thinness(space: &FiniteMetricSpace, v: [usize; 3]) -> f64 {
        let g = |a: usize, b: usize| geodesic(space, v[a.min(b)], v[a.max(b)]).unwrap();
        let a = tripod_lengths(space, v[0], v[1], v[2]).unwrap();
        let at = |k: usize, l: usize, t: f64| {
            let c = g(k, l);
            let s = if k < l { t } else { c.length() - t };
            c.eval(s).unwrap()
        };
        let mut worst = 0.0f64;
        for [i, j, k] in PERMUTATIONS {
            let steps = 64;
            for q in 0..=steps {
                let t = a[i] * q as f64 / steps as f64;
                // only sample t that coincide with vertex times of integer-weight graphs
                if (t - t.round()).abs() > 1e-12 {
                    continue;
                }
                worst = worst.max(space.dist(at(i, j, t), at(i, k, t)));
            }
        }
        worst
    }

    #[test]
    fn six_cycle_triangle() {
        let c6 = cycle(6);
        let t = triangle_thinness(&c6, 0, 2, 4, GeodesicMode::Canonical).unwrap();
        assert_eq!(t.tripod, [1.0, 1.0, 1.0]);
        assert_eq!(t.thinness, 2.0);
        assert_eq!(brute_thinness(&c6, [0, 2, 4]), 2.0);
        let w = t.worst_witness.unwrap();
        assert_eq!((w.t, w.points), (1.0, (1, 5)));
    }

    #[test]
    fn degenerate_and_tree_triangles() {
        let c6 = cycle(6);
        assert_eq!(triangle_thinness(&c6, 1, 1, 4, GeodesicMode::Canonical).unwrap().thinness, 0.0);
        let s = graph(5, &[(0, 1, 1.0), (0, 2, 2.0), (2, 3, 1.0), (2, 4, 1.5)]);
        for t in [[1, 3, 4], [0, 3, 4], [1, 2, 3]] {
            assert_eq!(triangle_thinness(&s, t[0], t[1], t[2], GeodesicMode::Canonical).unwrap().thinness, 0.0);
        }
    }

    #[test]
    fn six_cycle_space_thinness_matches_brute_force() {
        let c6 = cycle(6);
        let r = space_thinness(&c6, 1000, 0, GeodesicMode::Canonical).unwrap();
        assert!(r.exact);
        assert_eq!(r.triangles_examined, 20);
        let oracle = (0..6)
            .flat_map(|i| (i + 1..6).flat_map(move |j| (j + 1..6).map(move |k| [i, j, k])))
            .map(|v| brute_thinness(&c6, v))
            .fold(0.0, f64::max);
        assert_eq!(oracle, 2.0);
        assert_eq!(r.delta, oracle);
    }

    #[test]
    fn exhaustive_mode_considers_every_geodesic() {
        let c4 = cycle(4);
        let canon = triangle_thinness(&c4, 0, 0, 2, GeodesicMode::Canonical).unwrap();
        assert_eq!(canon.thinness, 0.0);
        // x1 = x2 but the two edges to x3 may take opposite sides of the square.
        let ex = triangle_thinness(&c4, 0, 0, 2, GeodesicMode::Exhaustive { cap: 8 }).unwrap();
        assert_eq!(ex.thinness, 2.0);
        match triangle_thinness(&c4, 0, 0, 2, GeodesicMode::Exhaustive { cap: 1 }) {
            Err(Error::GeodesicEnumerationCapExceeded { cap: 1, partial }) => {
                assert_eq!(partial.thinness, 0.0)
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn sampled_thinness_is_deterministic() {
        let c = cycle(12);
        let a = space_thinness(&c, 1, 42, GeodesicMode::Canonical).unwrap();
        let b = space_thinness(&c, 1, 42, GeodesicMode::Canonical).unwrap();
        assert!(!a.exact);
        assert_eq!(a.worst, b.worst);
        assert!(a.delta <= space_thinness(&c, 10_000, 0, GeodesicMode::Canonical).unwrap().delta);
    }

    #[test]
    fn four_cycle_four_point() {
        let c4 = cycle(4);
        let r = four_point_delta(&c4, usize::MAX, 0);
        assert_eq!(r.delta, 1.0);
        let w = r.worst.unwrap();
        assert_eq!(w.indices, [0, 1, 2, 3]);
        assert_eq!(w.sums, [4.0, 2.0, 2.0]);
        let cert = certify_tree(&c4, 1e-9);
        assert!(!cert.is_tree);
        assert_eq!(cert.certificate.unwrap().defect, 1.0);
    }

    #[test]
    fn trees_certify() {
        let star = graph(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]);
        assert!(certify_tree(&star, 1e-9).is_tree);
        let edge = graph(2, &[(0, 1, 1.0)]);
        assert!(certify_tree(&edge, 1e-9).is_tree);
        let single = validate_metric(&[vec![0.0]], 1e-9).unwrap();
        assert_eq!(four_point_delta(&single, 10, 0).delta, 0.0);
    }

    #[test]
    fn geodesic_mode_parsing() {
        assert_eq!("canonical".parse::<GeodesicMode>().unwrap(), GeodesicMode::Canonical);
        assert_eq!(
            "exhaustive:5".parse::<GeodesicMode>().unwrap(),
            GeodesicMode::Exhaustive { cap: 5 }
        );
        assert!("sideways".parse::<GeodesicMode>().is_err());
    }
}
