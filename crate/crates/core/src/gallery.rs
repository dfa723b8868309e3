//! Deterministic test spaces and the Euclidean lens demonstration.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::rng;
use crate::space::{metric_from_graph, validate_flat, FiniteMetricSpace, GraphSpec, Norm, DEFAULT_TOL_METRIC};

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn four() -> f64 {
    4.0
}

fn l2() -> Norm {
    Norm::L2
}

/// A generated space. Serialized with a `kind` tag, e.g.
/// `{"kind": "random_tree", "n": 50, "seed": 7}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Path {
        n: usize,
        #[serde(default = "one")]
        weight: f64,
    },
    Star {
        leaves: usize,
        #[serde(default = "one")]
        weight: f64,
    },
    Cycle {
        n: usize,
        #[serde(default = "one")]
        weight: f64,
    },
    Grid {
        rows: usize,
        cols: usize,
        #[serde(default = "one")]
        weight: f64,
    },
    /// Random recursive tree; weights are multiples of 1/64 in `[weight_min, weight_max]`.
    RandomTree {
        n: usize,
        seed: u64,
        #[serde(default = "one")]
        weight_min: f64,
        #[serde(default = "four")]
        weight_max: f64,
    },
    /// Lattice points of spacing `h` inside the closed unit disc of `norm`,
    /// with `h` chosen so that about `n` points land inside.
    NormedDiscSample {
        n: usize,
        #[serde(default = "l2")]
        norm: Norm,
    },
    SnowflakeLine {
        n: usize,
        #[serde(default = "one")]
        spacing: f64,
        #[serde(default = "half")]
        exponent: f64,
    },
    /// A random tree whose off-diagonal distances get i.i.d. noise in `[c/2, c]`.
    PerturbedTree {
        n: usize,
        seed: u64,
        c: f64,
        #[serde(default = "one")]
        weight_min: f64,
        #[serde(default = "four")]
        weight_max: f64,
    },
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be at least {min}, got {v}")))
    }
}

const DYADIC: f64 = 64.0;

fn random_tree_edges(n: usize, seed: u64, lo: f64, hi: f64) -> Result<Vec<(usize, usize, f64)>> {
    positive("weight_min", lo)?;
    if !(hi >= lo) || !hi.is_finite() {
        return Err(invalid(format!("weight range [{lo}, {hi}] is empty")));
    }
    let (a, b) = ((lo * DYADIC).ceil() as u64, (hi * DYADIC).floor() as u64);
    if a > b || a == 0 {
        return Err(invalid(format!("weight range [{lo}, {hi}] contains no multiple of 1/64")));
    }
    let mut rng = rng(seed);
    Ok((1..n)
        .map(|i| {
            let parent = rng.gen_range(0..i);
            (parent, i, rng.gen_range(a..=b) as f64 / DYADIC)
        })
        .collect())
}

/// Lattice points of spacing `h` in the closed unit disc of `norm`, row by row.
pub fn disc_lattice(h: f64, norm: Norm) -> Vec<[f64; 2]> {
    let k = (1.0 / h).floor() as i64 + 1;
    let mut pts = Vec::new();
    for j in -k..=k {
        for i in -k..=k {
            let p = [i as f64 * h, j as f64 * h];
            if norm.eval(p) <= 1.0 + 1e-12 {
                pts.push(p);
            }
        }
    }
    pts
}

fn disc_area(norm: Norm) -> f64 {
    match norm {
        Norm::L1 => 2.0,
        Norm::L2 => std::f64::consts::PI,
        Norm::Linf => 4.0,
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<FiniteMetricSpace> {
    match *spec {
        GeneratorSpec::Path { n, weight } => {
            at_least("n", n, 1)?;
            positive("weight", weight)?;
            metric_from_graph(&GraphSpec::new(n, (1..n).map(|i| (i - 1, i, weight)).collect()))
        }
        GeneratorSpec::Star { leaves, weight } => {
            at_least("leaves", leaves, 1)?;
            positive("weight", weight)?;
            metric_from_graph(&GraphSpec::new(leaves + 1, (1..=leaves).map(|i| (0, i, weight)).collect()))
        }
        GeneratorSpec::Cycle { n, weight } => {
            at_least("n", n, 3)?;
            positive("weight", weight)?;
            metric_from_graph(&GraphSpec::new(n, (0..n).map(|i| (i, (i + 1) % n, weight)).collect()))
        }
        GeneratorSpec::Grid { rows, cols, weight } => {
            at_least("rows", rows, 1)?;
            at_least("cols", cols, 1)?;
            positive("weight", weight)?;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        edges.push((v, v + 1, weight));
                    }
                    if r + 1 < rows {
                        edges.push((v, v + cols, weight));
                    }
                }
            }
            metric_from_graph(&GraphSpec::new(rows * cols, edges))
        }
        GeneratorSpec::RandomTree { n, seed, weight_min, weight_max } => {
            at_least("n", n, 1)?;
            metric_from_graph(&GraphSpec::new(n, random_tree_edges(n, seed, weight_min, weight_max)?))
        }
        GeneratorSpec::NormedDiscSample { n, norm } => {
            at_least("n", n, 1)?;
            let h = (disc_area(norm) / n as f64).sqrt().min(1.0);
            Ok(FiniteMetricSpace::from_normed_points(disc_lattice(h, norm), norm)?.with_quantum(h))
        }
        GeneratorSpec::SnowflakeLine { n, spacing, exponent } => {
            at_least("n", n, 1)?;
            positive("spacing", spacing)?;
            if !(exponent > 0.0 && exponent <= 1.0) {
                return Err(invalid(format!("exponent must lie in (0, 1], got {exponent}")));
            }
            let mut flat = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    flat[i * n + j] = ((i as f64 - j as f64).abs() * spacing).powf(exponent);
                }
            }
            Ok(validate_flat(n, flat, DEFAULT_TOL_METRIC)?.with_quantum(spacing.powf(exponent)))
        }
        GeneratorSpec::PerturbedTree { n, seed, c, weight_min, weight_max } => {
            at_least("n", n, 1)?;
            if !(c >= 0.0 && c.is_finite()) {
                return Err(invalid(format!("c must be non-negative, got {c}")));
            }
            let edges = random_tree_edges(n, seed, weight_min, weight_max)?;
            let max_w = edges.iter().map(|e| e.2).fold(0.0, f64::max);
            let tree = metric_from_graph(&GraphSpec::new(n, edges))?;
            // The noise stream is independent of the one that drew the tree.
            let mut rng = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
            let mut flat = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let d = tree.dist(i, j) + rng.gen_range(c / 2.0..=c);
                    flat[i * n + j] = d;
                    flat[j * n + i] = d;
                }
            }
            match validate_flat(n, flat, DEFAULT_TOL_METRIC) {
                Ok(s) => Ok(s.with_quantum(max_w + c)),
                Err(Error::InvalidMetric(v)) => Err(Error::PerturbationBrokeMetric(v)),
                Err(e) => Err(e),
            }
        }
    }
}

/// A closed walk of `2·steps` segments: a seeded random walk along the
/// space's geodesic edges from `start`, then the same walk backwards.
pub fn retraced_walk(space: &FiniteMetricSpace, start: usize, steps: usize, seed: u64) -> Result<Vec<usize>> {
    space.check_index(start)?;
    let adj = space.adjacency();
    let mut rng = rng(seed);
    let mut walk = vec![start];
    let mut cur = start;
    for _ in 0..steps {
        let nbrs = &adj[cur];
        if nbrs.is_empty() {
            break;
        }
        cur = nbrs[rng.gen_range(0..nbrs.len())].0;
        walk.push(cur);
    }
    let back: Vec<usize> = walk.iter().rev().skip(1).copied().collect();
    walk.extend(back);
    Ok(walk)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LensDiameter {
    pub r1: f64,
    pub h: f64,
    pub closed_form: f64,
    pub sampled: f64,
    pub samples: usize,
    pub seed: u64,
    pub rel_error: f64,
}

pub const DEFAULT_LENS_SAMPLES: usize = 100_000;

/// Closed form `2·√(2h+h²)·r₁` for the lens `B(0, r₁(1+h)) ∩ B(2r₁e₁, r₁(1+h))`
/// next to a dense rejection sample of the same lens.
pub fn euclidean_lens_diameter(r1: f64, h: f64, samples: usize, seed: u64) -> Result<LensDiameter> {
    positive("r1", r1).map_err(|_| Error::ParameterOutOfRange { name: "r1", value: r1, reason: "must be positive".into() })?;
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::ParameterOutOfRange { name: "h", value: h, reason: "must be non-negative".into() });
    }
    let closed_form = 2.0 * (2.0 * h + h * h).sqrt() * r1;
    let sampled = if h == 0.0 || samples == 0 { 0.0 } else { sampled_lens_diameter(r1, h, samples, seed) };
    let rel_error = if closed_form == 0.0 { sampled } else { (sampled - closed_form).abs() / closed_form };
    Ok(LensDiameter { r1, h, closed_form, sampled, samples, seed, rel_error })
}

fn sampled_lens_diameter(r1: f64, h: f64, samples: usize, seed: u64) -> f64 {
    let rho = r1 * (1.0 + h);
    let c2 = 2.0 * r1;
    let mut rng = rng(seed);
    let mut pts = Vec::with_capacity(samples);
    while pts.len() < samples {
        let p = [rng.gen_range(r1 * (1.0 - h)..=rho), rng.gen_range(-rho..=rho)];
        if p[0].hypot(p[1]) <= rho && (p[0] - c2).hypot(p[1]) <= rho {
            pts.push(p);
        }
    }
    let hull = convex_hull(pts);
    let mut best: f64 = 0.0;
    for (i, a) in hull.iter().enumerate() {
        for b in &hull[i + 1..] {
            best = best.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    best
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupPoint {
    pub h: f64,
    pub diam: f64,
    pub ratio: f64,
}

/// `(h, diam, diam/h)` with `diam/h = 2r₁√(2/h + 1)`, for strictly descending positive `h`.
pub fn lens_blowup_curve(r1: f64, hs: &[f64]) -> Result<Vec<BlowupPoint>> {
    if !(r1 > 0.0 && r1.is_finite()) {
        return Err(Error::ParameterOutOfRange { name: "r1", value: r1, reason: "must be positive".into() });
    }
    if hs.is_empty() {
        return Err(Error::InvalidInput("h list is empty".into()));
    }
    if let Some(&h) = hs.iter().find(|&&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::ParameterOutOfRange { name: "h", value: h, reason: "must be positive".into() });
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("h list must be strictly descending".into()));
    }
    Ok(hs
        .iter()
        .map(|&h| BlowupPoint { h, diam: 2.0 * (2.0 * h + h * h).sqrt() * r1, ratio: 2.0 * r1 * (2.0 / h + 1.0).sqrt() })
        .collect())
}
