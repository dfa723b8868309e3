//! Ball-intersection ("lens") distortion.
//!
//! For two closed balls with nonempty intersection `K`, the best inner ball
//! `B(z, ν*) ⊆ K` and best enclosing ball `K ⊆ B(z', R*)` quantify how far
//! `K` is from being a ball: multiplicatively through `λ = R*/ν*` and
//! additively through `R* - ν*`. Radii are restricted to realized
//! distances, since closed balls on a finite space only change there.

use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geodesic::geodesic;
use crate::pointset::PointSet;
use crate::sampling::rng;
use crate::space::{ball_members, set_diameter, Ball, FiniteMetricSpace, DEFAULT_TAU_BALL};

/// Closed balls of one center at an ascending list of radii.
#[derive(Debug, Clone)]
struct CenterBalls {
    radii: Vec<f64>,
    sets: Vec<PointSet>,
}

impl CenterBalls {
    fn build(space: &FiniteMetricSpace, center: usize, radii: Vec<f64>, tau: f64) -> Self {
        let n = space.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| space.dist(center, a).total_cmp(&space.dist(center, b)).then(a.cmp(&b)));
        let mut sets = Vec::with_capacity(radii.len());
        let mut current = PointSet::empty(n);
        let mut next = 0;
        for &r in &radii {
            while next < n && space.dist(center, order[next]) <= r + tau {
                current.insert(order[next]);
                next += 1;
            }
            sets.push(current.clone());
        }
        Self { radii, sets }
    }

    /// Largest radius whose ball fits inside `k`.
    fn inner_radius(&self, k: &PointSet) -> Option<f64> {
        let fit = self.sets.partition_point(|s| s.is_subset(k));
        (fit > 0).then(|| self.radii[fit - 1])
    }

    /// Smallest radius whose ball contains `k`.
    fn outer_radius(&self, k: &PointSet) -> f64 {
        let idx = self.sets.partition_point(|s| !k.is_subset(s));
        self.radii[idx.min(self.radii.len() - 1)]
    }
}

/// Precomputed balls at every realized radius of every center.
#[derive(Debug, Clone)]
pub struct LensIndex<'a> {
    space: &'a FiniteMetricSpace,
    tau: f64,
    realized: Vec<CenterBalls>,
}

impl<'a> LensIndex<'a> {
    pub fn new(space: &'a FiniteMetricSpace) -> Self {
        Self::with_tau(space, DEFAULT_TAU_BALL)
    }

    pub fn with_tau(space: &'a FiniteMetricSpace, tau: f64) -> Self {
        let realized = (0..space.len())
            .into_par_iter()
            .map(|c| CenterBalls::build(space, c, space.realized_radii(c), tau))
            .collect();
        Self { space, tau, realized }
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        self.space
    }

    /// Best inner ball `(z, ν*)`: maximal realized radius, ties to the smallest `z`.
    pub fn best_inner(&self, k: &PointSet) -> Result<BallFit> {
        if k.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        let mut best: Option<BallFit> = None;
        for z in k.iter() {
            if let Some(nu) = self.realized[z].inner_radius(k) {
                if best.is_none_or(|b| nu > b.radius) {
                    best = Some(BallFit { center: z, radius: nu });
                }
            }
        }
        // Every member of K is a candidate with at least radius 0.
        Ok(best.expect("nonempty K contains its own singleton balls"))
    }

    /// Best enclosing ball `(z', R*)`: minimal covering radius, ties to the smallest `z'`.
    pub fn best_outer(&self, k: &PointSet) -> Result<BallFit> {
        if k.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        let mut best: Option<BallFit> = None;
        for (z, balls) in self.realized.iter().enumerate() {
            let r = balls.outer_radius(k);
            if best.is_none_or(|b| r < b.radius) {
                best = Some(BallFit { center: z, radius: r });
            }
        }
        Ok(best.expect("space is nonempty"))
    }

    fn fit(&self, k: &PointSet) -> Result<(BallFit, BallFit)> {
        Ok((self.best_inner(k)?, self.best_outer(k)?))
    }

    pub fn ball(&self, center: usize, radius: f64) -> PointSet {
        let b = Ball { center, radius, tau: self.tau };
        PointSet::from_indices(self.space.len(), (0..self.space.len()).filter(|&p| b.contains(self.space, p)))
    }

    /// Full report for one ball pair, optionally with the constructive witness.
    pub fn report(&self, b1: Ball, b2: Ball, with_witness: bool) -> Result<LensReport> {
        self.space.check_index(b1.center)?;
        self.space.check_index(b2.center)?;
        let k = self.ball(b1.center, b1.radius).intersection(&self.ball(b2.center, b2.radius));
        let (inner, outer) = self.fit(&k)?;
        let witness = if with_witness {
            Some(self.witness_for(b1.center, b1.radius, b2.center, b2.radius, &k)?)
        } else {
            None
        };
        let mut report = LensReport::new(b1, b2, k, inner, outer, witness);
        assert!(report.verify(self), "inner/outer inclusions failed for {:?} / {:?}", b1, b2);
        Ok(report)
    }

    fn witness_for(&self, x: usize, r: f64, y: usize, s: f64, k: &PointSet) -> Result<HypWitness> {
        if k.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        let space = self.space;
        let swapped = r < s;
        let (x, r, y, s) = if swapped { (y, s, x, r) } else { (x, r, y, s) };
        let d = space.dist(x, y);
        let (z, nu, target, degenerate) = if r - s > d {
            (y, s, d, true)
        } else {
            let target = (r - s + d) / 2.0;
            let geo = geodesic(space, x, y)?;
            (geo.eval(target.clamp(0.0, geo.length()))?, ((r + s - d) / 2.0).max(0.0), target, false)
        };
        let z_offset = (space.dist(x, z) - target).abs();
        let inner = self.ball(z, nu);
        let inner_ok = inner.is_subset(k);
        let inner_excess = inner
            .iter()
            .filter(|&p| !k.contains(p))
            .map(|p| (space.dist(x, p) - r).max(space.dist(y, p) - s))
            .fold(0.0, f64::max);
        let reach = k.iter().map(|p| space.dist(z, p)).fold(0.0, f64::max);
        Ok(HypWitness {
            z,
            nu,
            target,
            z_offset,
            degenerate,
            swapped,
            inner_ok,
            inner_excess,
            outer_delta_needed: (reach - nu).max(0.0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallFit {
    pub center: usize,
    pub radius: f64,
}

/// Serializes non-finite values as `null`.
fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LensReport {
    pub pair: (Ball, Ball),
    pub intersection: PointSet,
    pub inner: BallFit,
    pub outer: BallFit,
    /// `R*/ν*`; 1 for a singleton, unbounded (`null` in JSON) when `ν* = 0 < R*`.
    #[serde(serialize_with = "finite_or_null")]
    pub lambda_mult: f64,
    pub gap_add: f64,
    /// Whether `K` is itself a ball, i.e. `B(z, ν*) = K`.
    pub is_ball: bool,
    pub witness: Option<HypWitness>,
}

impl LensReport {
    fn new(
        b1: Ball,
        b2: Ball,
        k: PointSet,
        inner: BallFit,
        outer: BallFit,
        witness: Option<HypWitness>,
    ) -> Self {
        let lambda_mult = lambda_of(inner.radius, outer.radius);
        Self {
            pair: (b1, b2),
            intersection: k,
            inner,
            outer,
            lambda_mult,
            gap_add: outer.radius - inner.radius,
            is_ball: false,
            witness,
        }
    }

    /// Checks `B(z, ν*) ⊆ K ⊆ B(z', R*)` by enumeration and records whether `K` is a ball.
    fn verify(&mut self, index: &LensIndex<'_>) -> bool {
        let inner = index.ball(self.inner.center, self.inner.radius);
        let outer = index.ball(self.outer.center, self.outer.radius);
        self.is_ball = inner == self.intersection;
        inner.is_subset(&self.intersection) && self.intersection.is_subset(&outer)
    }
}

fn lambda_of(nu: f64, big_r: f64) -> f64 {
    if big_r == 0.0 {
        1.0
    } else if nu == 0.0 {
        f64::INFINITY
    } else {
        big_r / nu
    }
}

/// The constructive witness for a ball pair: `z` on the canonical geodesic
/// from the larger ball's center at arclength `(r - s + d)/2`, and
/// `ν = (r + s - d)/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypWitness {
    pub z: usize,
    pub nu: f64,
    /// Intended `d(x, z)`; the discrete `z` sits within `z_offset` of it.
    pub target: f64,
    pub z_offset: f64,
    /// `r - s > d`: `K` is the smaller ball itself and `z = y`, `ν = s`.
    pub degenerate: bool,
    /// The pair was reordered so that `r >= s`.
    pub swapped: bool,
    pub inner_ok: bool,
    /// How far points of `B(z, ν)` fall outside the two balls (0 when `inner_ok`).
    pub inner_excess: f64,
    /// Smallest `δ'` with `K ⊆ B(z, ν + δ')`.
    pub outer_delta_needed: f64,
}

pub fn intersect_balls(space: &FiniteMetricSpace, b1: &Ball, b2: &Ball) -> Result<PointSet> {
    Ok(ball_members(space, b1)?.intersection(&ball_members(space, b2)?))
}

pub fn best_inner_ball(space: &FiniteMetricSpace, k: &PointSet) -> Result<BallFit> {
    LensIndex::new(space).best_inner(k)
}

pub fn best_outer_ball(space: &FiniteMetricSpace, k: &PointSet) -> Result<BallFit> {
    LensIndex::new(space).best_outer(k)
}

pub fn hyp_distortion_witness(
    space: &FiniteMetricSpace,
    x: usize,
    r: f64,
    y: usize,
    s: f64,
) -> Result<HypWitness> {
    space.check_index(x)?;
    space.check_index(y)?;
    let index = LensIndex::new(space);
    let k = index.ball(x, r).intersection(&index.ball(y, s));
    index.witness_for(x, r, y, s, &k)
}

/// Radii used for the scanned balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusGrid {
    /// Every realized distance from each center.
    Auto,
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub radii: RadiusGrid,
    /// `None` scans every ball pair; `Some(n)` samples `n` pairs when there are more.
    pub pair_budget: Option<usize>,
    /// Only scan pairs with `max(r, s) < d(x, y)`.
    pub restrict_far: bool,
    pub seed: u64,
    /// Also build the constructive witness for every scanned pair.
    pub witnesses: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { radii: RadiusGrid::Auto, pair_budget: None, restrict_far: true, seed: 0, witnesses: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub nu: f64,
    pub big_r: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WitnessSummary {
    pub checked: u64,
    pub inner_failures: u64,
    pub max_inner_excess: f64,
    pub max_z_offset: f64,
    pub max_outer_delta_needed: f64,
    /// Pairs where the inner excess exceeded the placement offset of `z`
    /// (impossible by the triangle inequality; kept as a self-check).
    pub excess_beyond_offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionProfile {
    pub scale: f64,
    pub exhaustive: bool,
    pub seed: u64,
    pub restrict_far: bool,
    pub pairs_considered: u64,
    pub pairs_filtered: u64,
    pub pairs_empty: u64,
    pub pairs_scanned: u64,
    pub distinct_intersections: u64,
    pub exact_balls: u64,
    #[serde(serialize_with = "finite_or_null")]
    pub sup_lambda_mult: f64,
    pub sup_gap_add: f64,
    pub worst_lambda: Option<LensReport>,
    pub worst_gap: Option<LensReport>,
    pub histogram: Vec<HistogramBin>,
    pub witness_summary: Option<WitnessSummary>,
    pub quantization_allowance: f64,
}

/// Ball pair identified by center and position in that center's radius list.
type PairKey = (usize, usize, usize, usize);

#[derive(Default)]
struct Partial {
    considered: u64,
    filtered: u64,
    empty: u64,
    scanned: u64,
    exact_balls: u64,
    worst_lambda: Option<(f64, PairKey)>,
    worst_gap: Option<(f64, PairKey)>,
    histogram: BTreeMap<(u64, u64), u64>,
    distinct: HashMap<PointSet, ()>,
    witness: WitnessSummary,
}

fn keep_max(slot: &mut Option<(f64, PairKey)>, cand: (f64, PairKey)) {
    match slot {
        Some(cur) if !(cand.0 > cur.0 || (cand.0 == cur.0 && cand.1 < cur.1)) => {}
        _ => *slot = Some(cand),
    }
}

impl Partial {
    fn merge(mut self, o: Partial) -> Partial {
        self.considered += o.considered;
        self.filtered += o.filtered;
        self.empty += o.empty;
        self.scanned += o.scanned;
        self.exact_balls += o.exact_balls;
        if let Some(c) = o.worst_lambda {
            keep_max(&mut self.worst_lambda, c);
        }
        if let Some(c) = o.worst_gap {
            keep_max(&mut self.worst_gap, c);
        }
        for (k, v) in o.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
        self.distinct.extend(o.distinct);
        let (a, b) = (&mut self.witness, o.witness);
        a.checked += b.checked;
        a.inner_failures += b.inner_failures;
        a.max_inner_excess = a.max_inner_excess.max(b.max_inner_excess);
        a.max_z_offset = a.max_z_offset.max(b.max_z_offset);
        a.max_outer_delta_needed = a.max_outer_delta_needed.max(b.max_outer_delta_needed);
        a.excess_beyond_offset += b.excess_beyond_offset;
        self
    }
}

struct Scanner<'a> {
    index: LensIndex<'a>,
    grid: Vec<CenterBalls>,
    config: ScanConfig,
    fits: HashMap<PointSet, (BallFit, BallFit)>,
}

impl<'a> Scanner<'a> {
    fn new(space: &'a FiniteMetricSpace, config: &ScanConfig) -> Self {
        let index = LensIndex::new(space);
        let grid = match &config.radii {
            RadiusGrid::Auto => index.realized.clone(),
            RadiusGrid::List(list) => {
                let mut radii = list.clone();
                radii.sort_by(f64::total_cmp);
                radii.dedup();
                (0..space.len())
                    .into_par_iter()
                    .map(|c| CenterBalls::build(space, c, radii.clone(), index.tau))
                    .collect()
            }
        };
        Self { index, grid, config: config.clone(), fits: HashMap::new() }
    }

    fn radius(&self, center: usize, ri: usize) -> f64 {
        self.grid[center].radii[ri]
    }

    fn visit(&self, key: PairKey, part: &mut Partial, cache: &mut HashMap<PointSet, (BallFit, BallFit)>) {
        let (x, ri, y, si) = key;
        let space = self.index.space;
        part.considered += 1;
        let (r, s) = (self.radius(x, ri), self.radius(y, si));
        if self.config.restrict_far && r.max(s) >= space.dist(x, y) {
            part.filtered += 1;
            return;
        }
        let k = self.grid[x].sets[ri].intersection(&self.grid[y].sets[si]);
        if k.is_empty() {
            part.empty += 1;
            return;
        }
        part.scanned += 1;
        let (inner, outer) = match self.fits.get(&k).or_else(|| cache.get(&k)) {
            Some(f) => *f,
            None => {
                let f = self.index.fit(&k).expect("k is nonempty");
                cache.insert(k.clone(), f);
                f
            }
        };
        let lambda = lambda_of(inner.radius, outer.radius);
        let gap = outer.radius - inner.radius;
        if self.index.realized[inner.center].sets
            [self.index.realized[inner.center].radii.partition_point(|&q| q < inner.radius)]
            == k
        {
            part.exact_balls += 1;
        }
        keep_max(&mut part.worst_lambda, (lambda, key));
        keep_max(&mut part.worst_gap, (gap, key));
        *part.histogram.entry((inner.radius.to_bits(), outer.radius.to_bits())).or_default() += 1;
        if self.config.witnesses {
            let w = self.index.witness_for(x, r, y, s, &k).expect("k is nonempty");
            let ws = &mut part.witness;
            ws.checked += 1;
            if !w.inner_ok {
                ws.inner_failures += 1;
            }
            ws.max_inner_excess = ws.max_inner_excess.max(w.inner_excess);
            ws.max_z_offset = ws.max_z_offset.max(w.z_offset);
            ws.max_outer_delta_needed = ws.max_outer_delta_needed.max(w.outer_delta_needed);
            if w.inner_excess > w.z_offset + space.tol_metric() {
                ws.excess_beyond_offset += 1;
            }
        }
        part.distinct.entry(k).or_default();
    }

    fn report_for(&self, key: PairKey) -> LensReport {
        let (x, ri, y, si) = key;
        let b1 = Ball { center: x, radius: self.radius(x, ri), tau: self.index.tau };
        let b2 = Ball { center: y, radius: self.radius(y, si), tau: self.index.tau };
        self.index.report(b1, b2, self.config.witnesses).expect("recorded pairs are nonempty")
    }

    fn total_pairs(&self) -> u128 {
        let counts: Vec<u128> = self.grid.iter().map(|c| c.radii.len() as u128).collect();
        let mut total: u128 = 0;
        let mut suffix: u128 = counts.iter().sum();
        for &c in &counts {
            suffix -= c;
            total += c * (c + 1) / 2 + c * suffix;
        }
        total
    }

    fn run(&self) -> Partial {
        let n = self.index.space.len();
        let exhaustive = self.config.pair_budget.is_none_or(|b| self.total_pairs() <= b as u128);
        if exhaustive {
            (0..n)
                .into_par_iter()
                .map(|x| {
                    let mut part = Partial::default();
                    let mut cache = HashMap::new();
                    for ri in 0..self.grid[x].radii.len() {
                        for y in x..n {
                            let start = if y == x { ri } else { 0 };
                            for si in start..self.grid[y].radii.len() {
                                self.visit((x, ri, y, si), &mut part, &mut cache);
                            }
                        }
                    }
                    part
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(Partial::default(), Partial::merge)
        } else {
            let budget = self.config.pair_budget.unwrap_or(0);
            let mut rng = rng(self.config.seed);
            let keys: Vec<PairKey> = (0..budget)
                .map(|_| {
                    let x = rng.gen_range(0..n);
                    let y = rng.gen_range(0..n);
                    let ri = rng.gen_range(0..self.grid[x].radii.len());
                    let si = rng.gen_range(0..self.grid[y].radii.len());
                    if (y, si) < (x, ri) {
                        (y, si, x, ri)
                    } else {
                        (x, ri, y, si)
                    }
                })
                .collect();
            keys.par_chunks(1024)
                .map(|chunk| {
                    let mut part = Partial::default();
                    let mut cache = HashMap::new();
                    for &k in chunk {
                        self.visit(k, &mut part, &mut cache);
                    }
                    part
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(Partial::default(), Partial::merge)
        }
    }
}

/// Scans ball pairs and aggregates inner/outer distortion.
///
/// Pairs with an empty intersection are counted and skipped. Results are
/// independent of the worker count: reductions are order-free and worst
/// pairs are tie-broken by the smallest `(x, r, y, s)` key.
pub fn diamond_scan(space: &FiniteMetricSpace, config: &ScanConfig) -> DistortionProfile {
    let scanner = Scanner::new(space, config);
    let exhaustive = config.pair_budget.is_none_or(|b| scanner.total_pairs() <= b as u128);
    let part = scanner.run();
    let worst_lambda = part.worst_lambda.map(|(_, k)| scanner.report_for(k));
    let worst_gap = part.worst_gap.map(|(_, k)| scanner.report_for(k));
    DistortionProfile {
        scale: 1.0,
        exhaustive,
        seed: config.seed,
        restrict_far: config.restrict_far,
        pairs_considered: part.considered,
        pairs_filtered: part.filtered,
        pairs_empty: part.empty,
        pairs_scanned: part.scanned,
        distinct_intersections: part.distinct.len() as u64,
        exact_balls: part.exact_balls,
        sup_lambda_mult: part.worst_lambda.map_or(1.0, |w| w.0),
        sup_gap_add: part.worst_gap.map_or(0.0, |w| w.0),
        worst_lambda,
        worst_gap,
        histogram: part
            .histogram
            .into_iter()
            .map(|((nu, r), count)| HistogramBin { nu: f64::from_bits(nu), big_r: f64::from_bits(r), count })
            .collect(),
        witness_summary: config.witnesses.then_some(part.witness),
        quantization_allowance: space.quantum(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LensBoundCheck {
    pub x: usize,
    pub y: usize,
    pub t: f64,
    pub h: f64,
    pub lambda: f64,
    pub set: PointSet,
    pub diam: f64,
    pub bound: f64,
    pub allowance: f64,
    pub pass: bool,
}

/// Diameter of `A = B(x, t·d + h) ∩ B(y, (1-t)·d + h)` against `4λh`,
/// passing within one edge quantum. An empty `A` (possible only on
/// non-geodesic samples) counts as diameter 0.
pub fn lens_diameter_check(
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    t: f64,
    h: f64,
    lambda: f64,
) -> Result<LensBoundCheck> {
    space.check_index(x)?;
    space.check_index(y)?;
    let d = space.dist(x, y);
    if x == y || d == 0.0 {
        return Err(Error::ParameterOutOfRange { name: "y", value: y as f64, reason: "x and y must be distinct".into() });
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::ParameterOutOfRange { name: "t", value: t, reason: "must lie in (0, 1)".into() });
    }
    if !(h >= 0.0 && h < t.max(1.0 - t) * d) {
        return Err(Error::ParameterOutOfRange {
            name: "h",
            value: h,
            reason: format!("must lie in [0, {})", t.max(1.0 - t) * d),
        });
    }
    let set = intersect_balls(space, &Ball::new(x, t * d + h), &Ball::new(y, (1.0 - t) * d + h))?;
    let diam = if set.is_empty() { 0.0 } else { set_diameter(space, &set)? };
    let bound = 4.0 * lambda * h;
    let allowance = space.quantum();
    Ok(LensBoundCheck { x, y, t, h, lambda, set, diam, bound, allowance, pass: diam <= bound + allowance })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LensBoundSearch {
    pub checked: u64,
    pub failures: u64,
    /// The configuration with the largest `diam - bound - allowance`.
    pub worst: Option<LensBoundCheck>,
}

/// Runs [`lens_diameter_check`] over every pair `x < y` and every admissible
/// `(t, h)` from the given grids.
pub fn lens_bound_search(space: &FiniteMetricSpace, ts: &[f64], hs: &[f64], lambda: f64) -> LensBoundSearch {
    let n = space.len();
    type Tally = (u64, u64, Option<(f64, LensBoundCheck)>);
    let results: Vec<Tally> = (0..n)
        .into_par_iter()
        .map(|x| {
            let (mut checked, mut failures) = (0, 0);
            let mut worst: Option<(f64, LensBoundCheck)> = None;
            for y in x + 1..n {
                for &t in ts {
                    for &h in hs {
                        let Ok(c) = lens_diameter_check(space, x, y, t, h, lambda) else { continue };
                        checked += 1;
                        if !c.pass {
                            failures += 1;
                        }
                        let excess = c.diam - c.bound - c.allowance;
                        if worst.as_ref().is_none_or(|w| excess > w.0) {
                            worst = Some((excess, c));
                        }
                    }
                }
            }
            (checked, failures, worst)
        })
        .collect();
    let mut out = LensBoundSearch { checked: 0, failures: 0, worst: None };
    let mut best: Option<f64> = None;
    for (c, f, w) in results {
        out.checked += c;
        out.failures += f;
        if let Some((e, chk)) = w {
            if best.is_none_or(|b| e > b) {
                best = Some(e);
                out.worst = Some(chk);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AltHypothesisCheck {
    pub set: PointSet,
    pub diam: f64,
    pub bound: f64,
    pub allowance: f64,
    pub pass: bool,
}

/// `diam(B(x,r) ∩ B(x',r')) <= 2λ(r + r' - d(x,x'))` for pairs with `max(r, r') < d(x, x')`.
pub fn alt_hypothesis_check(
    space: &FiniteMetricSpace,
    x: usize,
    r: f64,
    x2: usize,
    r2: f64,
    lambda: f64,
) -> Result<AltHypothesisCheck> {
    space.check_index(x)?;
    space.check_index(x2)?;
    let d = space.dist(x, x2);
    if r.max(r2) >= d {
        return Err(Error::ParameterOutOfRange {
            name: "r",
            value: r.max(r2),
            reason: format!("radii must be below d(x, x') = {d}"),
        });
    }
    let set = intersect_balls(space, &Ball::new(x, r), &Ball::new(x2, r2))?;
    if set.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let diam = set_diameter(space, &set)?;
    let bound = 2.0 * lambda * (r + r2 - d);
    let allowance = space.quantum();
    Ok(AltHypothesisCheck { set, diam, bound, allowance, pass: diam <= bound + allowance })
}

/// Runs [`diamond_scan`] on `(X, d/σ)` for each scale. Explicit radius
/// lists are divided by `σ` too, so every scale scans the same ball pairs.
pub fn rescale_sweep(
    space: &FiniteMetricSpace,
    scales: &[f64],
    config: &ScanConfig,
) -> Result<Vec<DistortionProfile>> {
    if scales.is_empty() {
        return Err(Error::InvalidInput("no scales given".into()));
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("scales must be strictly ascending".into()));
    }
    scales
        .iter()
        .map(|&sigma| {
            let scaled = space.rescaled(sigma)?;
            let mut cfg = config.clone();
            if let RadiusGrid::List(list) = &config.radii {
                cfg.radii = RadiusGrid::List(list.iter().map(|r| r / sigma).collect());
            }
            let mut profile = diamond_scan(&scaled, &cfg);
            profile.scale = sigma;
            Ok(profile)
        })
        .collect()
}
