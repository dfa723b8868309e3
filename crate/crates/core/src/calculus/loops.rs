//! Sampled loops, Lipschitz scalar fields, and the trapezoid line integral.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::space::FiniteMetricSpace;

/// Exactly rounded sum (Shewchuk's partials, as in Python's `math.fsum`).
pub fn fsum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut hi) = partials.pop() else { return 0.0 };
    let mut lo = 0.0;
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // Round-half-even correction across the remaining partials.
    if let Some(&next) = partials.last() {
        if (lo < 0.0 && next < 0.0) || (lo > 0.0 && next > 0.0) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

/// Real values on the points of a space with a declared Lipschitz constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub lip: f64,
}

impl ScalarField {
    /// Checks `|f(p) - f(q)| <= lip·d(p, q)` on every pair.
    pub fn new(space: &FiniteMetricSpace, values: Vec<f64>, lip: f64) -> Result<Self> {
        let f = Self { values, lip };
        f.validate(space)?;
        Ok(f)
    }

    pub fn validate(&self, space: &FiniteMetricSpace) -> Result<()> {
        let n = space.len();
        if self.values.len() != n {
            return Err(Error::InvalidInput(format!("field has {} values for {n} points", self.values.len())));
        }
        if let Some(p) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("field value at {p} is not finite")));
        }
        if !(self.lip >= 0.0 && self.lip.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid Lipschitz constant {}", self.lip)));
        }
        let slack = space.tol_metric().max(1e-12);
        for p in 0..n {
            for q in p + 1..n {
                let diff = (self.values[p] - self.values[q]).abs();
                let d = space.dist(p, q);
                if diff > self.lip * d + slack * (1.0 + self.lip) {
                    return Err(Error::LipschitzViolation { p, q, ratio: diff / d, lip: self.lip });
                }
            }
        }
        Ok(())
    }

    pub fn constant(space: &FiniteMetricSpace, c: f64) -> Self {
        Self { values: vec![c; space.len()], lip: 0.0 }
    }
}

/// `f(p) = max{0, 1 - dist(p, S)/ε}`, which is `1/ε`-Lipschitz.
pub fn bump_field(space: &FiniteMetricSpace, set: &PointSet, eps: f64) -> Result<ScalarField> {
    if set.is_empty() {
        return Err(Error::InvalidInput("bump support set is empty".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::ParameterOutOfRange { name: "eps", value: eps, reason: "must be positive".into() });
    }
    let values = (0..space.len())
        .map(|p| {
            let d = set.iter().map(|q| space.dist(p, q)).fold(f64::INFINITY, f64::min);
            (1.0 - d / eps).max(0.0)
        })
        .collect();
    Ok(ScalarField { values, lip: 1.0 / eps })
}

/// `π(p) = dist(p, x₀)`, which is 1-Lipschitz.
pub fn distance_field(space: &FiniteMetricSpace, x0: usize) -> Result<ScalarField> {
    space.check_index(x0)?;
    Ok(ScalarField { values: (0..space.len()).map(|p| space.dist(p, x0)).collect(), lip: 1.0 })
}

/// A closed loop sampled at times `0 = t₀ < … < t_N = 1` (in turns), with
/// `points[N] = points[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledLoop {
    pub times: Vec<f64>,
    pub points: Vec<usize>,
}

impl SampledLoop {
    pub fn new(times: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        let l = Self { times, points };
        l.check()?;
        Ok(l)
    }

    /// Equally spaced times for the given closed point sequence.
    pub fn uniform(points: Vec<usize>) -> Result<Self> {
        let n = points.len().saturating_sub(1).max(1);
        Self::new((0..points.len()).map(|i| i as f64 / n as f64).collect(), points)
    }

    pub fn check(&self) -> Result<()> {
        if self.points.len() < 2 || self.times.len() != self.points.len() {
            return Err(Error::InvalidInput(format!(
                "loop needs matching times and points with at least two samples, got {} and {}",
                self.times.len(),
                self.points.len()
            )));
        }
        let (first, last) = (self.points[0], *self.points.last().unwrap());
        if first != last {
            return Err(Error::LoopNotClosed { first, last });
        }
        let (t0, tn) = (self.times[0], *self.times.last().unwrap());
        if t0 != 0.0 || tn != 1.0 || self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("loop times must increase strictly from 0 to 1".into()));
        }
        Ok(())
    }

    pub fn check_points(&self, space: &FiniteMetricSpace) -> Result<()> {
        self.points.iter().try_for_each(|&p| space.check_index(p))
    }

    /// Number of segments `N`.
    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn reversed(&self) -> Self {
        Self {
            times: self.times.iter().rev().map(|t| 1.0 - t).collect(),
            points: self.points.iter().rev().copied().collect(),
        }
    }

    /// Lipschitz constant against the chord metric of the unit circle,
    /// `|γ(s) - γ(t)| = 2 sin(π|s - t|)`.
    pub fn lip(&self, space: &FiniteMetricSpace) -> f64 {
        let n = self.segments();
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let d = space.dist(self.points[i], self.points[j]);
                if d > 0.0 {
                    let chord = 2.0 * (std::f64::consts::PI * (self.times[j] - self.times[i])).sin();
                    best = best.max(d / chord);
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopIntegral {
    pub value: f64,
    pub segments: Vec<f64>,
}

fn trapezoid(f: &[f64], pi: &[f64]) -> LoopIntegral {
    let segments: Vec<f64> = f
        .windows(2)
        .zip(pi.windows(2))
        .map(|(a, b)| 0.5 * (a[0] + a[1]) * (b[1] - b[0]))
        .collect();
    LoopIntegral { value: fsum(segments.iter().copied()), segments }
}

/// `Σ ½(f(p_i) + f(p_{i+1}))·(π(p_{i+1}) - π(p_i))` over the loop,
/// summed exactly so that retraced segments cancel to 0.
pub fn loop_integral(
    space: &FiniteMetricSpace,
    lp: &SampledLoop,
    f: &ScalarField,
    pi: &ScalarField,
) -> Result<LoopIntegral> {
    lp.check()?;
    lp.check_points(space)?;
    for field in [f, pi] {
        if field.values.len() != space.len() {
            return Err(Error::InvalidInput("field size does not match the space".into()));
        }
    }
    let fv: Vec<f64> = lp.points.iter().map(|&p| f.values[p]).collect();
    let pv: Vec<f64> = lp.points.iter().map(|&p| pi.values[p]).collect();
    Ok(trapezoid(&fv, &pv))
}

/// The same rule over a closed sequence of raw values.
pub(crate) fn closed_trapezoid(f: &[f64], pi: &[f64]) -> f64 {
    trapezoid(f, pi).value
}
