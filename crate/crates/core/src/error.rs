use std::fmt;

use serde::Serialize;

use crate::hyperbolicity::TriangleAnalysis;

/// A single violated metric axiom, reported with its worst offender.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum MetricViolation {
    NonFinite { i: usize, j: usize },
    NegativeEntry { i: usize, j: usize, value: f64 },
    NonzeroDiagonal { i: usize, value: f64 },
    AsymmetricInput { i: usize, j: usize, difference: f64 },
    /// `d(i, k) > d(i, j) + d(j, k) + tol`, i.e. the detour through `j` is shorter.
    TriangleViolation { i: usize, j: usize, k: usize, slack: f64 },
}

impl MetricViolation {
    pub fn kind(&self) -> &'static str {
        match self {
            MetricViolation::NonFinite { .. } => "NonFinite",
            MetricViolation::NegativeEntry { .. } => "NegativeEntry",
            MetricViolation::NonzeroDiagonal { .. } => "NonzeroDiagonal",
            MetricViolation::AsymmetricInput { .. } => "AsymmetricInput",
            MetricViolation::TriangleViolation { .. } => "TriangleViolation",
        }
    }
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MetricViolation::NonFinite { i, j } => write!(f, "non-finite entry at ({i},{j})"),
            MetricViolation::NegativeEntry { i, j, value } => {
                write!(f, "negative entry {value} at ({i},{j})")
            }
            MetricViolation::NonzeroDiagonal { i, value } => {
                write!(f, "nonzero diagonal {value} at ({i},{i})")
            }
            MetricViolation::AsymmetricInput { i, j, difference } => {
                write!(f, "asymmetric input at ({i},{j}), |d(i,j)-d(j,i)| = {difference}")
            }
            MetricViolation::TriangleViolation { i, j, k, slack } => {
                write!(f, "triangle violation at ({i},{k}) via {j}, slack {slack}")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("distance matrix must be square and non-empty (got {rows} rows, row {row} has {cols} entries)")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("space has no points")]
    EmptySpace,

    #[error("invalid metric: {}", join_violations(.0))]
    InvalidMetric(Vec<MetricViolation>),

    #[error("graph is disconnected: no path between {u} and {v}")]
    DisconnectedGraph { u: usize, v: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("point index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("parameter {name} = {value} out of range: {reason}")]
    ParameterOutOfRange { name: &'static str, value: f64, reason: String },

    #[error("diameter of an empty set is undefined")]
    EmptySetDiameter,

    #[error("negative tripod length a{index} = {value} (metric violation)")]
    NegativeTripod { index: usize, value: f64 },

    #[error("more than {cap} geodesics between a vertex pair; partial thinness {}", .partial.thinness)]
    GeodesicEnumerationCapExceeded { cap: usize, partial: Box<TriangleAnalysis> },

    #[error("ball intersection is empty")]
    EmptyIntersection,

    #[error("loop is not closed: first point {first}, last point {last}")]
    LoopNotClosed { first: usize, last: usize },

    #[error("field is not {lip}-Lipschitz: |f({p}) - f({q})| / d = {ratio}")]
    LipschitzViolation { p: usize, q: usize, ratio: f64, lip: f64 },

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("perturbation broke the metric: {}", join_violations(.0))]
    PerturbationBrokeMetric(Vec<MetricViolation>),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name, used in CLI error objects and FFI status mapping.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::EmptySpace => "EmptySpace",
            Error::InvalidMetric(v) => v.first().map_or("InvalidMetric", MetricViolation::kind),
            Error::DisconnectedGraph { .. } => "DisconnectedGraph",
            Error::InvalidGraph(_) => "InvalidGraph",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::ParameterOutOfRange { .. } => "ParameterOutOfRange",
            Error::EmptySetDiameter => "EmptySetDiameter",
            Error::NegativeTripod { .. } => "NegativeTripod",
            Error::GeodesicEnumerationCapExceeded { .. } => "GeodesicEnumerationCapExceeded",
            Error::EmptyIntersection => "EmptyIntersection",
            Error::LoopNotClosed { .. } => "LoopNotClosed",
            Error::LipschitzViolation { .. } => "LipschitzViolation",
            Error::DomainTooSmall(_) => "DomainTooSmall",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::PerturbationBrokeMetric(_) => "PerturbationBrokeMetric",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}

fn join_violations(v: &[MetricViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
