//! Computational diagnostics for metric trees and Gromov hyperbolic spaces
//! on finite metric spaces.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cli;
pub mod error;
pub mod gallery;
pub mod geodesic;
pub mod hyperbolicity;
pub mod io;
pub mod lens;
pub mod pointset;
pub mod report;
pub mod sampling;
pub mod space;

pub use error::{Error, MetricViolation, Result};
pub use gallery::{generate, GeneratorSpec};
pub use geodesic::{eval_geodesic, geodesic, DiscreteGeodesic};
pub use hyperbolicity::{certify_tree, four_point_delta, space_thinness, triangle_thinness, GeodesicMode};
pub use lens::{diamond_scan, DistortionProfile, LensReport, ScanConfig};
pub use pointset::PointSet;
pub use space::{
    ball_members, geodesicity_defect, metric_from_graph, set_diameter, validate_metric, Ball,
    FiniteMetricSpace, GraphSpec, Norm,
};
