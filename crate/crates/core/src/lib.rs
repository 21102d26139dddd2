//! Metrical service systems with transformations (T-MSS).
//!
//! The crate provides exact finite metrics, the work function algorithm
//! generalised to transformation requests, weakly ultrahomogeneous metric
//! extensions, the Lipschitz-to-ultrametric reduction, lower-bound
//! adversaries and the k-taxi reduction through configuration tori.

#![allow(clippy::needless_range_loop)]

pub mod adversaries;
pub mod homogenize;
pub mod instance;
pub mod ktaxi;
pub mod lipschitz;
pub mod metric;
pub mod random;
pub mod transform;
pub mod ultrametric;
pub mod wfa;

pub use metric::{FiniteMetric, MetricError, MetricSpace, Rational};
pub use transform::{TransformError, TransformKind, Transformation};
pub use ultrametric::UltrametricTree;
