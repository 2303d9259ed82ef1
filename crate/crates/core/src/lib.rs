//! Light, low-degree, low-hop-diameter spanners for finite metric spaces.
//!
//! The pipeline builds a Hamiltonian path from a minimum spanning tree,
//! layers an interval hierarchy of bags over it, and at every level joins
//! bag representatives with a pluggable base spanner pruned to a geometric
//! threshold. [`lightsp::run`] is the entry point; [`verify`] re-checks the
//! output against independent oracles.
//!
//! Everything length-valued is generic over [`Scalar`] (`f32` or `f64`);
//! the `*F64` aliases name the common instantiation.

pub mod attach;
pub mod basicsp;
pub mod error;
pub mod graph;
pub mod hierarchy;
pub mod lightsp;
pub mod metric;
pub mod path1d;
pub mod scalar;
pub mod verify;

pub use basicsp::{BasicSpKind, BasicStats};
pub use error::{Error, Result};
pub use graph::{HamiltonianPath, OracleCaps, SpannerGraph};
pub use hierarchy::{BagForest, LevelParams, Mode};
pub use lightsp::{run, RunConfig, SpannerBundle};
pub use metric::{load_metric, MetricSpace, PointId};
pub use scalar::Scalar;
pub use verify::{verify_all, VerificationReport};

pub type MetricSpaceF64 = MetricSpace<f64>;
pub type SpannerGraphF64 = SpannerGraph<f64>;
pub type HamiltonianPathF64 = HamiltonianPath<f64>;
pub type BagForestF64 = BagForest<f64>;
pub type SpannerBundleF64 = SpannerBundle<f64>;

pub type MetricSpaceF32 = MetricSpace<f32>;
pub type SpannerBundleF32 = SpannerBundle<f32>;
