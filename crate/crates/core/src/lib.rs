//! Numerical laboratory for normal, Bloch and Yosida quasiregular mappings.

// Comparisons are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuity;
pub mod dynamics;
pub mod error;
pub mod isometry;
pub mod metrics;
pub mod point;
pub mod rng;
pub mod zoo;

pub use error::{QrError, Result};
pub use metrics::{ConformalMetric, MetricKind, Region};
pub use point::ExtPoint;
pub use zoo::MapDescriptor;
