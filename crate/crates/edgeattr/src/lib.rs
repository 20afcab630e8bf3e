//! File formats, synthetic data and benchmarking around `edgeattr-core`.
//!
//! - [`schema`]: JSON schema documents.
//! - [`edges`]: CSV edge and node files.
//! - [`report`]: ranking, cluster-profile, model and label files.
//! - [`synth`]: labeled synthetic rating graphs.
//! - [`bench`]: runtime scaling on edge subsamples.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod edges;
pub mod error;
pub mod report;
pub mod schema;
pub mod synth;

pub use error::{Error, Result};
