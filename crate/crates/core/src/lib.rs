//! Abnormality ranking for nodes of heterogeneous graphs with attributed edges.
//!
//! Each node is summarized by histograms of the attribute values on its
//! adjacent edges (interarrival times for timestamps). Per object type,
//! relation and attribute, those histograms are clustered with X-means; a
//! node's score is the number of extra bits its histograms cost when encoded
//! with the cluster distributions, weighted by cluster proportions and summed
//! over all attributes and relations.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the synthetic
//! data generator and the command line live in the `edgeattr` crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]
// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod aggregate;
pub mod cluster;
pub mod discretize;
pub mod eval;
pub mod graph;
pub mod model;
pub mod pipeline;
pub mod rank;
pub mod score;

pub use aggregate::{aggregate, compute_iat, AttrVector, Aggregation, AttributeRangeStats, NodeAttributeVectors};
pub use cluster::{assign_proportions, bic_score, kmeans, xmeans, ClusterSet, KMeansResult, XMeansConfig};
pub use discretize::{bin_and_normalize, choose_binning, BinKind, BinSpec, DiscreteDistribution};
pub use eval::{precision_at_k, Label};
pub use graph::{
    AttrValue, AttributeDef, AttributeKind, AttributeSchema, AttributedMultigraph, GraphSchema, NodeIndex,
    RelationType,
};
pub use model::{AttributeModel, ClusterModel};
pub use pipeline::{fit_model, run, score_graph, PipelineConfig, PipelineError, PipelineOutput};
pub use rank::{rank, AbnormalityRanking, RankedNode};
pub use score::{
    description_length, entropy, kl_divergence, score_base, score_multifaceted, score_unified, Contribution,
    ScoreBreakdown,
};
