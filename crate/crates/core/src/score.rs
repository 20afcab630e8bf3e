//! Encoding-cost abnormality scores.
//!
//! A node whose attribute histogram `p` (built from `n` values) is encoded
//! with a model distribution `C` pays `n·(H(p) + KL(p‖C))` bits. The entropy
//! part is intrinsic to the node, so abnormality keeps only the excess
//! `n·KL(p‖C)`:
//!
//! * base score: `n·KL(p‖C)` against one model distribution;
//! * multifaceted score: `n·Σ_g ρ_g·KL(p‖C_g)` against weighted clusters;
//! * unified score: the multifaceted score summed over every attribute of
//!   every relation the node takes part in.
//!
//! All quantities are in bits. Model distributions are smoothed by `ε` and
//! renormalized before use; node distributions never are.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::NodeAttributeVectors;
use crate::cluster::ClusterSet;
use crate::discretize::{bin_and_normalize, BinError};
use crate::graph::GraphSchema;
use crate::model::ClusterModel;

pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("distribution dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cluster set is empty")]
    NoClusters,
    #[error("no model for {object_type}/{relation}.{attribute}")]
    MissingModel { object_type: String, relation: String, attribute: String },
    #[error(transparent)]
    Bin(#[from] BinError),
}

/// `KL(p ‖ q')` in bits, where `q' = (q + ε)/(1 + d·ε)`.
///
/// Bins with `p(i) = 0` contribute nothing. With `ε = 0` a bin where
/// `q(i) = 0 < p(i)` makes the result infinite.
pub fn kl_divergence(p: &[f64], q: &[f64], epsilon: f64) -> Result<f64, ScoreError> {
    if p.len() != q.len() {
        return Err(ScoreError::DimensionMismatch(p.len(), q.len()));
    }
    let norm = 1.0 + p.len() as f64 * epsilon;
    let mut kl = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            let qs = (qi + epsilon) / norm;
            kl += pi * libm::log2(pi / qs);
        }
    }
    Ok(kl.max(0.0))
}

/// Shannon entropy in bits, with `0·log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * libm::log2(x)).sum();
    h.max(0.0)
}

/// Bits needed to encode the node's `n` values with the model `center`:
/// `n·(H(p) + KL(p‖center))`.
pub fn description_length(p: &[f64], n: usize, center: &[f64], epsilon: f64) -> Result<f64, ScoreError> {
    let kl = kl_divergence(p, center, epsilon)?;
    if n == 0 {
        return Ok(0.0);
    }
    Ok(n as f64 * (entropy(p) + kl))
}

/// `n·KL(p‖center)`.
pub fn score_base(p: &[f64], n: usize, center: &[f64], epsilon: f64) -> Result<f64, ScoreError> {
    let kl = kl_divergence(p, center, epsilon)?;
    if n == 0 {
        return Ok(0.0);
    }
    Ok(n as f64 * kl)
}

/// `n·Σ_g ρ_g·KL(p‖C_g)`.
pub fn score_multifaceted(p: &[f64], n: usize, clusters: &ClusterSet, epsilon: f64) -> Result<f64, ScoreError> {
    if clusters.is_empty() {
        return Err(ScoreError::NoClusters);
    }
    let mut expected = 0.0;
    for (center, &rho) in clusters.centers.iter().zip(&clusters.proportions) {
        expected += rho * kl_divergence(p, center, epsilon)?;
    }
    if n == 0 {
        return Ok(0.0);
    }
    Ok(n as f64 * expected)
}

/// Score of one (relation, attribute) pair for a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub relation: String,
    pub attribute: String,
    pub bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub node: String,
    pub total: f64,
    /// One entry per (relation, attribute) of the node's object type, in model order.
    pub contributions: Vec<Contribution>,
    /// `|f_{v,r}|` for each relation of the object type.
    pub cardinalities: Vec<(String, usize)>,
}

impl ScoreBreakdown {
    /// Breakdown of a node with no adjacent edges.
    pub fn zero(node: String, object_type: &str, model: &ClusterModel, schema: &GraphSchema) -> Self {
        ScoreBreakdown {
            node,
            total: 0.0,
            contributions: model
                .for_object_type(object_type)
                .map(|m| Contribution { relation: m.relation.clone(), attribute: m.attribute.clone(), bits: 0.0 })
                .collect(),
            cardinalities: schema.relations_of(object_type).map(|(_, r)| (r.name.clone(), 0)).collect(),
        }
    }
}

/// Unified score of one node: the multifaceted score of every attribute of
/// every relation, summed.
///
/// `vectors` holds one entry per relation the node has edges in. Each
/// attribute is binned with the model's layout; temporal attributes count
/// their interarrival times, so `n` is one less than the edge count.
pub fn score_unified(
    node: &str,
    object_type: &str,
    vectors: &[&NodeAttributeVectors],
    schema: &GraphSchema,
    model: &ClusterModel,
    epsilon: f64,
) -> Result<ScoreBreakdown, ScoreError> {
    for v in vectors {
        let rel = schema.relation(v.relation);
        for attr in &rel.attributes.attributes {
            if model.get(object_type, &rel.name, &attr.name).is_none() {
                return Err(ScoreError::MissingModel {
                    object_type: object_type.into(),
                    relation: rel.name.clone(),
                    attribute: attr.name.clone(),
                });
            }
        }
    }

    let mut contributions = Vec::new();
    for m in model.for_object_type(object_type) {
        let found = vectors.iter().find(|v| schema.relation(v.relation).name == m.relation);
        let bits = match found {
            None => 0.0,
            Some(v) => {
                let w = schema.relation(v.relation).attributes.position(&m.attribute).ok_or_else(|| {
                    ScoreError::MissingModel {
                        object_type: object_type.into(),
                        relation: m.relation.clone(),
                        attribute: m.attribute.clone(),
                    }
                })?;
                let dist = bin_and_normalize(&v.attributes[w], &m.bins)?;
                score_multifaceted(&dist.masses, dist.n, &m.clusters, epsilon)?
            }
        };
        contributions.push(Contribution { relation: m.relation.clone(), attribute: m.attribute.clone(), bits });
    }
    let cardinalities = schema
        .relations_of(object_type)
        .map(|(ri, r)| {
            let n = vectors.iter().find(|v| v.relation == ri).map_or(0, |v| v.edge_count);
            (r.name.clone(), n)
        })
        .collect();
    let total = contributions.iter().map(|c| c.bits).sum();
    Ok(ScoreBreakdown { node: node.into(), total, contributions, cardinalities })
}
