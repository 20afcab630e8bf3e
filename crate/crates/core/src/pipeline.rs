//! End-to-end fitting and scoring over a whole graph.
//!
//! Fitting aggregates every (object type, relation) pair, chooses a shared
//! bin layout per attribute and clusters the per-node distributions. Scoring
//! applies a fitted (or imported) model to every node and ranks each object
//! type separately.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::aggregate::{aggregate, AggregateError, Aggregation, NodeAttributeVectors};
use crate::cluster::{xmeans, ClusterError, ClusterSet, XMeansConfig};
use crate::discretize::{bin_and_normalize, choose_binning, BinError, BinKind, BinSpec, DEFAULT_BINS};
use crate::graph::AttributedMultigraph;
use crate::model::{AttributeModel, ClusterModel};
use crate::rank::{rank, AbnormalityRanking};
use crate::score::{score_unified, ScoreBreakdown, ScoreError, DEFAULT_EPSILON};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Bin count for numerical and temporal attributes.
    pub bins: usize,
    /// Smoothing applied to model distributions inside KL.
    pub epsilon: f64,
    pub xmeans: XMeansConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { bins: DEFAULT_BINS, epsilon: DEFAULT_EPSILON, xmeans: XMeansConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The supplied model does not fit the graph.
    #[error("model does not match graph: {0}")]
    ModelMismatch(String),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Bin(#[from] BinError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

impl PipelineError {
    /// True for failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        !matches!(self, PipelineError::Config(_) | PipelineError::ModelMismatch(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub model: ClusterModel,
    /// One ranking per object type, in schema order.
    pub rankings: Vec<AbnormalityRanking>,
}

/// Aggregations of one object type, one per relation it takes part in.
struct TypeAggregations {
    object_type: usize,
    per_relation: Vec<(usize, Aggregation)>,
}

fn aggregate_graph(graph: &AttributedMultigraph) -> Result<Vec<TypeAggregations>, PipelineError> {
    let schema = graph.schema();
    let mut out = Vec::with_capacity(schema.object_types.len());
    for (ti, ot) in schema.object_types.iter().enumerate() {
        let mut per_relation = Vec::new();
        for (ri, _) in schema.relations_of(ot) {
            per_relation.push((ri, aggregate(graph, ti, ri)?));
        }
        out.push(TypeAggregations { object_type: ti, per_relation });
    }
    Ok(out)
}

fn check_config(config: &PipelineConfig) -> Result<(), PipelineError> {
    if config.bins == 0 {
        return Err(PipelineError::Config("bin count must be at least 1".into()));
    }
    if !(config.epsilon >= 0.0) || !config.epsilon.is_finite() {
        return Err(PipelineError::Config("epsilon must be a finite non-negative number".into()));
    }
    config.xmeans.validate().map_err(|e| PipelineError::Config(alloc::format!("{e}")))
}

fn fit(graph: &AttributedMultigraph, aggs: &[TypeAggregations], config: &PipelineConfig) -> Result<ClusterModel, PipelineError> {
    let schema = graph.schema();
    let mut entries = Vec::new();
    for ta in aggs {
        let ot = &schema.object_types[ta.object_type];
        for (ri, agg) in &ta.per_relation {
            let rel = schema.relation(*ri);
            for (w, attr) in rel.attributes.attributes.iter().enumerate() {
                let stats = &agg.stats[w];
                let bins = if stats.is_empty() && attr.kind != crate::graph::AttributeKind::Categorical {
                    BinSpec::constant(0.0)
                } else {
                    choose_binning(attr, stats, config.bins)?
                };
                let mut points = Vec::with_capacity(agg.vectors.len());
                for v in agg.vectors.values() {
                    let dist = bin_and_normalize(&v.attributes[w], &bins)?;
                    if dist.n > 0 {
                        points.push(dist.masses);
                    }
                }
                let clusters = if points.is_empty() {
                    let d = bins.bins;
                    ClusterSet::single(alloc::vec![1.0 / d as f64; d])
                } else if bins.kind == BinKind::Constant {
                    ClusterSet {
                        centers: alloc::vec![alloc::vec![1.0]],
                        proportions: alloc::vec![1.0],
                        assignment: alloc::vec![0; points.len()],
                    }
                } else {
                    xmeans(&points, &config.xmeans)?
                };
                entries.push(AttributeModel {
                    object_type: ot.clone(),
                    relation: rel.name.clone(),
                    attribute: attr.name.clone(),
                    kind: attr.kind,
                    bins,
                    clusters,
                });
            }
        }
    }
    Ok(ClusterModel { entries })
}

fn score_all(
    graph: &AttributedMultigraph,
    aggs: &[TypeAggregations],
    model: &ClusterModel,
    epsilon: f64,
) -> Result<Vec<AbnormalityRanking>, PipelineError> {
    let schema = graph.schema();
    let mut rankings = Vec::with_capacity(aggs.len());
    for ta in aggs {
        let ot = &schema.object_types[ta.object_type];
        let mut scores = Vec::new();
        for node in graph.nodes_of_type(ta.object_type) {
            let vectors: Vec<&NodeAttributeVectors> =
                ta.per_relation.iter().filter_map(|(_, agg)| agg.vectors.get(&node)).collect();
            let id = &graph.node(node).id;
            let breakdown = if vectors.is_empty() {
                ScoreBreakdown::zero(id.clone(), ot, model, schema)
            } else {
                score_unified(id, ot, &vectors, schema, model, epsilon)?
            };
            scores.push(breakdown);
        }
        rankings.push(rank(scores, ot));
    }
    Ok(rankings)
}

/// Fits cluster models for every (object type, relation, attribute).
pub fn fit_model(graph: &AttributedMultigraph, config: &PipelineConfig) -> Result<ClusterModel, PipelineError> {
    check_config(config)?;
    let aggs = aggregate_graph(graph)?;
    fit(graph, &aggs, config)
}

/// Scores and ranks every node with an existing model.
pub fn score_graph(
    graph: &AttributedMultigraph,
    model: &ClusterModel,
    config: &PipelineConfig,
) -> Result<Vec<AbnormalityRanking>, PipelineError> {
    check_config(config)?;
    model.check_against(graph.schema()).map_err(PipelineError::ModelMismatch)?;
    let aggs = aggregate_graph(graph)?;
    score_all(graph, &aggs, model, config.epsilon)
}

/// Fit, score and rank in one pass over the graph.
pub fn run(graph: &AttributedMultigraph, config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    check_config(config)?;
    let aggs = aggregate_graph(graph)?;
    let model = fit(graph, &aggs, config)?;
    let rankings = score_all(graph, &aggs, &model, config.epsilon)?;
    Ok(PipelineOutput { model, rankings })
}
