//! Per-node collection of adjacent edge attribute values.
//!
//! For an (object type, relation) pair every node of that type gathers the
//! attribute values of the edges it participates in. Which edges count as
//! "its" edges depends on the relation:
//!
//! * undirected: every adjacent edge, whichever endpoint the node sits on;
//! * directed, node type is the declared source: outgoing edges;
//! * directed, node type is only the declared target: incoming edges.
//!
//! Temporal attributes are stored as interarrival times (sorted timestamps,
//! first difference) rather than raw values.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{AttrValue, AttributeKind, AttributedMultigraph, NodeIndex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("unknown object type index {0}")]
    UnknownObjectType(usize),
    #[error("unknown relation index {0}")]
    UnknownRelation(usize),
    #[error("object type `{object_type}` is not an endpoint of relation `{relation}`")]
    NotAnEndpoint { object_type: String, relation: String },
}

/// Raw values of one attribute over a node's adjacent edges.
#[derive(Debug, Clone, PartialEq)]
pub enum AttrVector {
    Categorical(Vec<u32>),
    /// Raw values for numerical attributes, interarrival times for temporal ones.
    Numeric(Vec<f64>),
}

impl AttrVector {
    pub fn len(&self) -> usize {
        match self {
            AttrVector::Categorical(v) => v.len(),
            AttrVector::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All attribute vectors of one node for one relation.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeAttributeVectors {
    pub node: NodeIndex,
    pub relation: usize,
    /// Number of adjacent edges of the relation, `|f_{v,r}|`.
    pub edge_count: usize,
    /// Aligned with the relation's attribute schema.
    pub attributes: Vec<AttrVector>,
}

/// Observed range of one attribute over a relation.
///
/// For temporal attributes the range is over interarrival times.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeRangeStats {
    pub attribute: String,
    pub kind: AttributeKind,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AttributeRangeStats {
    fn new(attribute: String, kind: AttributeKind) -> Self {
        AttributeRangeStats { attribute, kind, min: f64::INFINITY, max: f64::NEG_INFINITY, count: 0 }
    }

    fn observe(&mut self, x: f64) {
        if x < self.min {
            self.min = x;
        }
        if x > self.max {
            self.max = x;
        }
        self.count += 1;
    }

    fn finish(mut self) -> Self {
        if self.count == 0 {
            self.min = 0.0;
            self.max = 0.0;
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

/// Output of [`aggregate`]: per-node vectors keyed by node index, plus one
/// range summary per attribute of the relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub vectors: BTreeMap<NodeIndex, NodeAttributeVectors>,
    pub stats: Vec<AttributeRangeStats>,
}

/// Whether `object_type` aggregates edge `(source, target)` as its source end,
/// its target end, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Roles {
    source: bool,
    target: bool,
}

fn roles(graph: &AttributedMultigraph, object_type: usize, relation: usize) -> Result<Roles, AggregateError> {
    let schema = graph.schema();
    let type_name = schema.object_types.get(object_type).ok_or(AggregateError::UnknownObjectType(object_type))?;
    let rel = schema.relations.get(relation).ok_or(AggregateError::UnknownRelation(relation))?;
    let is_source = &rel.source == type_name;
    let is_target = &rel.target == type_name;
    if !is_source && !is_target {
        return Err(AggregateError::NotAnEndpoint { object_type: type_name.clone(), relation: rel.name.clone() });
    }
    Ok(if rel.directed {
        // A same-typed directed relation aggregates outgoing edges only.
        Roles { source: is_source, target: !is_source }
    } else {
        Roles { source: is_source, target: is_target }
    })
}

/// Collects `f_{v,r}` for every node of `object_type` with at least one edge
/// of `relation`, and the attribute ranges over the relation.
pub fn aggregate(
    graph: &AttributedMultigraph,
    object_type: usize,
    relation: usize,
) -> Result<Aggregation, AggregateError> {
    let roles = roles(graph, object_type, relation)?;
    let attrs = &graph.schema().relations[relation].attributes.attributes;

    // Sequential scan: edge lists per node, in edge order.
    let mut adjacent: BTreeMap<NodeIndex, Vec<usize>> = BTreeMap::new();
    for (ei, edge) in graph.edges().iter().enumerate() {
        if edge.relation != relation {
            continue;
        }
        if roles.source {
            adjacent.entry(edge.source).or_default().push(ei);
        }
        if roles.target && !(roles.source && edge.source == edge.target) {
            adjacent.entry(edge.target).or_default().push(ei);
        }
    }

    let mut stats: Vec<AttributeRangeStats> =
        attrs.iter().map(|a| AttributeRangeStats::new(a.name.clone(), a.kind)).collect();
    for edge in graph.edges().iter().filter(|e| e.relation == relation) {
        for (w, attr) in attrs.iter().enumerate() {
            match (attr.kind, edge.values[w]) {
                (AttributeKind::Temporal, _) => {}
                (_, AttrValue::Category(c)) => stats[w].observe(c as f64),
                (_, AttrValue::Number(x)) => stats[w].observe(x),
            }
        }
    }

    let mut vectors = BTreeMap::new();
    for (node, edge_ids) in adjacent {
        let mut attributes = Vec::with_capacity(attrs.len());
        for (w, attr) in attrs.iter().enumerate() {
            let column = edge_ids.iter().map(|&e| graph.edges()[e].values[w]);
            let vector = match attr.kind {
                AttributeKind::Categorical => AttrVector::Categorical(column.filter_map(AttrValue::as_category).collect()),
                AttributeKind::Numerical => AttrVector::Numeric(column.filter_map(AttrValue::as_number).collect()),
                AttributeKind::Temporal => {
                    let ts: Vec<f64> = column.filter_map(AttrValue::as_number).collect();
                    let iat = compute_iat(&ts);
                    for &x in &iat {
                        stats[w].observe(x);
                    }
                    AttrVector::Numeric(iat)
                }
            };
            attributes.push(vector);
        }
        vectors.insert(node, NodeAttributeVectors { node, relation, edge_count: edge_ids.len(), attributes });
    }

    Ok(Aggregation { vectors, stats: stats.into_iter().map(AttributeRangeStats::finish).collect() })
}

/// Interarrival times: sort ascending, then take consecutive differences.
///
/// Duplicate timestamps yield zero gaps, which are kept.
pub fn compute_iat(timestamps: &[f64]) -> Vec<f64> {
    let mut sorted = timestamps.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).map(|w| w[1] - w[0]).collect()
}
