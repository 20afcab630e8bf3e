//! Heterogeneous multigraph with typed nodes and attributed, typed edges.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How an edge attribute is interpreted when it is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Categorical,
    Numerical,
    /// Timestamps; binned on interarrival times, never on raw values.
    Temporal,
}

impl AttributeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKind::Categorical => "categorical",
            AttributeKind::Numerical => "numerical",
            AttributeKind::Temporal => "temporal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    pub kind: AttributeKind,
    /// Admissible values of a categorical attribute, in bin order. Empty otherwise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub domain: Vec<String>,
}

impl AttributeDef {
    pub fn categorical<S: Into<String>>(name: S, domain: Vec<String>) -> Self {
        AttributeDef { name: name.into(), kind: AttributeKind::Categorical, domain }
    }

    pub fn numerical<S: Into<String>>(name: S) -> Self {
        AttributeDef { name: name.into(), kind: AttributeKind::Numerical, domain: Vec::new() }
    }

    pub fn temporal<S: Into<String>>(name: S) -> Self {
        AttributeDef { name: name.into(), kind: AttributeKind::Temporal, domain: Vec::new() }
    }

    /// Position of `label` in the categorical domain.
    pub fn category_index(&self, label: &str) -> Option<u32> {
        self.domain.iter().position(|d| d == label).map(|i| i as u32)
    }
}

/// Ordered attribute set carried by every edge of one relation type.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeSchema {
    pub attributes: Vec<AttributeDef>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<AttributeDef>) -> Self {
        AttributeSchema { attributes }
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationType {
    pub name: String,
    pub source: String,
    pub target: String,
    pub directed: bool,
    pub attributes: AttributeSchema,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("object type list empty")]
    NoObjectTypes,
    #[error("duplicate object type `{0}`")]
    DuplicateObjectType(String),
    #[error("relation list empty")]
    NoRelations,
    #[error("duplicate relation `{0}`")]
    DuplicateRelation(String),
    #[error("relation `{relation}` references undeclared object type `{object_type}`")]
    UnknownObjectType { relation: String, object_type: String },
    #[error("relation `{0}` declares no attributes")]
    NoAttributes(String),
    #[error("relation `{relation}` declares attribute `{attribute}` twice")]
    DuplicateAttribute { relation: String, attribute: String },
    #[error("categorical attribute `{relation}.{attribute}` has an empty domain")]
    EmptyDomain { relation: String, attribute: String },
    #[error("categorical attribute `{relation}.{attribute}` repeats domain value `{value}`")]
    DuplicateDomainValue { relation: String, attribute: String, value: String },
    #[error("non-categorical attribute `{relation}.{attribute}` must not declare a domain")]
    UnexpectedDomain { relation: String, attribute: String },
}

/// Object types and relation types of a heterogeneous graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSchema {
    pub object_types: Vec<String>,
    pub relations: Vec<RelationType>,
}

impl GraphSchema {
    /// Builds a schema and checks every cross-reference.
    pub fn new(object_types: Vec<String>, relations: Vec<RelationType>) -> Result<Self, SchemaError> {
        let schema = GraphSchema { object_types, relations };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.object_types.is_empty() {
            return Err(SchemaError::NoObjectTypes);
        }
        for (i, t) in self.object_types.iter().enumerate() {
            if self.object_types[..i].contains(t) {
                return Err(SchemaError::DuplicateObjectType(t.clone()));
            }
        }
        if self.relations.is_empty() {
            return Err(SchemaError::NoRelations);
        }
        for (i, rel) in self.relations.iter().enumerate() {
            if self.relations[..i].iter().any(|r| r.name == rel.name) {
                return Err(SchemaError::DuplicateRelation(rel.name.clone()));
            }
            for endpoint in [&rel.source, &rel.target] {
                if !self.object_types.contains(endpoint) {
                    return Err(SchemaError::UnknownObjectType {
                        relation: rel.name.clone(),
                        object_type: endpoint.clone(),
                    });
                }
            }
            if rel.attributes.is_empty() {
                return Err(SchemaError::NoAttributes(rel.name.clone()));
            }
            let attrs = &rel.attributes.attributes;
            for (j, attr) in attrs.iter().enumerate() {
                if attrs[..j].iter().any(|a| a.name == attr.name) {
                    return Err(SchemaError::DuplicateAttribute {
                        relation: rel.name.clone(),
                        attribute: attr.name.clone(),
                    });
                }
                match attr.kind {
                    AttributeKind::Categorical => {
                        if attr.domain.is_empty() {
                            return Err(SchemaError::EmptyDomain {
                                relation: rel.name.clone(),
                                attribute: attr.name.clone(),
                            });
                        }
                        for (k, v) in attr.domain.iter().enumerate() {
                            if attr.domain[..k].contains(v) {
                                return Err(SchemaError::DuplicateDomainValue {
                                    relation: rel.name.clone(),
                                    attribute: attr.name.clone(),
                                    value: v.clone(),
                                });
                            }
                        }
                    }
                    AttributeKind::Numerical | AttributeKind::Temporal => {
                        if !attr.domain.is_empty() {
                            return Err(SchemaError::UnexpectedDomain {
                                relation: rel.name.clone(),
                                attribute: attr.name.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn object_type_index(&self, name: &str) -> Option<usize> {
        self.object_types.iter().position(|t| t == name)
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn relation(&self, index: usize) -> &RelationType {
        &self.relations[index]
    }

    /// Relations having `object_type` as at least one endpoint, in schema order.
    pub fn relations_of(&self, object_type: &str) -> impl Iterator<Item = (usize, &RelationType)> + '_ {
        let name = object_type.to_string();
        self.relations
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.source == name || r.target == name)
    }
}

/// One attribute value on an edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttrValue {
    /// Index into the attribute's categorical domain.
    Category(u32),
    Number(f64),
}

impl AttrValue {
    pub fn as_number(self) -> Option<f64> {
        match self {
            AttrValue::Number(x) => Some(x),
            AttrValue::Category(_) => None,
        }
    }

    pub fn as_category(self) -> Option<u32> {
        match self {
            AttrValue::Category(c) => Some(c),
            AttrValue::Number(_) => None,
        }
    }
}

/// Dense node index, assigned in first-appearance order.
pub type NodeIndex = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub object_type: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub relation: usize,
    pub source: NodeIndex,
    pub target: NodeIndex,
    /// Aligned with the relation's attribute schema.
    pub values: Vec<AttrValue>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown object type `{0}`")]
    UnknownObjectType(String),
    #[error("node `{node}` is typed `{existing}` but used as `{requested}`")]
    TypeConflict { node: String, existing: String, requested: String },
    #[error("relation `{relation}` expects {expected} attribute values, got {found}")]
    Arity { relation: String, expected: usize, found: usize },
    #[error("attribute `{attribute}` expects a {expected} value")]
    WrongValueKind { attribute: String, expected: &'static str },
    #[error("value index {index} outside the domain of `{attribute}` (size {size})")]
    OutOfDomain { attribute: String, index: u32, size: usize },
    #[error("attribute `{attribute}` has non-finite value")]
    NonFinite { attribute: String },
    #[error("temporal attribute `{attribute}` has negative value {value}")]
    NegativeTime { attribute: String, value: f64 },
}

/// Static multigraph: typed nodes and an edge list where parallel edges are allowed.
///
/// Graphs are built through [`AttributedMultigraph::add_edge`] and
/// [`AttributedMultigraph::add_node`], which enforce the schema on every insert.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedMultigraph {
    schema: GraphSchema,
    nodes: Vec<Node>,
    index: BTreeMap<String, NodeIndex>,
    edges: Vec<Edge>,
}

impl AttributedMultigraph {
    pub fn new(schema: GraphSchema) -> Self {
        AttributedMultigraph { schema, nodes: Vec::new(), index: BTreeMap::new(), edges: Vec::new() }
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.schema
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, id: &str) -> Option<NodeIndex> {
        self.index.get(id).copied()
    }

    pub fn node(&self, index: NodeIndex) -> &Node {
        &self.nodes[index]
    }

    pub fn object_type_name(&self, node: NodeIndex) -> &str {
        &self.schema.object_types[self.nodes[node].object_type]
    }

    /// Declares a node (possibly isolated). Re-declaring with the same type is a no-op.
    pub fn add_node(&mut self, id: &str, object_type: &str) -> Result<NodeIndex, GraphError> {
        let ty = self
            .schema
            .object_type_index(object_type)
            .ok_or_else(|| GraphError::UnknownObjectType(object_type.to_string()))?;
        self.intern(id, ty)
    }

    fn intern(&mut self, id: &str, ty: usize) -> Result<NodeIndex, GraphError> {
        if let Some(&idx) = self.index.get(id) {
            let existing = self.nodes[idx].object_type;
            if existing != ty {
                return Err(GraphError::TypeConflict {
                    node: id.to_string(),
                    existing: self.schema.object_types[existing].clone(),
                    requested: self.schema.object_types[ty].clone(),
                });
            }
            return Ok(idx);
        }
        let idx = self.nodes.len();
        self.nodes.push(Node { id: id.to_string(), object_type: ty });
        self.index.insert(id.to_string(), idx);
        Ok(idx)
    }

    /// Appends an edge after checking endpoint types and every attribute value.
    ///
    /// Nothing is inserted when validation fails.
    pub fn add_edge(
        &mut self,
        relation: &str,
        source: &str,
        target: &str,
        values: Vec<AttrValue>,
    ) -> Result<usize, GraphError> {
        let ri = self
            .schema
            .relation_index(relation)
            .ok_or_else(|| GraphError::UnknownRelation(relation.to_string()))?;
        let rel = &self.schema.relations[ri];
        check_values(rel, &values)?;
        let src_ty = self.schema.object_type_index(&rel.source).expect("validated schema");
        let dst_ty = self.schema.object_type_index(&rel.target).expect("validated schema");
        for (id, ty) in [(source, src_ty), (target, dst_ty)] {
            if let Some(&idx) = self.index.get(id) {
                let existing = self.nodes[idx].object_type;
                if existing != ty {
                    return Err(GraphError::TypeConflict {
                        node: id.to_string(),
                        existing: self.schema.object_types[existing].clone(),
                        requested: self.schema.object_types[ty].clone(),
                    });
                }
            }
        }
        let s = self.intern(source, src_ty)?;
        let t = self.intern(target, dst_ty)?;
        self.edges.push(Edge { relation: ri, source: s, target: t, values });
        Ok(self.edges.len() - 1)
    }

    /// Nodes of one object type, in index order.
    pub fn nodes_of_type(&self, object_type: usize) -> impl Iterator<Item = NodeIndex> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.object_type == object_type)
            .map(|(i, _)| i)
    }

    /// Subgraph holding the given edges (in the given order) and only the nodes they touch.
    pub fn edge_subgraph(&self, edge_indices: &[usize]) -> AttributedMultigraph {
        let mut sub = AttributedMultigraph::new(self.schema.clone());
        for &e in edge_indices {
            let edge = &self.edges[e];
            let s = sub
                .intern(&self.nodes[edge.source].id, self.nodes[edge.source].object_type)
                .expect("types consistent with parent graph");
            let t = sub
                .intern(&self.nodes[edge.target].id, self.nodes[edge.target].object_type)
                .expect("types consistent with parent graph");
            sub.edges.push(Edge { relation: edge.relation, source: s, target: t, values: edge.values.clone() });
        }
        sub
    }
}

fn check_values(rel: &RelationType, values: &[AttrValue]) -> Result<(), GraphError> {
    let attrs = &rel.attributes.attributes;
    if attrs.len() != values.len() {
        return Err(GraphError::Arity { relation: rel.name.clone(), expected: attrs.len(), found: values.len() });
    }
    for (attr, value) in attrs.iter().zip(values) {
        match (attr.kind, *value) {
            (AttributeKind::Categorical, AttrValue::Category(c)) => {
                if c as usize >= attr.domain.len() {
                    return Err(GraphError::OutOfDomain {
                        attribute: attr.name.clone(),
                        index: c,
                        size: attr.domain.len(),
                    });
                }
            }
            (AttributeKind::Categorical, AttrValue::Number(_)) => {
                return Err(GraphError::WrongValueKind { attribute: attr.name.clone(), expected: "categorical" });
            }
            (kind, AttrValue::Number(x)) => {
                if !x.is_finite() {
                    return Err(GraphError::NonFinite { attribute: attr.name.clone() });
                }
                if kind == AttributeKind::Temporal && x < 0.0 {
                    return Err(GraphError::NegativeTime { attribute: attr.name.clone(), value: x });
                }
            }
            (_, AttrValue::Category(_)) => {
                return Err(GraphError::WrongValueKind { attribute: attr.name.clone(), expected: "numeric" });
            }
        }
    }
    Ok(())
}
