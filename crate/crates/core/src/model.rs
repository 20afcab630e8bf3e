//! Fitted per-attribute cluster models, shared by fitting and scoring.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterSet;
use crate::discretize::{BinKind, BinSpec};
use crate::graph::{AttributeKind, GraphSchema};

/// Bin layout plus cluster centers and proportions for one
/// (object type, relation, attribute).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeModel {
    pub object_type: String,
    pub relation: String,
    pub attribute: String,
    pub kind: AttributeKind,
    pub bins: BinSpec,
    pub clusters: ClusterSet,
}

/// Every attribute model of a graph, ordered by object type, then relation,
/// then attribute as declared in the schema.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub entries: Vec<AttributeModel>,
}

impl ClusterModel {
    pub fn get(&self, object_type: &str, relation: &str, attribute: &str) -> Option<&AttributeModel> {
        self.entries
            .iter()
            .find(|e| e.object_type == object_type && e.relation == relation && e.attribute == attribute)
    }

    pub fn for_object_type<'a>(&'a self, object_type: &'a str) -> impl Iterator<Item = &'a AttributeModel> + 'a {
        self.entries.iter().filter(move |e| e.object_type == object_type)
    }

    /// Checks that the model covers `schema` exactly and is internally
    /// consistent. Returns a description of the first problem found.
    pub fn check_against(&self, schema: &GraphSchema) -> Result<(), String> {
        let mut expected = 0;
        for ot in &schema.object_types {
            for (_, rel) in schema.relations_of(ot) {
                for attr in &rel.attributes.attributes {
                    expected += 1;
                    let Some(m) = self.get(ot, &rel.name, &attr.name) else {
                        return Err(format!("no model for {ot}/{}.{}", rel.name, attr.name));
                    };
                    let label = format!("{ot}/{}.{}", rel.name, attr.name);
                    if m.kind != attr.kind {
                        return Err(format!("{label}: kind {} does not match schema {}", m.kind.as_str(), attr.kind.as_str()));
                    }
                    let categorical_bins = m.bins.kind == BinKind::Categorical;
                    if categorical_bins != (attr.kind == AttributeKind::Categorical) {
                        return Err(format!("{label}: bin layout does not fit the attribute kind"));
                    }
                    if categorical_bins && m.bins.categories != attr.domain {
                        return Err(format!("{label}: categories differ from the schema domain"));
                    }
                    if !m.bins.is_valid() {
                        return Err(format!("{label}: invalid bin layout"));
                    }
                    if !m.clusters.is_valid() || m.clusters.dim() != m.bins.bins {
                        return Err(format!("{label}: invalid cluster set"));
                    }
                }
            }
        }
        if expected != self.entries.len() {
            return Err(format!("model has {} entries, schema needs {expected}", self.entries.len()));
        }
        Ok(())
    }
}
