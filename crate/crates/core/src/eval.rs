//! Precision@k against ground-truth labels.

use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rank::AbnormalityRanking;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Honest,
    /// Fraudulent, with the name of the injected pattern.
    Fraud(String),
}

impl Label {
    pub fn is_fraud(&self) -> bool {
        matches!(self, Label::Fraud(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k = {k} exceeds the ranking length {len}")]
    KTooLarge { k: usize, len: usize },
}

/// Fraction of the top `k` ranked nodes labeled as fraud. Unlabeled nodes
/// count as not fraud.
pub fn precision_at_k(ranking: &AbnormalityRanking, labels: &BTreeMap<String, Label>, k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    if k > ranking.len() {
        return Err(EvalError::KTooLarge { k, len: ranking.len() });
    }
    let hits = ranking.node_ids().take(k).filter(|id| labels.get(*id).is_some_and(Label::is_fraud)).count();
    Ok(hits as f64 / k as f64)
}
