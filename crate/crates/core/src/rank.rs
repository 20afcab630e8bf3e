//! Per-object-type ordering of nodes by abnormality.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::score::ScoreBreakdown;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedNode {
    /// 1-based.
    pub rank: usize,
    pub breakdown: ScoreBreakdown,
}

impl RankedNode {
    pub fn node(&self) -> &str {
        &self.breakdown.node
    }

    pub fn score(&self) -> f64 {
        self.breakdown.total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbnormalityRanking {
    pub object_type: String,
    pub entries: Vec<RankedNode>,
}

impl AbnormalityRanking {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(RankedNode::node)
    }

    /// The breakdowns in rank order, e.g. to rank them again.
    pub fn breakdowns(&self) -> Vec<ScoreBreakdown> {
        self.entries.iter().map(|e| e.breakdown.clone()).collect()
    }
}

/// Sorts by descending total score, ties by ascending node id, and numbers
/// the result from 1.
pub fn rank(mut scores: Vec<ScoreBreakdown>, object_type: &str) -> AbnormalityRanking {
    scores.sort_by(|a, b| b.total.total_cmp(&a.total).then_with(|| a.node.cmp(&b.node)));
    AbnormalityRanking {
        object_type: object_type.into(),
        entries: scores.into_iter().enumerate().map(|(i, breakdown)| RankedNode { rank: i + 1, breakdown }).collect(),
    }
}
