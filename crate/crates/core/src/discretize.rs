//! Histogram binning of attribute vectors into probability mass functions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{AttrVector, AttributeRangeStats};
use crate::graph::{AttributeDef, AttributeKind};

/// Lower clamp for logarithmic spacing; values below it land in bin 0.
pub const EPS_POS: f64 = 1.0;

/// Ratio `max / min` at or above which numeric attributes get log-spaced bins.
pub const LOG_RATIO: f64 = 10.0;

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BinError {
    #[error("bin count must be at least 1")]
    ZeroBins,
    #[error("attribute `{0}` has no observed values")]
    EmptyStats(String),
    #[error("category index {index} outside {bins} bins")]
    UnknownCategory { index: u32, bins: usize },
    #[error("{vector} values cannot be binned by a {spec} bin spec")]
    KindMismatch { vector: &'static str, spec: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinKind {
    /// One bin per declared category.
    Categorical,
    Linear,
    Logarithmic,
    /// Every observed value was identical: a single bin.
    Constant,
}

impl BinKind {
    fn as_str(self) -> &'static str {
        match self {
            BinKind::Categorical => "categorical",
            BinKind::Linear => "linear",
            BinKind::Logarithmic => "logarithmic",
            BinKind::Constant => "constant",
        }
    }
}

/// Shared bin layout for one (object type, relation, attribute).
///
/// Numeric bins are half-open `[b_i, b_{i+1})` except the last, which is
/// closed. Values below `b_0` fall into bin 0 and values above `b_d` into the
/// last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub kind: BinKind,
    pub bins: usize,
    /// `bins + 1` edges for numeric kinds, `[v, v]` for `Constant`, empty for categorical.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundaries: Vec<f64>,
    /// Category labels in bin order (categorical kind only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl BinSpec {
    pub fn categorical(categories: Vec<String>) -> Self {
        BinSpec { kind: BinKind::Categorical, bins: categories.len(), boundaries: Vec::new(), categories }
    }

    pub fn constant(value: f64) -> Self {
        BinSpec { kind: BinKind::Constant, bins: 1, boundaries: vec![value, value], categories: Vec::new() }
    }

    pub fn linear(min: f64, max: f64, bins: usize) -> Self {
        let mut boundaries: Vec<f64> = (0..=bins).map(|i| min + (max - min) * (i as f64 / bins as f64)).collect();
        boundaries[bins] = max;
        BinSpec { kind: BinKind::Linear, bins, boundaries, categories: Vec::new() }
    }

    /// Geometric spacing between `lo > 0` and `max`.
    pub fn logarithmic(lo: f64, max: f64, bins: usize) -> Self {
        let (a, b) = (libm::log(lo), libm::log(max));
        let mut boundaries: Vec<f64> =
            (0..=bins).map(|i| libm::exp(a + (b - a) * (i as f64 / bins as f64))).collect();
        boundaries[0] = lo;
        boundaries[bins] = max;
        BinSpec { kind: BinKind::Logarithmic, bins, boundaries, categories: Vec::new() }
    }

    /// Structural validity: bin count, edge count and strict ordering.
    pub fn is_valid(&self) -> bool {
        match self.kind {
            BinKind::Categorical => self.bins >= 1 && self.categories.len() == self.bins,
            BinKind::Constant => self.bins == 1 && self.boundaries.len() == 2,
            BinKind::Linear | BinKind::Logarithmic => {
                self.bins >= 1
                    && self.boundaries.len() == self.bins + 1
                    && self.boundaries.windows(2).all(|w| w[0] < w[1])
                    && (self.kind == BinKind::Linear || self.boundaries[0] > 0.0)
            }
        }
    }

    /// Bin of a numeric value.
    pub fn numeric_bin(&self, x: f64) -> usize {
        match self.kind {
            BinKind::Categorical | BinKind::Constant => 0,
            BinKind::Linear | BinKind::Logarithmic => {
                let above = self.boundaries.partition_point(|&b| b <= x);
                above.saturating_sub(1).min(self.bins - 1)
            }
        }
    }

    /// Human-readable bin label: the category, or an interval string.
    pub fn label(&self, bin: usize) -> String {
        match self.kind {
            BinKind::Categorical => self.categories[bin].clone(),
            BinKind::Constant => format!("[{}, {}]", short(self.boundaries[0]), short(self.boundaries[1])),
            BinKind::Linear | BinKind::Logarithmic => {
                let (lo, hi) = (short(self.boundaries[bin]), short(self.boundaries[bin + 1]));
                if bin + 1 == self.bins {
                    format!("[{lo}, {hi}]")
                } else {
                    format!("[{lo}, {hi})")
                }
            }
        }
    }
}

/// At most six decimals, trailing zeros trimmed.
fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// True when the range calls for logarithmic spacing.
pub fn use_log_scale(min: f64, max: f64) -> bool {
    max >= LOG_RATIO * min.max(EPS_POS)
}

/// Picks the bin layout for an attribute from its kind and observed range.
pub fn choose_binning(attr: &AttributeDef, stats: &AttributeRangeStats, d_default: usize) -> Result<BinSpec, BinError> {
    if attr.kind == AttributeKind::Categorical {
        return Ok(BinSpec::categorical(attr.domain.clone()));
    }
    if d_default == 0 {
        return Err(BinError::ZeroBins);
    }
    if stats.is_empty() {
        return Err(BinError::EmptyStats(attr.name.clone()));
    }
    let (min, max) = (stats.min, stats.max);
    if min == max {
        return Ok(BinSpec::constant(min));
    }
    if use_log_scale(min, max) {
        Ok(BinSpec::logarithmic(min.max(EPS_POS), max, d_default))
    } else {
        Ok(BinSpec::linear(min, max, d_default))
    }
}

/// Probability mass function over `d` bins, with the sample size it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    pub masses: Vec<f64>,
    pub n: usize,
}

impl DiscreteDistribution {
    pub fn new(masses: Vec<f64>, n: usize) -> Self {
        DiscreteDistribution { masses, n }
    }

    pub fn from_counts(counts: &[usize]) -> Self {
        let n: usize = counts.iter().sum();
        let masses = if n == 0 {
            vec![0.0; counts.len()]
        } else {
            counts.iter().map(|&c| c as f64 / n as f64).collect()
        };
        DiscreteDistribution { masses, n }
    }

    pub fn dim(&self) -> usize {
        self.masses.len()
    }

    /// Non-negative masses summing to 1 within `1e-9` (or all zero when `n == 0`).
    pub fn is_valid(&self) -> bool {
        if self.masses.iter().any(|&m| !(m >= 0.0)) {
            return false;
        }
        let total: f64 = self.masses.iter().sum();
        if self.n == 0 {
            total == 0.0 || (total - 1.0).abs() <= 1e-9
        } else {
            (total - 1.0).abs() <= 1e-9
        }
    }
}

/// Counts values per bin and normalizes by the vector length.
pub fn bin_and_normalize(values: &AttrVector, spec: &BinSpec) -> Result<DiscreteDistribution, BinError> {
    let mut counts = vec![0usize; spec.bins];
    match (values, spec.kind) {
        (AttrVector::Categorical(cats), BinKind::Categorical) => {
            for &c in cats {
                let slot = counts.get_mut(c as usize).ok_or(BinError::UnknownCategory { index: c, bins: spec.bins })?;
                *slot += 1;
            }
        }
        (AttrVector::Numeric(xs), BinKind::Linear | BinKind::Logarithmic | BinKind::Constant) => {
            for &x in xs {
                counts[spec.numeric_bin(x)] += 1;
            }
        }
        (AttrVector::Categorical(_), k) => {
            return Err(BinError::KindMismatch { vector: "categorical", spec: k.as_str() });
        }
        (AttrVector::Numeric(_), k) => {
            return Err(BinError::KindMismatch { vector: "numeric", spec: k.as_str() });
        }
    }
    Ok(DiscreteDistribution::from_counts(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn stats(min: f64, max: f64) -> AttributeRangeStats {
        AttributeRangeStats { attribute: "x".into(), kind: AttributeKind::Numerical, min, max, count: 2 }
    }

    fn five_stars() -> BinSpec {
        BinSpec::categorical((1..=5).map(|i| i.to_string()).collect())
    }

    #[test]
    fn categorical_identity_bins() {
        let attr = AttributeDef::categorical("stars", (1..=5).map(|i| i.to_string()).collect());
        let spec = choose_binning(&attr, &stats(0.0, 4.0), 20).unwrap();
        assert_eq!(spec.kind, BinKind::Categorical);
        assert_eq!(spec.bins, 5);
    }

    #[test]
    fn wide_iat_range_is_logarithmic() {
        let spec = choose_binning(&AttributeDef::temporal("ts"), &stats(1.0, 3.1e7), 20).unwrap();
        assert_eq!(spec.kind, BinKind::Logarithmic);
        assert_eq!(spec.bins, 20);
        assert_eq!(spec.boundaries[0], 1.0);
        assert_eq!(spec.boundaries[20], 3.1e7);
        assert!(spec.is_valid());
    }

    #[test]
    fn narrow_range_is_linear() {
        let spec = choose_binning(&AttributeDef::numerical("price"), &stats(50.0, 100.0), 20).unwrap();
        assert_eq!(spec.kind, BinKind::Linear);
        assert_eq!(spec.bins, 20);
        assert_eq!(spec.boundaries[0], 50.0);
        assert_eq!(spec.boundaries[20], 100.0);
    }

    #[test]
    fn identical_values_collapse() {
        let spec = choose_binning(&AttributeDef::numerical("price"), &stats(3.0, 3.0), 20).unwrap();
        assert_eq!(spec.kind, BinKind::Constant);
        assert_eq!(spec.bins, 1);
        let d = bin_and_normalize(&AttrVector::Numeric(vec![3.0, 3.0]), &spec).unwrap();
        assert_eq!(d.masses, vec![1.0]);
    }

    #[test]
    fn zero_lower_bound_clamps_to_eps() {
        let spec = choose_binning(&AttributeDef::temporal("ts"), &stats(0.0, 1000.0), 3).unwrap();
        assert_eq!(spec.kind, BinKind::Logarithmic);
        assert_eq!(spec.boundaries[0], EPS_POS);
        let d = bin_and_normalize(&AttrVector::Numeric(vec![0.0, 0.0, 0.5, 999.0]), &spec).unwrap();
        assert_eq!(d.masses, vec![0.75, 0.0, 0.25]);
    }

    #[test]
    fn star_histogram() {
        let d = bin_and_normalize(&AttrVector::Categorical(vec![4, 4, 0, 1, 4, 2]), &five_stars()).unwrap();
        assert_eq!(d.n, 6);
        assert_eq!(d.masses, vec![1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.0, 0.5]);
    }

    #[test]
    fn empty_vector() {
        let d = bin_and_normalize(&AttrVector::Categorical(vec![]), &five_stars()).unwrap();
        assert_eq!(d.n, 0);
        assert_eq!(d.masses, vec![0.0; 5]);
    }

    #[test]
    fn half_open_boundaries() {
        let spec = BinSpec {
            kind: BinKind::Logarithmic,
            bins: 2,
            boundaries: vec![1.0, 10.0, 100.0],
            categories: Vec::new(),
        };
        let d = bin_and_normalize(&AttrVector::Numeric(vec![1.0, 10.0, 100.0]), &spec).unwrap();
        assert_eq!(d.masses, vec![1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn unknown_category_and_kind_mismatch() {
        assert!(matches!(
            bin_and_normalize(&AttrVector::Categorical(vec![5]), &five_stars()),
            Err(BinError::UnknownCategory { index: 5, bins: 5 })
        ));
        assert!(matches!(
            bin_and_normalize(&AttrVector::Numeric(vec![1.0]), &five_stars()),
            Err(BinError::KindMismatch { .. })
        ));
    }

    #[test]
    fn interval_labels() {
        let spec = BinSpec::logarithmic(1.0, 100.0, 2);
        assert_eq!(spec.label(0), "[1, 10)");
        assert_eq!(spec.label(1), "[10, 100]");
        assert_eq!(five_stars().label(4), "5");
        assert_eq!(BinSpec::linear(0.0, 1.0, 3).label(0), "[0, 0.333333)");
    }

    proptest! {
        #[test]
        fn log_rule_matches_ratio(min in -1e3f64..1e6, span in 0.0f64..1e8) {
            let max = min + span;
            let spec = choose_binning(&AttributeDef::numerical("x"), &stats(min, max), 20).unwrap();
            let expect_log = max >= 10.0 * min.max(1.0);
            if min == max {
                prop_assert_eq!(spec.kind, BinKind::Constant);
            } else if expect_log {
                prop_assert_eq!(spec.kind, BinKind::Logarithmic);
            } else {
                prop_assert_eq!(spec.kind, BinKind::Linear);
            }
            prop_assert!(spec.is_valid());
        }

        #[test]
        fn masses_sum_to_one(xs in proptest::collection::vec(0.0f64..5e4, 1..200), d in 1usize..30) {
            let lo = xs.iter().cloned().fold(f64::MAX, f64::min);
            let hi = xs.iter().cloned().fold(f64::MIN, f64::max);
            let spec = choose_binning(&AttributeDef::numerical("x"), &stats(lo, hi), d).unwrap();
            let dist = bin_and_normalize(&AttrVector::Numeric(xs.clone()), &spec).unwrap();
            prop_assert_eq!(dist.n, xs.len());
            prop_assert!(dist.is_valid());
        }
    }
}
