//! Variables Stability Index (VSI) and Coefficients Stability Index (CSI).
//!
//! Both indices compare `m` surrogates fitted at the same point on
//! independent perturbation batches, pair by pair:
//!
//! * VSI averages `|Fα ∩ Fβ| / p` over all model pairs.
//! * CSI, per feature, takes the 95% intervals of every model that selected
//!   it and counts the fraction of interval pairs that intersect (the
//!   partial index); CSI is the mean partial index.
//!
//! Intervals are closed: touching endpoints count as overlap. Features seen
//! by fewer than two models have no pairs and are reported as excluded.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::NumericError;
use crate::model::LocalModel;
use crate::wridge::ConfidenceInterval;

/// `m >= 2` surrogates sharing the same support size `p`.
#[derive(Debug, Clone, Copy)]
pub struct ModelEnsemble<'a> {
    models: &'a [LocalModel],
    p: usize,
}

impl<'a> ModelEnsemble<'a> {
    pub fn new(models: &'a [LocalModel]) -> Result<Self, NumericError> {
        if models.len() < 2 {
            return Err(NumericError::Ensemble(format!(
                "need at least 2 models, got {}",
                models.len()
            )));
        }
        let p = models[0].coefficients.len();
        if p == 0 {
            return Err(NumericError::Ensemble("models have empty support".into()));
        }
        for (i, m) in models.iter().enumerate() {
            if m.coefficients.len() != p {
                return Err(NumericError::Ensemble(format!(
                    "model {i} has {} coefficients, expected {p}",
                    m.coefficients.len()
                )));
            }
            if !m.coefficients.keys().eq(m.coef_variances.keys()) {
                return Err(NumericError::Ensemble(format!(
                    "model {i}: variance keys differ from coefficient keys"
                )));
            }
        }
        Ok(Self { models, p })
    }

    pub fn models(&self) -> &'a [LocalModel] {
        self.models
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.models.len()
    }
}

pub fn concordance(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> usize {
    a.intersection(b).count()
}

/// Mean pairwise concordance over `p`, as a percentage.
pub fn vsi(ensemble: &ModelEnsemble<'_>) -> f64 {
    let supports: Vec<BTreeSet<usize>> = ensemble
        .models()
        .iter()
        .map(|g| g.support().collect())
        .collect();
    // integer accumulation: the result is the correctly rounded ratio,
    // independent of pair order
    let mut shared = 0usize;
    let mut pairs = 0usize;
    for (i, a) in supports.iter().enumerate() {
        for b in &supports[i + 1..] {
            shared += concordance(a, b);
            pairs += 1;
        }
    }
    100.0 * shared as f64 / (pairs * ensemble.p()) as f64
}

pub fn overlap(a: &ConfidenceInterval, b: &ConfidenceInterval) -> bool {
    a.lower.max(b.lower) <= a.upper.min(b.upper)
}

/// The intervals of one feature, one per model that selected it.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    pub feature_index: usize,
    pub intervals: Vec<ConfidenceInterval>,
}

/// Fraction of overlapping interval pairs; `None` with fewer than two
/// intervals.
pub fn partial_index(set: &IntervalSet) -> Option<f64> {
    let k = set.intervals.len();
    if k < 2 {
        return None;
    }
    let mut hits = 0usize;
    for (i, a) in set.intervals.iter().enumerate() {
        for b in &set.intervals[i + 1..] {
            if overlap(a, b) {
                hits += 1;
            }
        }
    }
    let pairs = k * (k - 1) / 2;
    Some(hits as f64 / pairs as f64)
}

/// Interval sets for every feature selected by at least one model,
/// ascending by feature index.
pub fn interval_sets(ensemble: &ModelEnsemble<'_>) -> Result<Vec<IntervalSet>, NumericError> {
    let mut by_feature: BTreeMap<usize, Vec<ConfidenceInterval>> = BTreeMap::new();
    for g in ensemble.models() {
        for feature in g.support() {
            let ci = g.conf_int(feature).expect("feature in support")?;
            by_feature.entry(feature).or_default().push(ci);
        }
    }
    Ok(by_feature
        .into_iter()
        .map(|(feature_index, intervals)| IntervalSet {
            feature_index,
            intervals,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsiResult {
    /// Percentage in `[0, 100]`.
    pub csi: f64,
    pub par: BTreeMap<usize, f64>,
    pub excluded_features: Vec<usize>,
}

pub fn csi(ensemble: &ModelEnsemble<'_>) -> Result<CsiResult, NumericError> {
    let mut par = BTreeMap::new();
    let mut excluded_features = Vec::new();
    for set in interval_sets(ensemble)? {
        match partial_index(&set) {
            Some(v) => {
                par.insert(set.feature_index, v);
            }
            None => excluded_features.push(set.feature_index),
        }
    }
    if par.is_empty() {
        return Err(NumericError::CsiUndefined);
    }
    let csi = 100.0 * par.values().sum::<f64>() / par.len() as f64;
    Ok(CsiResult {
        csi,
        par,
        excluded_features,
    })
}
