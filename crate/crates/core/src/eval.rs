//! ROC construction, AUC, Youden-optimal thresholds and confusion-matrix
//! metrics for scored binary labels.
//!
//! The decision rule throughout is `score >= threshold` predicts positive.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::LabeledPair;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("ROC is undefined: need at least one positive and one negative (got {positives} positive, {negatives} negative)")]
    SingleClass { positives: usize, negatives: usize },
    #[error("score for pair {pair_id:?} is not a finite number")]
    NonFiniteScore { pair_id: String },
    #[error("pair {0:?} not found in the dataset")]
    UnknownPair(String),
    #[error("split fraction {0} must lie strictly between 0 and 1")]
    BadSplit(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredLabel {
    pub pair_id: String,
    pub score: f64,
    pub label: bool,
}

impl ScoredLabel {
    pub fn new(pair_id: impl Into<String>, score: f64, label: bool) -> Self {
        Self {
            pair_id: pair_id.into(),
            score,
            label,
        }
    }
}

/// One operating point: predicting positive for `score >= threshold`
/// yields `tp` true and `fp` false positives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub tp: usize,
    pub fp: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Starts at `(0, 0)` with an infinite threshold and ends at `(1, 1)`;
    /// one further point per distinct score, thresholds strictly decreasing.
    pub points: Vec<RocPoint>,
    pub positives: usize,
    pub negatives: usize,
}

impl RocPoint {
    /// Youden's J, `tp/P - fp/N`, rounded once from the exact rational so
    /// that equal operating points compare equal.
    fn youden(&self, positives: usize, negatives: usize) -> f64 {
        youden_key(self, positives, negatives) as f64 / (positives as f64 * negatives as f64)
    }
}

// J scaled by P*N, exact in integers.
fn youden_key(p: &RocPoint, positives: usize, negatives: usize) -> i128 {
    p.tp as i128 * negatives as i128 - p.fp as i128 * positives as i128
}

fn class_counts(data: &[ScoredLabel]) -> Result<(usize, usize), EvalError> {
    if let Some(bad) = data.iter().find(|d| !d.score.is_finite()) {
        return Err(EvalError::NonFiniteScore {
            pair_id: bad.pair_id.clone(),
        });
    }
    let positives = data.iter().filter(|d| d.label).count();
    let negatives = data.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass {
            positives,
            negatives,
        });
    }
    Ok((positives, negatives))
}

pub fn roc_curve(data: &[ScoredLabel]) -> Result<RocCurve, EvalError> {
    let (positives, negatives) = class_counts(data)?;
    let mut sorted: Vec<(f64, bool)> = data.iter().map(|d| (d.score, d.label)).collect();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let point = |threshold, tp: usize, fp: usize| RocPoint {
        threshold,
        tpr: tp as f64 / positives as f64,
        fpr: fp as f64 / negatives as f64,
        tp,
        fp,
    };
    let mut points = vec![point(f64::INFINITY, 0, 0)];
    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        // -0.0 and 0.0 are one score
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(point(threshold, tp, fp));
    }
    Ok(RocCurve {
        points,
        positives,
        negatives,
    })
}

/// Trapezoidal area under the curve.
///
/// Accumulated in integers (each trapezoid is `dfp * (tp_prev + tp) / 2`
/// in count units) and divided once, so it agrees with the pairwise
/// ranking probability with half-credit ties.
pub fn auc(curve: &RocCurve) -> f64 {
    let twice_area: u128 = curve
        .points
        .windows(2)
        .map(|w| (w[1].fp - w[0].fp) as u128 * (w[0].tp + w[1].tp) as u128)
        .sum();
    twice_area as f64 / (2.0 * curve.positives as f64 * curve.negatives as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoudenChoice {
    pub threshold: f64,
    pub j: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

/// Threshold maximizing `sensitivity + specificity - 1` over the distinct
/// scores. Ties go to the higher sensitivity, then to the lower threshold.
pub fn youden_threshold(curve: &RocCurve) -> YoudenChoice {
    let (p, n) = (curve.positives, curve.negatives);
    let best = curve
        .points
        .iter()
        .filter(|pt| pt.threshold.is_finite())
        .max_by(|a, b| {
            youden_key(a, p, n)
                .cmp(&youden_key(b, p, n))
                .then(a.tp.cmp(&b.tp))
                .then(b.threshold.total_cmp(&a.threshold))
        })
        .expect("a valid curve has at least one finite threshold");
    YoudenChoice {
        threshold: best.threshold,
        j: best.youden(p, n),
        sensitivity: best.tpr,
        specificity: 1.0 - best.fpr,
    }
}

/// Table-style metrics at a fixed threshold. All rates are in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub threshold: f64,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub auc: f64,
    pub precision: f64,
    pub f_score: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// No positive predictions: precision is reported as 0.
    pub precision_undefined: bool,
}

impl MetricsReport {
    pub fn from_counts(threshold: f64, auc: f64, tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision_undefined = tp + fp == 0;
        let precision = ratio(tp, tp + fp);
        let sensitivity = ratio(tp, tp + fn_);
        let f_score = if precision + sensitivity == 0.0 {
            0.0
        } else {
            2.0 * precision * sensitivity / (precision + sensitivity)
        };
        Self {
            threshold,
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
            sensitivity,
            specificity: ratio(tn, tn + fp),
            auc,
            precision,
            f_score,
            tp,
            fp,
            tn,
            fn_,
            precision_undefined,
        }
    }
}

pub fn metrics_at(data: &[ScoredLabel], threshold: f64) -> Result<MetricsReport, EvalError> {
    let area = auc(&roc_curve(data)?);
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for d in data {
        match (d.score >= threshold, d.label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(MetricsReport::from_counts(threshold, area, tp, fp, tn, fn_))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Misclassification {
    pub pair_id: String,
    pub text_a: String,
    pub text_b: String,
    pub true_label: bool,
    pub predicted_label: bool,
    pub score: f64,
}

/// Every pair on the wrong side of `threshold`, most confident mistakes
/// first (largest `|score - threshold|`), then by pair id.
pub fn misclassifications(
    data: &[ScoredLabel],
    pairs: &HashMap<&str, &LabeledPair>,
    threshold: f64,
) -> Result<Vec<Misclassification>, EvalError> {
    let mut out = Vec::new();
    for d in data {
        let predicted = d.score >= threshold;
        if predicted == d.label {
            continue;
        }
        let pair = pairs
            .get(d.pair_id.as_str())
            .ok_or_else(|| EvalError::UnknownPair(d.pair_id.clone()))?;
        out.push(Misclassification {
            pair_id: d.pair_id.clone(),
            text_a: pair.text_a.clone(),
            text_b: pair.text_b.clone(),
            true_label: d.label,
            predicted_label: predicted,
            score: d.score,
        });
    }
    out.sort_by(|a, b| {
        let da = (a.score - threshold).abs();
        let db = (b.score - threshold).abs();
        db.total_cmp(&da)
            .then_with(|| crate::ingest::compare_pair_ids(&a.pair_id, &b.pair_id))
    });
    Ok(out)
}

/// Deterministic held-out split: shuffles with a seeded ChaCha stream and
/// puts the first `tune_fraction` of items in the tuning set.
pub fn split_holdout<T: Clone>(
    items: &[T],
    tune_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>), EvalError> {
    if !(tune_fraction > 0.0 && tune_fraction < 1.0) {
        return Err(EvalError::BadSplit(tune_fraction));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (items.len() as f64 * tune_fraction).round() as usize;
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<_>>();
    Ok((pick(&order[..cut]), pick(&order[cut..])))
}
