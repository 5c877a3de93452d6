//! Imbalance-aware evaluation battery: threshold metrics off the confusion
//! matrix, rank-based AUC, probabilistic scores, and per-match cumulative-xG
//! mean absolute error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("probability and label vectors differ in length or are empty")]
    LengthMismatch,
    #[error("AUC requires both classes to be present")]
    SingleClass,
    #[error("metric input is empty")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Threshold rule: predicted positive iff `prob >= threshold` (goal = positive).
pub fn confusion_at_threshold(
    probs: &[f64],
    labels: &[u8],
    threshold: f64,
) -> Result<ConfusionMatrix, MetricError> {
    if probs.len() != labels.len() || probs.is_empty() {
        return Err(MetricError::LengthMismatch);
    }
    let mut cm = ConfusionMatrix {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (&p, &y) in probs.iter().zip(labels) {
        match (p >= threshold, y == 1) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub mcc: f64,
    /// Names of metrics whose denominator was zero (value reported as 0).
    pub degenerate: Vec<String>,
}

/// Standard confusion-matrix metrics. A zero denominator yields 0 and a
/// flag rather than an error, so metric sweeps never abort mid-run.
pub fn threshold_metrics(cm: &ConfusionMatrix) -> ThresholdMetrics {
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let mut degenerate = Vec::new();
    let mut ratio = |name: &'static str, num: f64, den: f64| {
        if den == 0.0 {
            degenerate.push(name.to_string());
            0.0
        } else {
            num / den
        }
    };

    let recall = ratio("recall", tp, tp + fn_);
    let precision = ratio("precision", tp, tp + fp);
    let f1 = ratio("f1", 2.0 * precision * recall, precision + recall);
    let accuracy = ratio("accuracy", tp + tn, tp + fp + fn_ + tn);
    let tnr = ratio("balanced_accuracy", tn, tn + fp);
    let balanced_accuracy = (recall + tnr) / 2.0;
    let mcc_den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    let mcc = ratio("mcc", tp * tn - fp * fn_, mcc_den);

    ThresholdMetrics {
        recall,
        precision,
        f1,
        accuracy,
        balanced_accuracy,
        mcc,
        degenerate,
    }
}

/// Mann-Whitney concordance AUC via rank sums, O(n log n). Ties between a
/// positive and a negative score count one half.
pub fn auc(probs: &[f64], labels: &[u8]) -> Result<f64, MetricError> {
    if probs.len() != labels.len() || probs.is_empty() {
        return Err(MetricError::LengthMismatch);
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricError::SingleClass);
    }

    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[a].partial_cmp(&probs[b]).expect("no NaN probs"));

    // average ranks over tie groups, 1-based
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && probs[order[j + 1]] == probs[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if labels[k] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Mean squared probability error.
pub fn brier(probs: &[f64], labels: &[u8]) -> Result<f64, MetricError> {
    if probs.len() != labels.len() || probs.is_empty() {
        return Err(MetricError::LengthMismatch);
    }
    Ok(probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| (p - f64::from(y)).powi(2))
        .sum::<f64>()
        / probs.len() as f64)
}

pub fn log_loss(probs: &[f64], labels: &[u8], eps: f64) -> Result<f64, MetricError> {
    if probs.len() != labels.len() || probs.is_empty() {
        return Err(MetricError::LengthMismatch);
    }
    Ok(probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(eps, 1.0 - eps);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / probs.len() as f64)
}

/// Per-group cumulative-xG error: for each (match, team) group,
/// `|sum(probs) - sum(labels)|`, averaged over groups. This is a documented
/// interpretation of the table's "MAE" column (no definition is published).
pub fn match_mae<'a, I>(shots: I) -> Result<f64, MetricError>
where
    I: IntoIterator<Item = (&'a str, &'a str, f64, u8)>, // (match_id, team, prob, status)
{
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(String, String), (f64, f64)> = BTreeMap::new();
    for (match_id, team, prob, status) in shots {
        let e = groups
            .entry((match_id.to_string(), team.to_string()))
            .or_insert((0.0, 0.0));
        e.0 += prob;
        e.1 += f64::from(status);
    }
    if groups.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(groups.values().map(|(xg, goals)| (xg - goals).abs()).sum::<f64>() / groups.len() as f64)
}

/// Everything Table-style reports need for one (model, sampling) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub auc: f64,
    pub mcc: f64,
    pub brier: f64,
    pub log_loss: f64,
    pub balanced_accuracy: f64,
    pub mae: Option<f64>,
    pub threshold: f64,
    pub n: usize,
    pub degenerate: Vec<String>,
}

pub fn metric_report(
    probs: &[f64],
    labels: &[u8],
    threshold: f64,
    mae: Option<f64>,
) -> Result<MetricReport, MetricError> {
    let cm = confusion_at_threshold(probs, labels, threshold)?;
    let tm = threshold_metrics(&cm);
    Ok(MetricReport {
        recall: tm.recall,
        precision: tm.precision,
        f1: tm.f1,
        accuracy: tm.accuracy,
        auc: auc(probs, labels)?,
        mcc: tm.mcc,
        brier: brier(probs, labels)?,
        log_loss: log_loss(probs, labels, 1e-15)?,
        balanced_accuracy: tm.balanced_accuracy,
        mae,
        threshold,
        n: probs.len(),
        degenerate: tm.degenerate.iter().map(|s| s.to_string()).collect(),
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn confusion_simple_and_boundary() {
        let cm = confusion_at_threshold(&[0.9, 0.1], &[1, 0], 0.5).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fp: 0,
                fn_: 0,
                tn: 1
            }
        );
        // all probs equal to the threshold: all predicted positive
        let cm = confusion_at_threshold(&[0.5, 0.5, 0.5], &[1, 0, 1], 0.5).unwrap();
        assert_eq!(cm.tp + cm.fp, 3);
    }

    #[test]
    fn perfect_matrix_is_all_ones() {
        let tm = threshold_metrics(&ConfusionMatrix {
            tp: 7,
            fp: 0,
            fn_: 0,
            tn: 13,
        });
        for v in [tm.recall, tm.precision, tm.f1, tm.accuracy, tm.balanced_accuracy, tm.mcc] {
            assert_eq!(v, 1.0);
        }
        assert!(tm.degenerate.is_empty());
    }

    #[test]
    fn hand_arithmetic_case() {
        let tm = threshold_metrics(&ConfusionMatrix {
            tp: 3,
            fp: 1,
            fn_: 1,
            tn: 5,
        });
        assert!((tm.precision - 0.75).abs() < 1e-15);
        assert!((tm.recall - 0.75).abs() < 1e-15);
        assert!((tm.accuracy - 0.8).abs() < 1e-15);
        assert!((tm.balanced_accuracy - (0.75 + 5.0 / 6.0) / 2.0).abs() < 1e-12);
        let mcc_oracle = (3.0 * 5.0 - 1.0) / (4.0f64 * 4.0 * 6.0 * 6.0).sqrt();
        assert!((tm.mcc - mcc_oracle).abs() < 1e-12);
        assert!((tm.mcc - 0.5833333333333334).abs() < 1e-12);
    }

    #[test]
    fn published_best_row_is_internally_consistent() {
        // A confusion matrix reproducing the reported triple
        // (recall 0.955, precision 0.921) must also reproduce the reported
        // F1 / accuracy / MCC / balanced accuracy under these formulas.
        let cm = ConfusionMatrix {
            tp: 955,
            fp: 82,
            fn_: 45,
            tn: 930,
        };
        let tm = threshold_metrics(&cm);
        assert!((tm.recall - 0.955).abs() < 1.5e-3);
        assert!((tm.precision - 0.921).abs() < 1.5e-3);
        assert!((tm.f1 - 0.938).abs() < 1.5e-3);
        assert!((tm.accuracy - 0.937).abs() < 1.5e-3);
        assert!((tm.mcc - 0.874).abs() < 1.5e-3);
        assert!((tm.balanced_accuracy - 0.937).abs() < 1.5e-3);
    }

    #[test]
    fn degenerate_metrics_flag_instead_of_error() {
        let tm = threshold_metrics(&ConfusionMatrix {
            tp: 0,
            fp: 0,
            fn_: 5,
            tn: 5,
        });
        assert_eq!(tm.precision, 0.0);
        assert!(tm.degenerate.iter().any(|d| d == "precision"));
    }

    #[test]
    fn scaling_the_matrix_changes_nothing() {
        let a = threshold_metrics(&ConfusionMatrix {
            tp: 3,
            fp: 1,
            fn_: 2,
            tn: 4,
        });
        let b = threshold_metrics(&ConfusionMatrix {
            tp: 21,
            fp: 7,
            fn_: 14,
            tn: 28,
        });
        assert!((a.mcc - b.mcc).abs() < 1e-12);
        assert!((a.f1 - b.f1).abs() < 1e-12);
        assert!((a.balanced_accuracy - b.balanced_accuracy).abs() < 1e-12);
    }

    #[test]
    fn auc_four_pair_enumeration() {
        let probs = [0.9, 0.4, 0.5, 0.1];
        let labels = [1, 1, 0, 0];
        assert_eq!(auc(&probs, &labels).unwrap(), 0.75);
        assert_eq!(oracle::auc_pairs(&probs, &labels), 0.75);
    }

    #[test]
    fn auc_edges() {
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3, 0.3, 0.3], &[1, 0, 1]).unwrap(), 0.5);
        assert_eq!(auc(&[0.1, 0.2], &[1, 1]), Err(MetricError::SingleClass));
    }

    #[test]
    fn brier_and_log_loss_analytic() {
        let half = [0.5, 0.5, 0.5, 0.5];
        let labels = [1, 0, 1, 0];
        assert!((brier(&half, &labels).unwrap() - 0.25).abs() < 1e-15);
        assert!((log_loss(&half, &labels, 1e-15).unwrap() - 2.0f64.ln()).abs() < 1e-15);
        let hard = [1.0, 0.0];
        let y = [1, 0];
        assert_eq!(brier(&hard, &y).unwrap(), 0.0);
        assert!(log_loss(&hard, &y, 1e-15).unwrap() < 1e-14);
    }

    #[test]
    fn match_mae_cases() {
        // one team, three shots, one actual goal
        let shots = vec![
            ("m1", "A", 0.5, 0u8),
            ("m1", "A", 0.2, 1u8),
            ("m1", "A", 0.05, 0u8),
        ];
        let mae = match_mae(shots.iter().map(|&(m, t, p, s)| (m, t, p, s))).unwrap();
        assert!((mae - 0.25).abs() < 1e-12);

        // probs equal labels exactly
        let exact = vec![("m1", "A", 1.0, 1u8), ("m1", "A", 0.0, 0u8)];
        assert_eq!(match_mae(exact.iter().map(|&(m, t, p, s)| (m, t, p, s))).unwrap(), 0.0);

        // groups with errors 1 and 3 average to 2
        let two = vec![("m1", "A", 0.0, 1u8), ("m2", "B", 3.0, 0u8)];
        assert!((match_mae(two.iter().map(|&(m, t, p, s)| (m, t, p, s))).unwrap() - 2.0).abs() < 1e-12);

        assert_eq!(match_mae(std::iter::empty()), Err(MetricError::EmptyInput));
    }

    #[test]
    fn constant_predictor_scores_minimized_at_base_rate() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i < 30)).collect();
        let base = 0.3;
        let score_at = |c: f64| {
            let probs = vec![c; 100];
            (
                brier(&probs, &labels).unwrap(),
                log_loss(&probs, &labels, 1e-15).unwrap(),
            )
        };
        let (b0, l0) = score_at(base);
        for c in (1..100).map(|i| i as f64 / 100.0) {
            let (b, l) = score_at(c);
            assert!(b >= b0 - 1e-12);
            assert!(l >= l0 - 1e-12);
        }
    }

    proptest! {
        #[test]
        fn metrics_match_naive_oracles(
            data in proptest::collection::vec((0.0f64..=1.0, 0u8..=1), 2..200),
            threshold in 0.05f64..0.95,
        ) {
            let probs: Vec<f64> = data.iter().map(|d| d.0).collect();
            let labels: Vec<u8> = data.iter().map(|d| d.1).collect();
            let cm = confusion_at_threshold(&probs, &labels, threshold).unwrap();
            let (tp, fp, fn_, tn) = oracle::confusion_loop(&probs, &labels, threshold);
            prop_assert_eq!((cm.tp, cm.fp, cm.fn_, cm.tn), (tp, fp, fn_, tn));
            prop_assert!((brier(&probs, &labels).unwrap() - oracle::brier_loop(&probs, &labels)).abs() < 1e-12);
            prop_assert!((log_loss(&probs, &labels, 1e-15).unwrap() - oracle::log_loss_loop(&probs, &labels)).abs() < 1e-12);
            let n_pos = labels.iter().filter(|&&y| y == 1).count();
            if n_pos > 0 && n_pos < labels.len() {
                prop_assert!((auc(&probs, &labels).unwrap() - oracle::auc_pairs(&probs, &labels)).abs() < 1e-12);
            }
        }

        #[test]
        fn auc_invariant_under_monotone_transform(
            data in proptest::collection::vec((0.01f64..=0.99, 0u8..=1), 4..100),
        ) {
            let probs: Vec<f64> = data.iter().map(|d| d.0).collect();
            let labels: Vec<u8> = data.iter().map(|d| d.1).collect();
            let n_pos = labels.iter().filter(|&&y| y == 1).count();
            prop_assume!(n_pos > 0 && n_pos < labels.len());
            let a = auc(&probs, &labels).unwrap();
            let squashed: Vec<f64> = probs.iter().map(|p| (p * 3.0).tanh()).collect();
            let b = auc(&squashed, &labels).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn mcc_antisymmetric_under_joint_flip(
            data in proptest::collection::vec((0.0f64..=1.0, 0u8..=1), 4..100),
        ) {
            let probs: Vec<f64> = data.iter().map(|d| d.0).collect();
            let labels: Vec<u8> = data.iter().map(|d| d.1).collect();
            let cm = confusion_at_threshold(&probs, &labels, 0.5).unwrap();
            // flip labels, keep predictions: tp <-> fp, fn <-> tn
            let flipped = ConfusionMatrix { tp: cm.fp, fp: cm.tp, fn_: cm.tn, tn: cm.fn_ };
            let a = threshold_metrics(&cm);
            let b = threshold_metrics(&flipped);
            if a.degenerate.is_empty() && b.degenerate.is_empty() {
                prop_assert!((a.mcc + b.mcc).abs() < 1e-12);
            }
            // relabel both classes simultaneously: accuracy invariant
            let relabeled = ConfusionMatrix { tp: cm.tn, fp: cm.fn_, fn_: cm.fp, tn: cm.tp };
            let c = threshold_metrics(&relabeled);
            prop_assert!((a.accuracy - c.accuracy).abs() < 1e-12);
        }
    }
}
