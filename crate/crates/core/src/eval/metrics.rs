//! Point metrics and precision-recall curves.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Confusion-matrix counts at one decision threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl ConfusionCounts {
    pub fn from_predictions(y_true: &[bool], y_pred: &[bool]) -> Result<Self, EvalError> {
        if y_true.len() != y_pred.len() {
            return Err(EvalError::LengthMismatch {
                left: y_true.len(),
                right: y_pred.len(),
            });
        }
        let mut counts = ConfusionCounts::default();
        for (&truth, &pred) in y_true.iter().zip(y_pred) {
            match (truth, pred) {
                (true, true) => counts.true_pos += 1,
                (false, true) => counts.false_pos += 1,
                (true, false) => counts.false_neg += 1,
                (false, false) => counts.true_neg += 1,
            }
        }
        Ok(counts)
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

/// Precision, recall, and their harmonic mean, with the 0/0 -> 0 convention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsResult {
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

fn ratio(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn fscore(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

impl MetricsResult {
    pub fn from_counts(counts: &ConfusionCounts) -> Self {
        let precision = ratio(counts.true_pos, counts.true_pos + counts.false_pos);
        let recall = ratio(counts.true_pos, counts.true_pos + counts.false_neg);
        MetricsResult {
            precision,
            recall,
            fscore: fscore(precision, recall),
        }
    }

    pub fn from_precision_recall(precision: f64, recall: f64) -> Self {
        MetricsResult {
            precision,
            recall,
            fscore: fscore(precision, recall),
        }
    }
}

/// Precision, recall, and F-score of a prediction vector.
pub fn point_metrics(y_true: &[bool], y_pred: &[bool]) -> Result<MetricsResult, EvalError> {
    Ok(MetricsResult::from_counts(
        &ConfusionCounts::from_predictions(y_true, y_pred)?,
    ))
}

/// One PR-curve point: predictions are positive at `score >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// A precision-recall curve swept over every distinct score, descending,
/// plus the recall-weighted average precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub average_precision: f64,
}

impl PrCurve {
    /// CSV export with one `threshold,precision,recall` row per point.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), std::io::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["threshold", "precision", "recall"])?;
        for p in &self.points {
            w.write_record([
                p.threshold.to_string(),
                p.precision.to_string(),
                p.recall.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Sweep thresholds at each distinct score (descending) and accumulate
/// average precision as `sum (R_i - R_{i-1}) * P_i`.
pub fn pr_curve(y_true: &[bool], scores: &[f64]) -> Result<PrCurve, EvalError> {
    if y_true.len() != scores.len() {
        return Err(EvalError::LengthMismatch {
            left: y_true.len(),
            right: scores.len(),
        });
    }
    if let Some(bad) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore(bad));
    }
    let total_pos = y_true.iter().filter(|&&v| v).count();
    if total_pos == 0 {
        return Err(EvalError::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut points = Vec::new();
    let mut average_precision = 0.0;
    let mut previous_recall = 0.0;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut index = 0;
    while index < order.len() {
        let threshold = scores[order[index]];
        // All rows tied at this score flip together.
        while index < order.len() && scores[order[index]] == threshold {
            if y_true[order[index]] {
                tp += 1;
            } else {
                fp += 1;
            }
            index += 1;
        }
        let precision = tp as f64 / (tp + fp) as f64;
        let recall = tp as f64 / total_pos as f64;
        average_precision += (recall - previous_recall) * precision;
        previous_recall = recall;
        points.push(PrPoint {
            threshold,
            precision,
            recall,
        });
    }
    Ok(PrCurve {
        points,
        average_precision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_metrics_basic_counts() {
        // tp=3, fp=1, fn=1 -> precision 0.75, recall 0.75, F 0.75
        let y_true = vec![true, true, true, true, false, false];
        let y_pred = vec![true, true, true, false, true, false];
        let m = point_metrics(&y_true, &y_pred).unwrap();
        assert_eq!(m.precision, 0.75);
        assert_eq!(m.recall, 0.75);
        assert_eq!(m.fscore, 0.75);
    }

    #[test]
    fn fscore_matches_published_row() {
        // A published baseline row: P=0.2075, R=0.7053 prints F 0.3199.
        let f = fscore(0.2075, 0.7053);
        assert!((f - 0.3199).abs() < 0.01);
        assert!((f - 0.320661).abs() < 1e-4);
    }

    #[test]
    fn all_zero_convention() {
        let m = point_metrics(&[false, false], &[false, false]).unwrap();
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.fscore, 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(point_metrics(&[true], &[true, false]).is_err());
    }

    #[test]
    fn confusion_counts_sum_to_n() {
        let y_true = vec![true, false, true, false, true];
        let y_pred = vec![true, true, false, false, true];
        let c = ConfusionCounts::from_predictions(&y_true, &y_pred).unwrap();
        assert_eq!(c.total(), 5);
        assert_eq!(c.true_pos, 2);
        assert_eq!(c.false_pos, 1);
        assert_eq!(c.false_neg, 1);
        assert_eq!(c.true_neg, 1);
    }

    #[test]
    fn hand_enumerated_curve() {
        // scores {0.9, 0.8, 0.3}, labels {+, -, +}:
        // (P=1, R=0.5), (P=0.5, R=0.5), (P=2/3, R=1); AP = 5/6.
        let curve = pr_curve(&[true, false, true], &[0.9, 0.8, 0.3]).unwrap();
        assert_eq!(curve.points.len(), 3);
        assert_eq!(curve.points[0].precision, 1.0);
        assert_eq!(curve.points[0].recall, 0.5);
        assert_eq!(curve.points[1].precision, 0.5);
        assert_eq!(curve.points[1].recall, 0.5);
        assert!((curve.points[2].precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(curve.points[2].recall, 1.0);
        assert!((curve.average_precision - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_ranking_has_ap_one() {
        let curve = pr_curve(&[true, true, false, false], &[0.9, 0.8, 0.2, 0.1]).unwrap();
        assert_eq!(curve.average_precision, 1.0);
    }

    #[test]
    fn tied_scores_collapse_to_one_point() {
        let curve = pr_curve(&[true, false, false, true], &[0.3, 0.3, 0.3, 0.3]).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.points[0].precision, 0.5); // prevalence
        assert_eq!(curve.points[0].recall, 1.0);
        assert_eq!(curve.average_precision, 0.5);
    }

    #[test]
    fn zero_positives_is_an_error() {
        assert_eq!(
            pr_curve(&[false, false], &[0.1, 0.2]),
            Err(EvalError::NoPositives)
        );
    }

    #[test]
    fn recall_is_monotone_down_the_curve() {
        let y = vec![true, false, true, false, true, false, false, true];
        let s = vec![0.9, 0.85, 0.7, 0.6, 0.55, 0.4, 0.3, 0.1];
        let curve = pr_curve(&y, &s).unwrap();
        for pair in curve.points.windows(2) {
            assert!(pair[1].recall >= pair[0].recall);
            assert!(pair[1].threshold < pair[0].threshold);
        }
    }

    proptest! {
        // The curve depends only on the score ranking: any strictly
        // monotone transform leaves it unchanged (thresholds aside).
        #[test]
        fn curve_invariant_under_monotone_transform(
            labels in proptest::collection::vec(any::<bool>(), 2..20),
            raw in proptest::collection::vec(0.0f64..1.0, 2..20),
        ) {
            let n = labels.len().min(raw.len());
            let labels = &labels[..n];
            let scores = &raw[..n];
            prop_assume!(labels.iter().any(|&v| v));
            let a = pr_curve(labels, scores).unwrap();
            let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp()).collect();
            let b = pr_curve(labels, &transformed).unwrap();
            prop_assert_eq!(a.points.len(), b.points.len());
            for (pa, pb) in a.points.iter().zip(&b.points) {
                prop_assert!((pa.precision - pb.precision).abs() < 1e-12);
                prop_assert!((pa.recall - pb.recall).abs() < 1e-12);
            }
            prop_assert!((a.average_precision - b.average_precision).abs() < 1e-12);
        }

        // F always satisfies the harmonic-mean identity.
        #[test]
        fn fscore_identity(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
            let f = fscore(p, r);
            if p + r > 0.0 {
                prop_assert!((f * (p + r) - 2.0 * p * r).abs() < 1e-12);
            } else {
                prop_assert_eq!(f, 0.0);
            }
        }
    }

    #[test]
    fn csv_export_has_one_row_per_point() {
        let curve = pr_curve(&[true, false, true], &[0.9, 0.8, 0.3]).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("threshold,precision,recall\n"));
    }
}
