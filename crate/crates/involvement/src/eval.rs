//! Evaluation metrics: per-dimension MAE/MSE/RMSE and thresholded
//! accuracy, a threshold sweep, and accuracy-focused evaluation on
//! binary-label datasets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("predictions and labels have different lengths: {preds} vs {labels}")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("empty evaluation set")]
    Empty,
    #[error("label {value} at sentence {index} is not exactly 0 or 1")]
    NonBinaryLabels { index: usize, value: f64 },
}

pub const DIMENSIONS: [&str; 3] = ["lex", "gram", "syn"];

/// Binarization rule shared by every metric: `value >= threshold` maps to
/// 1, so exact ties go to 1.
pub fn binarize(value: f64, threshold: f64) -> u8 {
    u8::from(value >= threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionMetrics {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_dimension: [DimensionMetrics; 3],
    pub mean: DimensionMetrics,
    pub n_sentences: usize,
    pub threshold: f64,
}

/// MAE/MSE/RMSE and accuracy per dimension plus the mean across the three
/// dimensions. Both predictions and labels are binarized at the threshold
/// for accuracy.
pub fn regression_metrics(
    preds: &[[f64; 3]],
    labels: &[[f64; 3]],
    threshold: f64,
) -> Result<MetricReport, EvalError> {
    if preds.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = preds.len() as f64;
    let mut per_dimension = [DimensionMetrics {
        mae: 0.0,
        mse: 0.0,
        rmse: 0.0,
        accuracy: 0.0,
    }; 3];
    for (d, metric) in per_dimension.iter_mut().enumerate() {
        let mut abs = 0.0;
        let mut sq = 0.0;
        let mut correct = 0usize;
        for (p, y) in preds.iter().zip(labels) {
            let e = p[d] - y[d];
            abs += e.abs();
            sq += e * e;
            if binarize(p[d], threshold) == binarize(y[d], threshold) {
                correct += 1;
            }
        }
        metric.mae = abs / n;
        metric.mse = sq / n;
        metric.rmse = metric.mse.sqrt();
        metric.accuracy = correct as f64 / n;
    }
    let mean = DimensionMetrics {
        mae: per_dimension.iter().map(|m| m.mae).sum::<f64>() / 3.0,
        mse: per_dimension.iter().map(|m| m.mse).sum::<f64>() / 3.0,
        rmse: per_dimension.iter().map(|m| m.rmse).sum::<f64>() / 3.0,
        accuracy: per_dimension.iter().map(|m| m.accuracy).sum::<f64>() / 3.0,
    };
    let report = MetricReport {
        per_dimension,
        mean,
        n_sentences: preds.len(),
        threshold,
    };
    for m in &report.per_dimension {
        debug_assert!((m.rmse - m.mse.sqrt()).abs() < 1e-12);
        debug_assert!(m.mae <= m.rmse + 1e-12, "MAE {} > RMSE {}", m.mae, m.rmse);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub accuracy: [f64; 3],
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSweep {
    pub rows: Vec<SweepRow>,
}

impl ThresholdSweep {
    /// `threshold,lex,gram,syn,mean` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,accuracy_lex,accuracy_gram,accuracy_syn,accuracy_mean\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.threshold,
                row.accuracy[0],
                row.accuracy[1],
                row.accuracy[2],
                row.mean_accuracy
            ));
        }
        out
    }

    /// Plot-ready series: x thresholds, one y series per dimension plus
    /// the mean.
    pub fn to_plot_json(&self) -> serde_json::Value {
        serde_json::json!({
            "x": self.rows.iter().map(|r| r.threshold).collect::<Vec<f64>>(),
            "series": {
                "lex": self.rows.iter().map(|r| r.accuracy[0]).collect::<Vec<f64>>(),
                "gram": self.rows.iter().map(|r| r.accuracy[1]).collect::<Vec<f64>>(),
                "syn": self.rows.iter().map(|r| r.accuracy[2]).collect::<Vec<f64>>(),
                "mean": self.rows.iter().map(|r| r.mean_accuracy).collect::<Vec<f64>>(),
            }
        })
    }
}

/// Accuracy at each threshold in the list.
pub fn threshold_sweep(
    preds: &[[f64; 3]],
    labels: &[[f64; 3]],
    thresholds: &[f64],
) -> Result<ThresholdSweep, EvalError> {
    let mut rows = Vec::with_capacity(thresholds.len());
    for &threshold in thresholds {
        let report = regression_metrics(preds, labels, threshold)?;
        rows.push(SweepRow {
            threshold,
            accuracy: [
                report.per_dimension[0].accuracy,
                report.per_dimension[1].accuracy,
                report.per_dimension[2].accuracy,
            ],
            mean_accuracy: report.mean.accuracy,
        });
    }
    Ok(ThresholdSweep { rows })
}

/// Accuracy-focused evaluation against exactly-binary labels.
pub fn binary_generalization_eval(
    preds: &[[f64; 3]],
    labels: &[[f64; 3]],
    threshold: f64,
) -> Result<MetricReport, EvalError> {
    for (i, row) in labels.iter().enumerate() {
        for &v in row {
            if v != 0.0 && v != 1.0 {
                return Err(EvalError::NonBinaryLabels { index: i, value: v });
            }
        }
    }
    regression_metrics(preds, labels, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triple(v: f64) -> [f64; 3] {
        [v, v, v]
    }

    #[test]
    fn perfect_predictions() {
        let data = vec![triple(0.2), triple(0.8)];
        let r = regression_metrics(&data, &data, 0.5).unwrap();
        for m in &r.per_dimension {
            assert_eq!(m.mae, 0.0);
            assert_eq!(m.mse, 0.0);
            assert_eq!(m.rmse, 0.0);
            assert_eq!(m.accuracy, 1.0);
        }
        assert_eq!(r.mean.accuracy, 1.0);
        assert_eq!(r.n_sentences, 2);
    }

    #[test]
    fn hand_arithmetic_single_dimension() {
        // Errors 0.2 and 0.0 in every dimension.
        let preds = vec![triple(0.2), triple(0.4)];
        let labels = vec![triple(0.0), triple(0.4)];
        let r = regression_metrics(&preds, &labels, 0.5).unwrap();
        let m = &r.per_dimension[0];
        assert!((m.mae - 0.1).abs() < 1e-12);
        assert!((m.mse - 0.02).abs() < 1e-12);
        assert!((m.rmse - 0.02_f64.sqrt()).abs() < 1e-12);
        assert!((m.rmse - 0.1414).abs() < 1e-4);
    }

    #[test]
    fn accuracy_binarizes_both_sides() {
        let preds = vec![triple(0.6), triple(0.3)];
        let labels = vec![triple(0.9), triple(0.1)];
        let r = regression_metrics(&preds, &labels, 0.5).unwrap();
        assert_eq!(r.mean.accuracy, 1.0);
    }

    #[test]
    fn ties_go_to_one() {
        assert_eq!(binarize(0.5, 0.5), 1);
        assert_eq!(binarize(0.499999, 0.5), 0);
    }

    #[test]
    fn mean_is_arithmetic_mean_of_dimensions() {
        let preds = vec![[0.1, 0.6, 0.9], [0.4, 0.2, 0.7]];
        let labels = vec![[0.0, 1.0, 1.0], [0.5, 0.0, 0.5]];
        let r = regression_metrics(&preds, &labels, 0.5).unwrap();
        let expected: f64 = r.per_dimension.iter().map(|m| m.mae).sum::<f64>() / 3.0;
        assert!((r.mean.mae - expected).abs() < 1e-12);
    }

    #[test]
    fn mae_never_exceeds_rmse_on_random_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let n = rng.gen_range(1..20);
            let preds: Vec<[f64; 3]> =
                (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
            let labels: Vec<[f64; 3]> =
                (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
            let r = regression_metrics(&preds, &labels, 0.5).unwrap();
            for m in &r.per_dimension {
                assert!(m.mae <= m.rmse + 1e-12);
                assert!((m.rmse - m.mse.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn length_mismatch_and_empty_rejected() {
        assert!(matches!(
            regression_metrics(&[triple(0.5)], &[], 0.5),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(
            regression_metrics(&[], &[], 0.5),
            Err(EvalError::Empty)
        ));
    }

    #[test]
    fn sweep_step_behavior() {
        // All predictions 0.6, all labels 1.0.
        let preds = vec![triple(0.6); 4];
        let labels = vec![triple(1.0); 4];
        let sweep = threshold_sweep(&preds, &labels, &[0.5, 0.7]).unwrap();
        assert_eq!(sweep.rows[0].mean_accuracy, 1.0);
        assert_eq!(sweep.rows[1].mean_accuracy, 0.0);
    }

    #[test]
    fn sweep_on_perfect_predictions() {
        let data = vec![triple(0.2), triple(0.8)];
        let sweep = threshold_sweep(&data, &data, &[0.1, 0.5, 0.9]).unwrap();
        for row in &sweep.rows {
            assert_eq!(row.mean_accuracy, 1.0);
        }
    }

    #[test]
    fn sweep_monotone_fixture_steps_by_one_over_n() {
        // Labels all 1; predictions spread so each threshold step flips
        // exactly one sentence.
        let preds = vec![triple(0.15), triple(0.35), triple(0.55), triple(0.75)];
        let labels = vec![triple(1.0); 4];
        let sweep =
            threshold_sweep(&preds, &labels, &[0.1, 0.3, 0.5, 0.7, 0.9]).unwrap();
        let acc: Vec<f64> = sweep.rows.iter().map(|r| r.mean_accuracy).collect();
        assert_eq!(acc, vec![1.0, 0.75, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn sweep_csv_and_plot_shapes() {
        let preds = vec![triple(0.6)];
        let labels = vec![triple(1.0)];
        let sweep = threshold_sweep(&preds, &labels, &[0.25, 0.75]).unwrap();
        let csv = sweep.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("threshold,"));
        let plot = sweep.to_plot_json();
        assert_eq!(plot["x"].as_array().unwrap().len(), 2);
        assert_eq!(plot["series"]["mean"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn binary_eval_accepts_only_binary_labels() {
        let preds = vec![triple(0.9), triple(0.2)];
        let labels = vec![triple(1.0), triple(0.0)];
        let r = binary_generalization_eval(&preds, &labels, 0.5).unwrap();
        assert_eq!(r.mean.accuracy, 1.0);
        for m in &r.per_dimension {
            assert_eq!(m.accuracy, 1.0);
        }

        let bad = vec![triple(1.0), triple(0.3)];
        assert!(matches!(
            binary_generalization_eval(&preds, &bad, 0.5),
            Err(EvalError::NonBinaryLabels { index: 1, .. })
        ));
    }

    #[test]
    fn constant_half_predictor_on_balanced_binary_labels() {
        // 0.5 binarizes to 1 (ties up), so it matches the positive half.
        let preds = vec![triple(0.5); 4];
        let labels = vec![triple(1.0), triple(0.0), triple(1.0), triple(0.0)];
        let r = binary_generalization_eval(&preds, &labels, 0.5).unwrap();
        assert_eq!(r.mean.accuracy, 0.5);
    }
}
