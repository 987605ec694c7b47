//! Confusion-matrix metrics, per-class TPR/FPR, and the scaled-test-set
//! robustness sweep.
//!
//! Positive class is Tumor by convention; metrics are computed from
//! integer counts and divided once at the end, so count-identical inputs
//! always reproduce identical values.

use serde::{Deserialize, Serialize};

use crate::dataset::ExpressionDataset;
use crate::error::{Error, Result};
use crate::model::{rmse_probabilistic, Model, Prediction, TrainingData};
use crate::preprocess::SelectionResult;

/// TP/FP/TN/FN counts for the binary task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionMatrix {
    pub fn new(true_pos: u64, false_pos: u64, true_neg: u64, false_neg: u64) -> Self {
        ConfusionMatrix {
            true_pos,
            false_pos,
            true_neg,
            false_neg,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Count prediction outcomes against truth, with `positive_label` naming
/// the positive class.
pub fn confusion(
    predictions: &[Prediction],
    truth: &[usize],
    classes: &[String],
    positive_label: &str,
) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() || predictions.is_empty() {
        return Err(Error::Evaluation(format!(
            "confusion needs equal non-empty lengths ({} vs {})",
            predictions.len(),
            truth.len()
        )));
    }
    let positive = classes
        .iter()
        .position(|c| c == positive_label)
        .ok_or_else(|| {
            Error::Evaluation(format!("positive label {positive_label:?} not in {classes:?}"))
        })?;
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (pred, &actual) in predictions.iter().zip(truth) {
        match (actual == positive, pred.class == positive) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_neg += 1,
            (false, false) => cm.true_neg += 1,
            (false, true) => cm.false_pos += 1,
        }
    }
    Ok(cm)
}

/// Confusion-derived metrics plus per-class TPR/FPR and CCS/ICS counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub accuracy: f64,
    pub tpr_positive: f64,
    pub tpr_negative: f64,
    pub fpr_positive: f64,
    pub fpr_negative: f64,
    pub rmse: Option<f64>,
    pub ccs: u64,
    pub ics: u64,
    /// Set when any ratio had a zero denominator and fell back to the
    /// declared vacuous value of 1.0.
    pub vacuous: bool,
}

fn ratio(num: u64, den: u64, vacuous: &mut bool) -> f64 {
    if den == 0 {
        *vacuous = true;
        1.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricSet> {
    if cm.total() == 0 {
        return Err(Error::Evaluation("metrics of an empty confusion matrix".into()));
    }
    let mut vacuous = false;
    let sensitivity = ratio(cm.true_pos, cm.true_pos + cm.false_neg, &mut vacuous);
    let specificity = ratio(cm.true_neg, cm.true_neg + cm.false_pos, &mut vacuous);
    let precision = ratio(cm.true_pos, cm.true_pos + cm.false_pos, &mut vacuous);
    let accuracy = (cm.true_pos + cm.true_neg) as f64 / cm.total() as f64;
    // FPR per class: fraction of the other class predicted as this one
    let fpr_positive = if cm.true_neg + cm.false_pos == 0 {
        vacuous = true;
        0.0
    } else {
        cm.false_pos as f64 / (cm.true_neg + cm.false_pos) as f64
    };
    let fpr_negative = if cm.true_pos + cm.false_neg == 0 {
        vacuous = true;
        0.0
    } else {
        cm.false_neg as f64 / (cm.true_pos + cm.false_neg) as f64
    };
    Ok(MetricSet {
        sensitivity,
        specificity,
        precision,
        accuracy,
        tpr_positive: sensitivity,
        tpr_negative: specificity,
        fpr_positive,
        fpr_negative,
        rmse: None,
        ccs: cm.true_pos + cm.true_neg,
        ics: cm.false_pos + cm.false_neg,
        vacuous,
    })
}

/// Evaluate one model on a normalized dataset, including RMSE.
pub fn evaluate_model(
    model: &dyn Model,
    normalized: &ExpressionDataset,
    positive_label: &str,
) -> Result<MetricSet> {
    let data = TrainingData::from_dataset(normalized);
    let predictions = model.predict_all(&data);
    let cm = confusion(&predictions, &data.y, &data.classes, positive_label)?;
    let mut m = metrics(&cm)?;
    m.rmse = Some(rmse_probabilistic(&predictions, &data.y, data.n_classes())?);
    Ok(m)
}

/// Robustness of one technique across the scale factors, plus the means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueRobustness {
    pub technique: String,
    pub per_factor: Vec<MetricSet>,
    pub mean_sensitivity: f64,
    pub mean_specificity: f64,
    pub mean_precision: f64,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub factors: Vec<f64>,
    pub techniques: Vec<TechniqueRobustness>,
}

/// The six default factors: Div 2, Mul 2, Div 10, Mul 10, Div 20, Mul 20.
pub const DEFAULT_SCALE_FACTORS: [f64; 6] = [0.5, 2.0, 0.1, 10.0, 0.05, 20.0];

/// Scale the RAW test matrix by each factor, re-apply the
/// training-derived projection and normalization (never refit), predict,
/// and compute metrics per factor plus their arithmetic means.
pub fn scale_sweep(
    models: &[(String, Box<dyn Model>)],
    selection: &SelectionResult,
    raw_test: &ExpressionDataset,
    positive_label: &str,
    factors: &[f64],
) -> Result<RobustnessReport> {
    if let Some(&f) = factors.iter().find(|&&f| !(f.is_finite() && f > 0.0)) {
        return Err(Error::Evaluation(format!("non-positive scale factor {f}")));
    }
    let mut per_model: Vec<Vec<MetricSet>> = vec![Vec::new(); models.len()];
    for &factor in factors {
        let scaled = raw_test.scaled(factor)?;
        let normalized = selection.apply(&scaled)?;
        for (slot, (_, model)) in per_model.iter_mut().zip(models) {
            slot.push(evaluate_model(model.as_ref(), &normalized, positive_label)?);
        }
    }
    let techniques = models
        .iter()
        .zip(per_model)
        .map(|((name, _), per_factor)| {
            let n = per_factor.len() as f64;
            let mean = |f: fn(&MetricSet) -> f64| per_factor.iter().map(f).sum::<f64>() / n;
            TechniqueRobustness {
                technique: name.clone(),
                mean_sensitivity: mean(|m| m.sensitivity),
                mean_specificity: mean(|m| m.specificity),
                mean_precision: mean(|m| m.precision),
                mean_accuracy: mean(|m| m.accuracy),
                per_factor,
            }
        })
        .collect();
    Ok(RobustnessReport {
        factors: factors.to_vec(),
        techniques,
    })
}

impl RobustnessReport {
    /// CSV with one Sn and one Sp row per technique and one column per
    /// factor.
    pub fn to_table4_csv(&self) -> String {
        let mut out = String::from("technique,metric");
        for &f in &self.factors {
            out.push_str(&format!(",{}", factor_label(f)));
        }
        out.push('\n');
        for t in &self.techniques {
            for (metric, get) in [
                ("Sn", (|m: &MetricSet| m.sensitivity) as fn(&MetricSet) -> f64),
                ("Sp", |m: &MetricSet| m.specificity),
            ] {
                out.push_str(&format!("{},{}", t.technique, metric));
                for m in &t.per_factor {
                    out.push_str(&format!(",{}", get(m)));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// "Div 2" / "Mul 2" style label for a scale factor.
pub fn factor_label(f: f64) -> String {
    if f < 1.0 {
        format!("Div {}", 1.0 / f)
    } else if f > 1.0 {
        format!("Mul {f}")
    } else {
        "Base".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn classes() -> Vec<String> {
        vec!["Tumor".into(), "Normal".into()]
    }

    fn pred(class: usize) -> Prediction {
        let mut probs = vec![0.0, 0.0];
        probs[class] = 1.0;
        Prediction::from_probs(probs)
    }

    #[test]
    fn all_correct_has_no_errors() {
        let preds = vec![pred(0), pred(1), pred(0)];
        let cm = confusion(&preds, &[0, 1, 0], &classes(), "Tumor").unwrap();
        assert_eq!(cm, ConfusionMatrix::new(2, 0, 1, 0));
    }

    #[test]
    fn complement_predictions_have_no_hits() {
        let preds = vec![pred(1), pred(0), pred(1)];
        let cm = confusion(&preds, &[0, 1, 0], &classes(), "Tumor").unwrap();
        assert_eq!(cm.true_pos, 0);
        assert_eq!(cm.true_neg, 0);
        assert_eq!(cm.false_neg, 2);
        assert_eq!(cm.false_pos, 1);
    }

    #[test]
    fn bayes_net_test_counts() {
        // 23/25 Tumor and 9/9 Normal correct
        let mut preds = Vec::new();
        let mut truth = Vec::new();
        for i in 0..25 {
            truth.push(0);
            preds.push(pred(usize::from(i >= 23)));
        }
        for _ in 0..9 {
            truth.push(1);
            preds.push(pred(1));
        }
        let cm = confusion(&preds, &truth, &classes(), "Tumor").unwrap();
        assert_eq!(cm, ConfusionMatrix::new(23, 0, 9, 2));
    }

    #[test]
    fn metrics_table3_rows() {
        let m = metrics(&ConfusionMatrix::new(23, 0, 9, 2)).unwrap();
        assert_relative_eq!(m.sensitivity, 0.92);
        assert_relative_eq!(m.specificity, 1.0);
        assert_relative_eq!(m.precision, 1.0);
        assert_relative_eq!(m.accuracy, 32.0 / 34.0);
        assert_eq!((m.ccs, m.ics), (32, 2));

        let m = metrics(&ConfusionMatrix::new(22, 0, 9, 3)).unwrap();
        assert_relative_eq!(m.accuracy, 31.0 / 34.0);

        let m = metrics(&ConfusionMatrix::new(19, 4, 5, 6)).unwrap();
        assert_relative_eq!(m.accuracy, 24.0 / 34.0);
    }

    #[test]
    fn vacuous_denominator_convention() {
        // no positives in truth: sensitivity vacuously 1.0
        let m = metrics(&ConfusionMatrix::new(0, 0, 5, 0)).unwrap();
        assert_eq!(m.sensitivity, 1.0);
        assert!(m.vacuous);
    }

    #[test]
    fn rejects_mismatched_lengths_and_unknown_label() {
        let preds = vec![pred(0)];
        assert!(confusion(&preds, &[0, 1], &classes(), "Tumor").is_err());
        assert!(confusion(&preds, &[0], &classes(), "Benign").is_err());
    }

    #[test]
    fn metric_ranges() {
        let m = metrics(&ConfusionMatrix::new(7, 3, 11, 2)).unwrap();
        for v in [m.sensitivity, m.specificity, m.precision, m.accuracy] {
            assert!((0.0..=1.0).contains(&v));
        }
        assert_eq!(m.ccs + m.ics, 23);
    }

    #[test]
    fn factor_labels() {
        assert_eq!(factor_label(0.5), "Div 2");
        assert_eq!(factor_label(20.0), "Mul 20");
        assert_eq!(factor_label(1.0), "Base");
    }
}
