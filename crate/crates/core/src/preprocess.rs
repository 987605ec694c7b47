//! Robust normalization and pooled two-sample t-test gene selection.
//!
//! Normalization is a per-gene robust z-score (value − median) / IQR with
//! median and IQR computed on the training set only. Selection keeps the
//! genes whose normalized values differ between the two classes at the
//! given significance level under the pooled equal-variance t-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::ExpressionDataset;
use crate::error::{Error, Result};

/// Linear-interpolation quantile: with h = (n−1)·q, returns
/// `sorted[floor(h)] + frac(h)·(sorted[floor(h)+1] − sorted[floor(h)])`.
pub fn quantile(xs: &[f64], q: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::data("quantile of empty list"));
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("quantile of non-finite values"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::data(format!("quantile level {q} outside [0,1]")));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 {
        Ok(sorted[lo])
    } else {
        Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
    }
}

/// Inter-quartile range Q3 − Q1.
pub fn iqr(xs: &[f64]) -> Result<f64> {
    Ok(quantile(xs, 0.75)? - quantile(xs, 0.25)?)
}

pub fn median(xs: &[f64]) -> Result<f64> {
    quantile(xs, 0.5)
}

/// Per-gene median and IQR, fit on training columns only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub median: Vec<f64>,
    pub iqr: Vec<f64>,
}

impl NormalizationParams {
    pub fn len(&self) -> usize {
        self.median.len()
    }

    pub fn is_empty(&self) -> bool {
        self.median.is_empty()
    }

    /// Restrict the parameters to the given gene rows.
    pub fn subset(&self, keep: &[usize]) -> NormalizationParams {
        NormalizationParams {
            median: keep.iter().map(|&g| self.median[g]).collect(),
            iqr: keep.iter().map(|&g| self.iqr[g]).collect(),
        }
    }
}

pub fn fit_normalization(train: &ExpressionDataset) -> Result<NormalizationParams> {
    if train.n_samples() < 2 {
        return Err(Error::data("normalization needs at least 2 samples"));
    }
    let mut med = Vec::with_capacity(train.n_genes());
    let mut spread = Vec::with_capacity(train.n_genes());
    for g in 0..train.n_genes() {
        let row = train.gene_row(g);
        med.push(median(row)?);
        spread.push(iqr(row)?);
    }
    Ok(NormalizationParams {
        median: med,
        iqr: spread,
    })
}

/// Apply training-derived robust z-scores. Every gene present must have
/// a strictly positive IQR; project zero-IQR genes away first.
pub fn apply_normalization(
    ds: &ExpressionDataset,
    params: &NormalizationParams,
) -> Result<ExpressionDataset> {
    if ds.n_genes() != params.len() {
        return Err(Error::data(format!(
            "dataset has {} genes but params cover {}",
            ds.n_genes(),
            params.len()
        )));
    }
    if let Some(g) = params.iqr.iter().position(|&s| s <= 0.0) {
        return Err(Error::data(format!(
            "gene {} ({}) has zero IQR; cannot normalize",
            g,
            ds.gene_ids()[g]
        )));
    }
    let n = ds.n_samples();
    let mut values = Vec::with_capacity(ds.n_genes() * n);
    for g in 0..ds.n_genes() {
        let (m, s) = (params.median[g], params.iqr[g]);
        values.extend(ds.gene_row(g).iter().map(|&v| (v - m) / s));
    }
    Ok(ds.with_values(values))
}

/// Pooled two-sample t statistic and its standard-error core.
///
/// Returns `None` when both samples have zero variance (degenerate gene:
/// the pooled standard error is 0 and the statistic is undefined).
pub fn t_statistic(x1: &[f64], x2: &[f64]) -> Result<Option<(f64, f64)>> {
    if x1.len() < 2 || x2.len() < 2 {
        return Err(Error::data("t-test needs at least 2 values per group"));
    }
    let (n1, n2) = (x1.len() as f64, x2.len() as f64);
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let var = |xs: &[f64], m: f64| {
        xs.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
    };
    let (m1, m2) = (mean(x1), mean(x2));
    let (v1, v2) = (var(x1, m1), var(x2, m2));
    let s = (((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0)).sqrt();
    if s == 0.0 {
        return Ok(None);
    }
    let t = (m1 - m2) / (s * (1.0 / n1 + 1.0 / n2).sqrt());
    Ok(Some((t, s)))
}

/// Two-tailed Student-t p-value, 2·P(T_df ≥ |t|).
pub fn p_value_two_tailed(t: f64, df: usize) -> f64 {
    assert!(df >= 1, "p_value_two_tailed requires df >= 1");
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("valid Student-t");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}

/// Per-gene statistics of one selection run, indexed like the original
/// dataset. `None` marks genes that were never tested (zero IQR) or were
/// degenerate under the t-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneStat {
    pub t: f64,
    /// Pooled standard-error core S_x1x2.
    pub s: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub stats: Vec<Option<GeneStat>>,
    pub df: usize,
}

/// Outcome of [`select_genes`]: kept gene indices, the statistics, and
/// the training-derived normalization parameters needed to process the
/// test set identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Strictly increasing indices into the original gene order.
    pub keep: Vec<usize>,
    pub alpha: f64,
    pub ttest: TTestResult,
    pub norm: NormalizationParams,
}

impl SelectionResult {
    /// Project a raw dataset to the kept genes and normalize it with the
    /// training parameters (never refit).
    pub fn apply(&self, raw: &ExpressionDataset) -> Result<ExpressionDataset> {
        let projected = raw.project_genes(&self.keep)?;
        apply_normalization(&projected, &self.norm.subset(&self.keep))
    }

    /// JSON summary: kept gene ids with their statistics and parameters.
    pub fn to_json(&self, gene_ids: &[String]) -> serde_json::Value {
        let kept: Vec<serde_json::Value> = self
            .keep
            .iter()
            .map(|&g| {
                let stat = self.ttest.stats[g].as_ref().expect("kept genes are tested");
                serde_json::json!({
                    "gene_id": gene_ids[g],
                    "index": g,
                    "t": stat.t,
                    "p": stat.p,
                    "median": self.norm.median[g],
                    "iqr": self.norm.iqr[g],
                })
            })
            .collect();
        serde_json::json!({
            "alpha": self.alpha,
            "df": self.ttest.df,
            "genes_before": gene_ids.len(),
            "genes_after": self.keep.len(),
            "kept": kept,
        })
    }
}

/// Full selection pipeline on the training set: fit + apply normalization
/// (dropping zero-IQR genes), t-test each remaining gene between the two
/// classes, keep genes with p < alpha.
pub fn select_genes(train: &ExpressionDataset, alpha: f64) -> Result<SelectionResult> {
    let labels = train.label_indices();
    let n1 = labels.iter().filter(|&&l| l == 0).count();
    let n2 = labels.len() - n1;
    if n1 < 2 || n2 < 2 {
        return Err(Error::data(format!(
            "each class needs at least 2 samples (got {n1} and {n2})"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::config(format!("alpha {alpha} outside (0,1]")));
    }
    let norm = fit_normalization(train)?;
    let df = n1 + n2 - 2;
    let mut stats: Vec<Option<GeneStat>> = vec![None; train.n_genes()];
    let mut keep = Vec::new();
    for g in 0..train.n_genes() {
        if norm.iqr[g] <= 0.0 {
            continue;
        }
        let (m, s) = (norm.median[g], norm.iqr[g]);
        let row = train.gene_row(g);
        let mut x1 = Vec::with_capacity(n1);
        let mut x2 = Vec::with_capacity(n2);
        for (i, &v) in row.iter().enumerate() {
            let z = (v - m) / s;
            if labels[i] == 0 {
                x1.push(z);
            } else {
                x2.push(z);
            }
        }
        if let Some((t, se)) = t_statistic(&x1, &x2)? {
            let p = p_value_two_tailed(t, df);
            if p < alpha {
                keep.push(g);
            }
            stats[g] = Some(GeneStat { t, s: se, p });
        }
    }
    Ok(SelectionResult {
        keep,
        alpha,
        ttest: TTestResult { stats, df },
        norm,
    })
}
