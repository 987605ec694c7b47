//! Loading, validation, and slicing of gene-expression datasets.
//!
//! The canonical in-memory orientation is genes-as-rows: a dense real
//! matrix with one row per gene and one column per sample, each sample
//! carrying one of exactly two class labels (binary tasks only).

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk layout of a CSV dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// Header `id,<gene ids...>,class`; one row per sample.
    SamplesAsRows,
    /// First row `id,<sample ids...>`; one row per gene; final row
    /// `class,<labels...>`.
    GenesAsRows,
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "samples-as-rows" => Ok(Orientation::SamplesAsRows),
            "genes-as-rows" => Ok(Orientation::GenesAsRows),
            other => Err(Error::config(format!("unknown orientation {other:?}"))),
        }
    }
}

/// Dense gene-by-sample expression matrix with binary class labels.
///
/// Immutable after load; all slicing operations return new datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressionDataset {
    gene_ids: Vec<String>,
    sample_ids: Vec<String>,
    /// Row-major, rows = genes.
    values: Vec<f64>,
    /// Per-sample index into `classes`.
    labels: Vec<usize>,
    /// The two class names, in order of first appearance.
    classes: Vec<String>,
}

impl ExpressionDataset {
    pub fn new(
        gene_ids: Vec<String>,
        sample_ids: Vec<String>,
        values: Vec<f64>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if sample_ids.len() != labels.len() {
            return Err(Error::data(format!(
                "{} sample ids but {} labels",
                sample_ids.len(),
                labels.len()
            )));
        }
        if values.len() != gene_ids.len() * sample_ids.len() {
            return Err(Error::data(format!(
                "matrix has {} cells, expected {} genes x {} samples",
                values.len(),
                gene_ids.len(),
                sample_ids.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &gene_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::data(format!("duplicate gene id {id:?}")));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::data(format!("non-finite expression value {v}")));
        }
        let mut classes: Vec<String> = Vec::new();
        let mut label_idx = Vec::with_capacity(labels.len());
        for label in &labels {
            if label.is_empty() {
                return Err(Error::data("missing label for a sample"));
            }
            let idx = match classes.iter().position(|c| c == label) {
                Some(i) => i,
                None => {
                    classes.push(label.clone());
                    classes.len() - 1
                }
            };
            label_idx.push(idx);
        }
        if classes.len() != 2 {
            return Err(Error::data(format!(
                "label cardinality: expected exactly 2 distinct labels, found {} ({:?})",
                classes.len(),
                classes
            )));
        }
        Ok(ExpressionDataset {
            gene_ids,
            sample_ids,
            values,
            labels: label_idx,
            classes,
        })
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    /// The two class names in order of first appearance. That order is
    /// the tie-break order used everywhere downstream.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Per-sample class index into [`Self::classes`].
    pub fn label_indices(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_of(&self, sample: usize) -> &str {
        &self.classes[self.labels[sample]]
    }

    /// Expression values of one gene across all samples.
    pub fn gene_row(&self, gene: usize) -> &[f64] {
        let n = self.n_samples();
        &self.values[gene * n..(gene + 1) * n]
    }

    pub fn value(&self, gene: usize, sample: usize) -> f64 {
        self.values[gene * self.n_samples() + sample]
    }

    /// Feature vector of one sample (one value per gene).
    pub fn sample_column(&self, sample: usize) -> Vec<f64> {
        (0..self.n_genes()).map(|g| self.value(g, sample)).collect()
    }

    pub fn class_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for &l in &self.labels {
            *counts.entry(self.classes[l].clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Keep exactly the given gene rows, in the given order. Indices must
    /// be strictly increasing (hence duplicate-free and in range order).
    pub fn project_genes(&self, keep: &[usize]) -> Result<Self> {
        let mut prev: Option<usize> = None;
        for &idx in keep {
            if idx >= self.n_genes() {
                return Err(Error::data(format!(
                    "gene index {idx} out of range (dataset has {} genes)",
                    self.n_genes()
                )));
            }
            if let Some(p) = prev {
                if idx <= p {
                    return Err(Error::data(format!(
                        "gene indices must be strictly increasing ({p} then {idx})"
                    )));
                }
            }
            prev = Some(idx);
        }
        let n = self.n_samples();
        let mut values = Vec::with_capacity(keep.len() * n);
        for &g in keep {
            values.extend_from_slice(self.gene_row(g));
        }
        Ok(ExpressionDataset {
            gene_ids: keep.iter().map(|&g| self.gene_ids[g].clone()).collect(),
            sample_ids: self.sample_ids.clone(),
            values,
            labels: self.labels.clone(),
            classes: self.classes.clone(),
        })
    }

    /// Multiply every expression value by `factor` (raw-intensity scaling
    /// used by the robustness sweep).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Evaluation(format!(
                "scale factor must be positive and finite, got {factor}"
            )));
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= factor;
        }
        Ok(out)
    }

    /// Replace the matrix, keeping ids and labels. Shape must match.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        ExpressionDataset {
            values,
            ..self.clone()
        }
    }

    pub fn save(&self, path: &Path, orientation: Orientation) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        match orientation {
            Orientation::SamplesAsRows => {
                let mut header = vec!["id".to_string()];
                header.extend(self.gene_ids.iter().cloned());
                header.push("class".to_string());
                w.write_record(&header)?;
                for s in 0..self.n_samples() {
                    let mut rec = vec![self.sample_ids[s].clone()];
                    for g in 0..self.n_genes() {
                        rec.push(format_value(self.value(g, s)));
                    }
                    rec.push(self.label_of(s).to_string());
                    w.write_record(&rec)?;
                }
            }
            Orientation::GenesAsRows => {
                let mut header = vec!["id".to_string()];
                header.extend(self.sample_ids.iter().cloned());
                w.write_record(&header)?;
                for g in 0..self.n_genes() {
                    let mut rec = vec![self.gene_ids[g].clone()];
                    rec.extend(self.gene_row(g).iter().map(|&v| format_value(v)));
                    w.write_record(&rec)?;
                }
                let mut rec = vec!["class".to_string()];
                rec.extend((0..self.n_samples()).map(|s| self.label_of(s).to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trippable decimal form.
fn format_value(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Load a CSV dataset in either orientation; the result is always in the
/// canonical genes-as-rows orientation.
pub fn load_dataset(path: &Path, orientation: Orientation) -> Result<ExpressionDataset> {
    let file_err = |message: String| Error::DataFile {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    if rows.len() < 2 {
        return Err(file_err("file has no data rows".into()));
    }
    let width = rows[0].len();
    if let Some(bad) = rows.iter().position(|r| r.len() != width) {
        return Err(file_err(format!(
            "row {} has {} fields, header has {width}",
            bad + 1,
            rows[bad].len()
        )));
    }

    let parse_cell = |cell: &str, row: usize, col: usize| -> Result<f64> {
        cell.trim()
            .parse::<f64>()
            .map_err(|_| file_err(format!("non-numeric cell {cell:?} at row {row}, column {col}")))
    };

    match orientation {
        Orientation::SamplesAsRows => {
            let header = &rows[0];
            if header.first().map(String::as_str) != Some("id")
                || header.last().map(String::as_str) != Some("class")
            {
                return Err(file_err(
                    "samples-as-rows header must start with `id` and end with `class`".into(),
                ));
            }
            let gene_ids: Vec<String> = header[1..width - 1].to_vec();
            let n_genes = gene_ids.len();
            let n_samples = rows.len() - 1;
            let mut sample_ids = Vec::with_capacity(n_samples);
            let mut labels = Vec::with_capacity(n_samples);
            // Parse sample-major, then transpose into genes-as-rows.
            let mut values = vec![0.0; n_genes * n_samples];
            for (s, row) in rows[1..].iter().enumerate() {
                sample_ids.push(row[0].clone());
                labels.push(row[width - 1].clone());
                for g in 0..n_genes {
                    values[g * n_samples + s] = parse_cell(&row[g + 1], s + 2, g + 2)?;
                }
            }
            ExpressionDataset::new(gene_ids, sample_ids, values, labels)
        }
        Orientation::GenesAsRows => {
            let header = &rows[0];
            if header.first().map(String::as_str) != Some("id") {
                return Err(file_err("genes-as-rows header must start with `id`".into()));
            }
            let last = rows.last().unwrap();
            if last.first().map(String::as_str) != Some("class") {
                return Err(file_err(
                    "genes-as-rows file must end with a `class` row".into(),
                ));
            }
            let sample_ids: Vec<String> = header[1..].to_vec();
            let labels: Vec<String> = last[1..].to_vec();
            let gene_rows = &rows[1..rows.len() - 1];
            let mut gene_ids = Vec::with_capacity(gene_rows.len());
            let mut values = Vec::with_capacity(gene_rows.len() * sample_ids.len());
            for (g, row) in gene_rows.iter().enumerate() {
                gene_ids.push(row[0].clone());
                for (c, cell) in row[1..].iter().enumerate() {
                    values.push(parse_cell(cell, g + 2, c + 2)?);
                }
            }
            ExpressionDataset::new(gene_ids, sample_ids, values, labels)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn toy() -> ExpressionDataset {
        ExpressionDataset::new(
            vec!["g1".into(), "g2".into(), "g3".into()],
            vec!["s1".into(), "s2".into()],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            vec!["Tumor".into(), "Normal".into()],
        )
        .unwrap()
    }

    #[test]
    fn minimal_well_formed() {
        let ds = toy();
        assert_eq!((ds.n_genes(), ds.n_samples()), (3, 2));
        assert_eq!(ds.classes(), ["Tumor", "Normal"]);
        let counts = ds.class_counts();
        assert_eq!(counts["Tumor"], 1);
        assert_eq!(counts["Normal"], 1);
    }

    #[test]
    fn rejects_three_labels() {
        let err = ExpressionDataset::new(
            vec!["g1".into()],
            vec!["s1".into(), "s2".into(), "s3".into()],
            vec![1.0, 2.0, 3.0],
            vec!["A".into(), "B".into(), "C".into()],
        )
        .unwrap_err();
        assert!(err.to_string().contains("label cardinality"), "{err}");
    }

    #[test]
    fn rejects_duplicate_gene_id() {
        let err = ExpressionDataset::new(
            vec!["g1".into(), "g1".into()],
            vec!["s1".into(), "s2".into()],
            vec![1.0, 2.0, 3.0, 4.0],
            vec!["A".into(), "B".into()],
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate gene id"), "{err}");
    }

    #[test]
    fn rejects_non_finite() {
        let err = ExpressionDataset::new(
            vec!["g1".into()],
            vec!["s1".into(), "s2".into()],
            vec![f64::NAN, 2.0],
            vec!["A".into(), "B".into()],
        )
        .unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
    }

    #[test]
    fn rejects_missing_label() {
        let err = ExpressionDataset::new(
            vec!["g1".into()],
            vec!["s1".into(), "s2".into(), "s3".into()],
            vec![1.0, 2.0, 3.0],
            vec!["A".into(), "".into(), "B".into()],
        )
        .unwrap_err();
        assert!(err.to_string().contains("missing label"), "{err}");
    }

    #[test]
    fn project_identity_and_empty() {
        let ds = toy();
        assert_eq!(ds.project_genes(&[0, 1, 2]).unwrap(), ds);
        let empty = ds.project_genes(&[]).unwrap();
        assert_eq!(empty.n_genes(), 0);
        assert_eq!(empty.label_indices(), ds.label_indices());
    }

    #[test]
    fn project_rejects_bad_indices() {
        let ds = toy();
        assert!(ds.project_genes(&[0, 3]).is_err());
        assert!(ds.project_genes(&[1, 1]).is_err());
        assert!(ds.project_genes(&[2, 0]).is_err());
    }

    #[test]
    fn project_is_idempotent() {
        let ds = toy();
        let once = ds.project_genes(&[0, 2]).unwrap();
        let twice = once.project_genes(&[0, 1]).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn save_load_round_trip_both_orientations() {
        let ds = toy();
        let dir = tempdir().unwrap();
        for orient in [Orientation::SamplesAsRows, Orientation::GenesAsRows] {
            let path = dir.path().join("ds.csv");
            ds.save(&path, orient).unwrap();
            let back = load_dataset(&path, orient).unwrap();
            assert_eq!(back, ds, "{orient:?}");
        }
    }

    #[test]
    fn load_rejects_non_numeric_cell() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "id,g1,class\ns1,1.0,A\ns2,oops,B\n").unwrap();
        let err = load_dataset(&path, Orientation::SamplesAsRows).unwrap_err();
        assert!(err.to_string().contains("non-numeric"), "{err}");
    }
}
