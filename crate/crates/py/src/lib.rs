//! Python bindings for the core pipeline: dataset loading, gene
//! selection, the basic preprocessing primitives, and full runs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use exprclass::dataset::{load_dataset, ExpressionDataset, Orientation};
use exprclass::pipeline::{emit_report, run_pipeline, PipelineConfig, ReportFormat};
use exprclass::preprocess;

fn to_py_err(e: exprclass::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

#[pyclass(name = "Dataset")]
struct PyDataset {
    inner: ExpressionDataset,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    #[pyo3(signature = (path, orientation="genes-as-rows"))]
    fn load(path: PathBuf, orientation: &str) -> PyResult<Self> {
        let orientation: Orientation = orientation
            .parse()
            .map_err(|e: exprclass::Error| PyValueError::new_err(e.to_string()))?;
        let inner = load_dataset(&path, orientation).map_err(to_py_err)?;
        Ok(PyDataset { inner })
    }

    #[getter]
    fn n_genes(&self) -> usize {
        self.inner.n_genes()
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.classes().to_vec()
    }

    fn class_counts(&self) -> BTreeMap<String, usize> {
        self.inner.class_counts().into_iter().collect()
    }

    fn gene_ids(&self) -> Vec<String> {
        self.inner.gene_ids().to_vec()
    }

    /// Expression values of one gene across all samples.
    fn gene_row(&self, gene: usize) -> PyResult<Vec<f64>> {
        if gene >= self.inner.n_genes() {
            return Err(PyValueError::new_err(format!("gene {gene} out of range")));
        }
        Ok(self.inner.gene_row(gene).to_vec())
    }

    /// Number of genes kept at the given significance level.
    fn select_genes(&self, alpha: f64) -> PyResult<usize> {
        let selection = preprocess::select_genes(&self.inner, alpha).map_err(to_py_err)?;
        Ok(selection.keep.len())
    }
}

/// Linear-interpolation quantile of a sample.
#[pyfunction]
fn quantile(values: Vec<f64>, q: f64) -> PyResult<f64> {
    preprocess::quantile(&values, q).map_err(to_py_err)
}

/// Interquartile range of a sample.
#[pyfunction]
fn iqr(values: Vec<f64>) -> PyResult<f64> {
    preprocess::iqr(&values).map_err(to_py_err)
}

/// Pooled-variance two-sample t statistic; None when degenerate.
#[pyfunction]
fn t_statistic(x1: Vec<f64>, x2: Vec<f64>) -> PyResult<Option<f64>> {
    Ok(preprocess::t_statistic(&x1, &x2)
        .map_err(to_py_err)?
        .map(|(t, _)| t))
}

/// Two-tailed p-value of a Student-t statistic.
#[pyfunction]
fn p_value(t: f64, df: usize) -> f64 {
    preprocess::p_value_two_tailed(t, df)
}

/// Run the full pipeline from a JSON config string; returns report JSON.
#[pyfunction]
fn run(config_json: &str) -> PyResult<String> {
    let config: PipelineConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = run_pipeline(&config).map_err(to_py_err)?;
    if let Some(out) = &config.out {
        emit_report(
            &report,
            out,
            &[ReportFormat::Json, ReportFormat::Csv, ReportFormat::PlotData],
        )
        .map_err(to_py_err)?;
    }
    serde_json::to_string_pretty(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn exprclass_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(quantile, m)?)?;
    m.add_function(wrap_pyfunction!(iqr, m)?)?;
    m.add_function(wrap_pyfunction!(t_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(p_value, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
