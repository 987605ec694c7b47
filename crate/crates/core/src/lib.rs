//! Gene-expression class prediction: IQR-based robust normalization,
//! pooled t-test gene selection, ten classification techniques with a
//! shared prediction contract, confusion-matrix evaluation, and a
//! scaled-test-set robustness sweep.

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod pipeline;
pub mod preprocess;
pub mod synth;

pub use dataset::{load_dataset, ExpressionDataset, Orientation};
pub use error::{Error, Result};
pub use evaluation::{confusion, evaluate_model, ConfusionMatrix, MetricSet};
pub use model::{Model, Prediction, SeedSpec, TrainingData};
pub use pipeline::{emit_report, run_pipeline, PipelineConfig, RunReport};
pub use preprocess::{select_genes, SelectionResult};
