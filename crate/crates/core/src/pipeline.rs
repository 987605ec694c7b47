//! End-to-end pipeline orchestration: load → select genes → normalize →
//! train the requested classifiers → evaluate on the base test set and
//! the scaled variants → assemble and emit the run report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::*;
use crate::dataset::{load_dataset, Orientation};
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate_model, factor_label, scale_sweep, MetricSet, RobustnessReport, DEFAULT_SCALE_FACTORS,
};
use crate::model::{Model, SeedSpec, TrainingData};
use crate::preprocess::select_genes;

pub const SCHEMA_VERSION: u32 = 1;

/// The ten canonical technique names, in reporting order.
pub const CANONICAL_CLASSIFIERS: [&str; 10] = [
    "bayes-net",
    "naive-bayes",
    "logit-boost",
    "c45",
    "lmt",
    "random-forest",
    "decision-table",
    "smo-svm",
    "mlp",
    "ga",
];

fn default_alpha() -> f64 {
    0.001
}

fn default_seed() -> u64 {
    42
}

fn default_classifiers() -> Vec<String> {
    CANONICAL_CLASSIFIERS.iter().map(|s| s.to_string()).collect()
}

fn default_scale_factors() -> Vec<f64> {
    DEFAULT_SCALE_FACTORS.to_vec()
}

fn default_positive_label() -> String {
    "Tumor".to_string()
}

fn default_orientation() -> String {
    "genes-as-rows".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_scale_factors")]
    pub scale_factors: Vec<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// `<classifier>.<param> = <value>` hyperparameter overrides.
    #[serde(default)]
    pub overrides: BTreeMap<String, String>,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default = "default_positive_label")]
    pub positive_label: String,
    /// CSV layout of the train/test files.
    #[serde(default = "default_orientation")]
    pub orientation: String,
}

impl PipelineConfig {
    pub fn new(train: PathBuf, test: PathBuf) -> Self {
        PipelineConfig {
            train,
            test,
            alpha: default_alpha(),
            classifiers: default_classifiers(),
            seed: default_seed(),
            scale_factors: default_scale_factors(),
            out: None,
            overrides: BTreeMap::new(),
            jobs: None,
            positive_label: default_positive_label(),
            orientation: default_orientation(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha {} outside (0,1]", self.alpha)));
        }
        for name in &self.classifiers {
            if !CANONICAL_CLASSIFIERS.contains(&name.as_str()) {
                return Err(Error::config(format!(
                    "unknown classifier {name:?}; expected one of {CANONICAL_CLASSIFIERS:?}"
                )));
            }
        }
        if let Some(&f) = self.scale_factors.iter().find(|&&f| !(f.is_finite() && f > 0.0)) {
            return Err(Error::config(format!("non-positive scale factor {f}")));
        }
        self.orientation.parse::<Orientation>()?;
        // overrides must address a known classifier and parse later
        for key in self.overrides.keys() {
            let Some((classifier, _)) = key.split_once('.') else {
                return Err(Error::config(format!(
                    "override key {key:?} must be <classifier>.<param>"
                )));
            };
            if !CANONICAL_CLASSIFIERS.contains(&classifier) {
                return Err(Error::config(format!("override for unknown classifier {classifier:?}")));
            }
        }
        Ok(())
    }
}

/// All hyperparameters, with overrides applied on top of the defaults.
#[derive(Debug, Clone, Default)]
pub struct ClassifierSettings {
    pub naive_bayes: NaiveBayesParams,
    pub bayes_net: BayesNetParams,
    pub logit_boost: LogitBoostParams,
    pub c45: C45Params,
    pub lmt: LmtParams,
    pub random_forest: RandomForestParams,
    pub decision_table: DecisionTableParams,
    pub svm: SvmParams,
    pub mlp: MlpParams,
    pub ga: GaParams,
}

impl ClassifierSettings {
    pub fn from_overrides(overrides: &BTreeMap<String, String>) -> Result<Self> {
        let mut settings = ClassifierSettings {
            naive_bayes: NaiveBayesParams::default(),
            bayes_net: BayesNetParams::default(),
            logit_boost: LogitBoostParams::default(),
            c45: C45Params::default(),
            lmt: LmtParams::default(),
            random_forest: RandomForestParams::default(),
            decision_table: DecisionTableParams::default(),
            svm: SvmParams::default(),
            mlp: MlpParams::default(),
            ga: GaParams::default(),
        };
        for (key, value) in overrides {
            settings.apply(key, value)?;
        }
        Ok(settings)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::config(format!("cannot parse override {key}={value}"));
        let f = |v: &str| v.parse::<f64>().map_err(|_| bad());
        let u = |v: &str| v.parse::<usize>().map_err(|_| bad());
        match key {
            "naive-bayes.variance-floor" => self.naive_bayes.variance_floor = f(value)?,
            "bayes-net.k" => self.bayes_net.k = u(value)?,
            "bayes-net.max-parents" => self.bayes_net.max_parents = u(value)?,
            "bayes-net.ess" => self.bayes_net.ess = f(value)?,
            "logit-boost.stages" => self.logit_boost.stages = u(value)?,
            "logit-boost.shrinkage" => self.logit_boost.shrinkage = f(value)?,
            "logit-boost.z-max" => self.logit_boost.z_max = f(value)?,
            "c45.min-leaf" => self.c45.min_leaf = u(value)?,
            "c45.cf" => self.c45.cf = f(value)?,
            "lmt.max-boost-iters" => self.lmt.max_boost_iters = u(value)?,
            "lmt.min-split" => self.lmt.min_split = u(value)?,
            "random-forest.trees" => self.random_forest.trees = u(value)?,
            "random-forest.features-per-split" => self.random_forest.features_per_split = u(value)?,
            "decision-table.k" => self.decision_table.k = u(value)?,
            "decision-table.max-subset" => self.decision_table.max_subset = u(value)?,
            "smo-svm.c" => self.svm.c = f(value)?,
            "smo-svm.tol" => self.svm.tol = f(value)?,
            "smo-svm.max-passes" => self.svm.max_passes = u(value)?,
            "mlp.hidden" => self.mlp.hidden = u(value)?,
            "mlp.learning-rate" => self.mlp.learning_rate = f(value)?,
            "mlp.momentum" => self.mlp.momentum = f(value)?,
            "mlp.epochs" => self.mlp.epochs = u(value)?,
            "ga.population" => self.ga.population = u(value)?,
            "ga.generations" => self.ga.generations = u(value)?,
            "ga.crossover-rate" => self.ga.crossover_rate = f(value)?,
            "ga.mutation-rate" => self.ga.mutation_rate = f(value)?,
            other => return Err(Error::config(format!("unknown override key {other:?}"))),
        }
        Ok(())
    }
}

/// Train one named classifier with its RNG stream derived from the seed
/// and the classifier name, so concurrent training stays deterministic.
pub fn train_classifier(
    name: &str,
    data: &TrainingData,
    settings: &ClassifierSettings,
    seed: SeedSpec,
) -> Result<(Box<dyn Model>, Option<crate::classifiers::ga::FitnessTrace>)> {
    let mut rng = seed.rng_for(name);
    let model: Box<dyn Model> = match name {
        "naive-bayes" => Box::new(train_naive_bayes(data, &settings.naive_bayes)?),
        "bayes-net" => Box::new(train_bayes_net(data, &settings.bayes_net)?),
        "logit-boost" => Box::new(train_logitboost(data, &settings.logit_boost)?),
        "c45" => Box::new(train_c45(data, &settings.c45)?),
        "lmt" => Box::new(train_lmt(data, &settings.lmt)?),
        "random-forest" => Box::new(train_random_forest(data, &settings.random_forest, &mut rng)?),
        "decision-table" => Box::new(train_decision_table(data, &settings.decision_table)?),
        "smo-svm" => Box::new(train_smo_svm(data, &settings.svm)?),
        "mlp" => Box::new(train_mlp(data, &settings.mlp, &mut rng)?),
        "ga" => {
            let model = train_ga(data, &settings.ga, &mut rng)?;
            let trace = model.trace.clone();
            return Ok((Box::new(model), Some(trace)));
        }
        other => return Err(Error::config(format!("unknown classifier {other:?}"))),
    };
    Ok((model, None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub genes_before: usize,
    pub genes_after: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub technique: String,
    pub train: MetricSet,
    pub test: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: PipelineConfig,
    pub seed: u64,
    pub selection: SelectionSummary,
    pub classifiers: Vec<ClassifierReport>,
    pub robustness: RobustnessReport,
    /// (generation, best MSE, average MSE) rows when the GA ran.
    pub ga_trace: Option<Vec<(usize, f64, f64)>>,
    /// Wall-clock seconds per stage; excluded from determinism checks.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    /// JSON with the wall-clock timings zeroed, the canon for comparing
    /// two runs for determinism.
    pub fn canonical_json(&self) -> Result<String> {
        let mut clone = self.clone();
        for v in clone.timings.values_mut() {
            *v = 0.0;
        }
        Ok(serde_json::to_string_pretty(&clone)?)
    }
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport> {
    config.validate()?;
    let settings = ClassifierSettings::from_overrides(&config.overrides)?;
    let orientation: Orientation = config.orientation.parse()?;
    let mut timings = BTreeMap::new();

    let t0 = Instant::now();
    let train_raw = load_dataset(&config.train, orientation)?;
    let test_raw = load_dataset(&config.test, orientation)?;
    timings.insert("load".to_string(), t0.elapsed().as_secs_f64());
    if train_raw.gene_ids() != test_raw.gene_ids() {
        return Err(Error::data("train and test gene ids differ"));
    }

    let t0 = Instant::now();
    let selection = select_genes(&train_raw, config.alpha)?;
    let train_norm = selection.apply(&train_raw)?;
    let test_norm = selection.apply(&test_raw)?;
    timings.insert("select".to_string(), t0.elapsed().as_secs_f64());

    let selection_summary = SelectionSummary {
        genes_before: train_raw.n_genes(),
        genes_after: selection.keep.len(),
        alpha: config.alpha,
    };

    let seed = SeedSpec::new(config.seed);
    let train_data = TrainingData::from_dataset(&train_norm);

    let t0 = Instant::now();
    let run_training = || -> Result<Vec<(String, Box<dyn Model>, Option<ga::FitnessTrace>)>> {
        config
            .classifiers
            .par_iter()
            .map(|name| {
                let (model, trace) = train_classifier(name, &train_data, &settings, seed)
                    .map_err(|e| match e {
                        e @ Error::Training { .. } => e,
                        other => Error::training(name.clone(), other.to_string()),
                    })?;
                Ok((name.clone(), model, trace))
            })
            .collect()
    };
    let trained = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::config(format!("cannot build thread pool: {e}")))?
            .install(run_training),
        None => run_training(),
    }?;
    timings.insert("train".to_string(), t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let mut classifier_reports = Vec::with_capacity(trained.len());
    let mut ga_trace = None;
    for (name, model, trace) in &trained {
        let train_metrics = evaluate_model(model.as_ref(), &train_norm, &config.positive_label)?;
        let test_metrics = evaluate_model(model.as_ref(), &test_norm, &config.positive_label)?;
        classifier_reports.push(ClassifierReport {
            technique: name.clone(),
            train: train_metrics,
            test: test_metrics,
        });
        if let Some(trace) = trace {
            ga_trace = Some(
                trace
                    .iter()
                    .enumerate()
                    .map(|(g, &(best, avg))| (g + 1, best, avg))
                    .collect(),
            );
        }
    }
    timings.insert("evaluate".to_string(), t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let models: Vec<(String, Box<dyn Model>)> = trained
        .into_iter()
        .map(|(name, model, _)| (name, model))
        .collect();
    let robustness = scale_sweep(
        &models,
        &selection,
        &test_raw,
        &config.positive_label,
        &config.scale_factors,
    )?;
    timings.insert("sweep".to_string(), t0.elapsed().as_secs_f64());

    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        seed: config.seed,
        selection: selection_summary,
        classifiers: classifier_reports,
        robustness,
        ga_trace,
        timings,
    })
}

/// Output formats for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    PlotData,
}

/// Write the report artifacts into `out_dir`; returns the paths written.
pub fn emit_report(
    report: &RunReport,
    out_dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut write = |name: &str, contents: String| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };

    if formats.contains(&ReportFormat::Json) {
        write("report.json", serde_json::to_string_pretty(report)?)?;
    }

    if formats.contains(&ReportFormat::Csv) {
        // base-test performance per technique
        let mut t3 = String::from(
            "technique,ccs,ics,rmse,tpr_tumor,tpr_normal,fpr_tumor,fpr_normal\n",
        );
        for c in &report.classifiers {
            let m = &c.test;
            t3.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.technique,
                m.ccs,
                m.ics,
                m.rmse.unwrap_or(f64::NAN),
                m.tpr_positive,
                m.tpr_negative,
                m.fpr_positive,
                m.fpr_negative,
            ));
        }
        write("table3.csv", t3)?;
        write("table4.csv", report.robustness.to_table4_csv())?;

        // Tables 5 and 6: mean metrics, techniques as columns
        let names: Vec<&str> = report
            .robustness
            .techniques
            .iter()
            .map(|t| t.technique.as_str())
            .collect();
        let header = format!("metric,{}\n", names.join(","));
        let row = |label: &str, get: fn(&crate::evaluation::TechniqueRobustness) -> f64| {
            let cells: Vec<String> = report
                .robustness
                .techniques
                .iter()
                .map(|t| get(t).to_string())
                .collect();
            format!("{label},{}\n", cells.join(","))
        };
        let mut t5 = header.clone();
        t5.push_str(&row("sensitivity", |t| t.mean_sensitivity));
        t5.push_str(&row("specificity", |t| t.mean_specificity));
        write("table5.csv", t5)?;
        let mut t6 = header;
        t6.push_str(&row("precision", |t| t.mean_precision));
        t6.push_str(&row("accuracy", |t| t.mean_accuracy));
        write("table6.csv", t6)?;
    }

    if formats.contains(&ReportFormat::PlotData) {
        let mut fig1 = String::from("technique,ccs,ics\n");
        let mut fig2 = String::from("technique,accuracy\n");
        for c in &report.classifiers {
            fig1.push_str(&format!("{},{},{}\n", c.technique, c.test.ccs, c.test.ics));
            fig2.push_str(&format!("{},{}\n", c.technique, c.test.accuracy));
        }
        write("fig1.csv", fig1)?;
        write("fig2.csv", fig2)?;
        if let Some(trace) = &report.ga_trace {
            let mut fig3 = String::from("generation,best_mse,avg_mse\n");
            for &(g, best, avg) in trace {
                fig3.push_str(&format!("{g},{best},{avg}\n"));
            }
            write("fig3.csv", fig3)?;
        }
    }

    Ok(written)
}

/// Short human-readable summary for the CLI.
pub fn summarize(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "selection: {} -> {} genes (alpha {})\n",
        report.selection.genes_before, report.selection.genes_after, report.selection.alpha
    ));
    for c in &report.classifiers {
        out.push_str(&format!(
            "{:<16} train acc {:.4}  test acc {:.4}  ccs {}/{}\n",
            c.technique,
            c.train.accuracy,
            c.test.accuracy,
            c.test.ccs,
            c.test.ccs + c.test.ics,
        ));
    }
    for t in &report.robustness.techniques {
        out.push_str(&format!(
            "{:<16} mean Sn {:.4}  Sp {:.4}  Pr {:.4}  Acc {:.4} over factors [{}]\n",
            t.technique,
            t.mean_sensitivity,
            t.mean_specificity,
            t.mean_precision,
            t.mean_accuracy,
            report
                .robustness
                .factors
                .iter()
                .map(|&f| factor_label(f))
                .collect::<Vec<_>>()
                .join(", "),
        ));
    }
    out
}
