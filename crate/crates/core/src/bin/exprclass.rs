use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use exprclass::pipeline::{emit_report, run_pipeline, summarize, PipelineConfig, ReportFormat};
use exprclass::Error;

/// Train and evaluate expression classifiers on a train/test CSV pair.
#[derive(Debug, Parser)]
#[command(name = "exprclass", version)]
struct Cli {
    /// Training CSV
    #[arg(long)]
    train: Option<PathBuf>,

    /// Test CSV
    #[arg(long)]
    test: Option<PathBuf>,

    /// Significance threshold for gene selection
    #[arg(long)]
    alpha: Option<f64>,

    /// Comma-separated classifier names (default: all ten)
    #[arg(long, value_delimiter = ',')]
    classifiers: Option<Vec<String>>,

    /// Master RNG seed
    #[arg(long)]
    seed: Option<u64>,

    /// Comma-separated scale factors for the robustness sweep
    #[arg(long, value_delimiter = ',')]
    scale_factors: Option<Vec<f64>>,

    /// Output directory for report.json, table CSVs and plot data
    #[arg(long)]
    out: Option<PathBuf>,

    /// Hyperparameter override, repeatable: --set <classifier>.<param>=<value>
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Worker threads for training (default: rayon's choice)
    #[arg(long)]
    jobs: Option<usize>,

    /// Positive class label
    #[arg(long)]
    positive_label: Option<String>,

    /// CSV layout: genes-as-rows or samples-as-rows
    #[arg(long)]
    orientation: Option<String>,

    /// JSON config file; command-line flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
}

fn build_config(cli: Cli) -> Result<PipelineConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<PipelineConfig>(&text)
                .map_err(|e| Error::config(format!("bad config {}: {e}", path.display())))?
        }
        None => {
            let (Some(train), Some(test)) = (cli.train.clone(), cli.test.clone()) else {
                return Err(Error::config("--train and --test are required without --config"));
            };
            PipelineConfig::new(train, test)
        }
    };
    if let Some(train) = cli.train {
        config.train = train;
    }
    if let Some(test) = cli.test {
        config.test = test;
    }
    if let Some(alpha) = cli.alpha {
        config.alpha = alpha;
    }
    if let Some(classifiers) = cli.classifiers {
        config.classifiers = classifiers;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(factors) = cli.scale_factors {
        config.scale_factors = factors;
    }
    if let Some(out) = cli.out {
        config.out = Some(out);
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = Some(jobs);
    }
    if let Some(label) = cli.positive_label {
        config.positive_label = label;
    }
    if let Some(orientation) = cli.orientation {
        config.orientation = orientation;
    }
    let mut overrides = BTreeMap::new();
    for item in cli.set {
        let Some((key, value)) = item.split_once('=') else {
            return Err(Error::config(format!("--set {item:?} must be KEY=VALUE")));
        };
        overrides.insert(key.trim().to_string(), value.trim().to_string());
    }
    config.overrides.extend(overrides);
    Ok(config)
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    let config = build_config(cli)?;
    let report = run_pipeline(&config)?;
    print!("{}", summarize(&report));
    if let Some(out) = &config.out {
        let written = emit_report(
            &report,
            out,
            &[ReportFormat::Json, ReportFormat::Csv, ReportFormat::PlotData],
        )?;
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
