//! `boostkit` command-line entry point.
//!
//! Exit codes: 0 success, 2 usage or config error, 3 data error, 4 internal error.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boostkit::eval::{cross_validate, holdout_evaluate, write_report_csv, write_report_json, CvReport};
use boostkit::feature_select::{apply_mask, chi2_scores, select_k_best, write_scores_csv};
use boostkit::feature_store::{load_feature_csv, write_feature_csv};
use boostkit::gbdt::{load_model, predict, save_model, train};
use clap::{Parser, Subcommand};

use crate::config::PipelineConfig;

#[derive(Debug, Parser)]
#[command(name = "boostkit", version, about = "Chi-squared selection and gradient boosting for feature CSVs")]
struct Cli {
    /// Maximum worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Keep the K features with the highest chi-squared scores.
    Select {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long)]
        output: PathBuf,
        /// Also write `feature,score` for every input column.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Train a booster on a feature CSV and save it as JSON.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Cross-validate selection plus boosting and write JSON and CSV reports.
    Cv {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON report path; the CSV summary is written next to it with a `.csv` extension.
        #[arg(long)]
        report: PathBuf,
        /// Evaluate one stratified split holding out this fraction instead of k folds.
        #[arg(long)]
        holdout: Option<f64>,
    },
    /// Write per-row class probabilities for a feature CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Core(boostkit::Error),
}

impl From<boostkit::Error> for Failure {
    fn from(e: boostkit::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        use boostkit::Error as E;
        match self {
            Failure::Usage(_) | Failure::Core(E::Parameter(_)) => 2,
            Failure::Core(E::Json(_)) => 4,
            Failure::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(4);
        }
    }

    let result = match cli.command {
        Command::Select { input, k, output, scores } => cmd_select(&input, k as usize, &output, scores.as_deref()),
        Command::Train { input, config, model_out } => cmd_train(&input, config.as_deref(), &model_out),
        Command::Cv {
            input,
            config,
            folds,
            seed,
            report,
            holdout,
        } => cmd_cv(&input, config.as_deref(), folds, seed, &report, holdout),
        Command::Predict { model, input, output } => cmd_predict(&model, &input, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_select(input: &Path, k: usize, output: &Path, scores_out: Option<&Path>) -> Result<(), Failure> {
    let dataset = load_feature_csv(input)?;
    let scores = chi2_scores(&dataset)?;
    let mask = select_k_best(&scores, k)?;
    write_feature_csv(&apply_mask(&dataset, &mask)?, output)?;
    if let Some(path) = scores_out {
        write_scores_csv(&dataset, &scores, path)?;
    }
    println!("kept {} of {} features ({} rows)", mask.k(), dataset.n_features(), dataset.n_rows());
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Failure> {
    let config = PipelineConfig::load(path).map_err(|e| Failure::Usage(format!("config: {e}")))?;
    println!("config: {}", serde_json::to_string(&config).map_err(boostkit::Error::from)?);
    Ok(config)
}

fn cmd_train(input: &Path, config: Option<&Path>, model_out: &Path) -> Result<(), Failure> {
    let config = load_config(config)?;
    let dataset = load_feature_csv(input)?;
    let model = train(&dataset, &config.booster_params())?;
    save_model(&model, model_out)?;
    println!(
        "trained {} iterations: {} trees, {} classes [{}], objective {}",
        config.num_iterations,
        model.trees.len(),
        model.n_classes(),
        model.label_names.join(", "),
        model.objective.name()
    );
    Ok(())
}

fn cmd_cv(
    input: &Path,
    config: Option<&Path>,
    folds: Option<usize>,
    seed: Option<u64>,
    report_path: &Path,
    holdout: Option<f64>,
) -> Result<(), Failure> {
    let mut config = load_config(config)?;
    if let Some(f) = folds {
        config.folds = f;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    let dataset = load_feature_csv(input)?;
    let mut k = config.selection_k;
    if k > dataset.n_features() {
        log::warn!(
            "selection_k {k} exceeds the {} available features; keeping all of them",
            dataset.n_features()
        );
        k = dataset.n_features();
    }
    let params = config.booster_params();
    let report = match holdout {
        Some(fraction) => holdout_evaluate(&dataset, &params, Some(k), fraction, config.seed)?,
        None => cross_validate(&dataset, &params, Some(k), config.folds, config.seed)?,
    };
    write_report_json(&report, report_path)?;
    write_report_csv(&report, report_path.with_extension("csv"))?;
    print_summary(&report);
    Ok(())
}

fn print_summary(report: &CvReport) {
    println!("protocol: {} ({} evaluation split(s))", report.protocol, report.per_fold.len());
    println!("{:<8} {:>11} {:>11} {:>9} {:>8} {:>8}", "fold", "sensitivity", "specificity", "precision", "f1", "accuracy");
    let line = |name: &str, m: &boostkit::eval::MetricSet| {
        println!(
            "{name:<8} {:>11.4} {:>11.4} {:>9.4} {:>8.4} {:>8.4}",
            m.sensitivity, m.specificity, m.precision, m.f1, m.accuracy
        );
    };
    for f in &report.per_fold {
        line(&f.fold.to_string(), &f.metrics);
    }
    line("average", &report.average);
}

fn cmd_predict(model_path: &Path, input: &Path, output: &Path) -> Result<(), Failure> {
    let model = load_model(model_path)?;
    let dataset = load_feature_csv(input)?;
    let probs = predict(&model, dataset.features(), dataset.n_features())?;

    let mut out = BufWriter::new(File::create(output)?);
    write!(out, "row,predicted_label")?;
    for name in &model.label_names {
        write!(out, ",p_{name}")?;
    }
    writeln!(out)?;
    for (i, p) in probs.iter().enumerate() {
        let mut best = 0;
        for c in 1..p.len() {
            if p[c] > p[best] {
                best = c;
            }
        }
        write!(out, "{i},{}", model.label_names[best])?;
        for v in p {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    println!("wrote predictions for {} rows", probs.len());
    Ok(())
}
