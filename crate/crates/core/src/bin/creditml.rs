//! Batch CLI for the credit default pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use creditml::cli::{self, CliError, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "creditml",
    about = "Credit-card default prediction: data preparation, SMOTE balancing, \
             and comparison of seven native classifiers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML pipeline configuration; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of rows assigned to the training split
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Classification cutoff applied to model scores
    #[arg(long)]
    threshold: Option<f64>,
    /// Minimum overdue status code (0-5) that marks a default
    #[arg(long)]
    label_threshold: Option<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<PipelineConfig, CliError> {
        let mut cfg = PipelineConfig::load(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(f) = self.train_fraction {
            cfg.split.train_fraction = f;
        }
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if let Some(l) = &self.label_threshold {
            cfg.label_threshold = l.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic application/credit CSV pair
    Generate {
        /// Number of customers
        #[arg(long)]
        rows: usize,
        /// Fraction of customers that default
        #[arg(long, default_value_t = 0.1)]
        default_rate: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Merge the two tables, derive labels, and encode features
    Prepare {
        /// Application records CSV
        #[arg(long)]
        applications: PathBuf,
        /// Monthly credit status CSV
        #[arg(long)]
        credit: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Train one model on a prepared dataset and report holdout metrics
    Train {
        /// Prepared dataset CSV (from `prepare`)
        #[arg(long)]
        dataset: PathBuf,
        /// Model kind: logistic, svm, knn, decision_tree, random_forest,
        /// xgb_boost, or lgbm_boost
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Score a saved model against a dataset
    Evaluate {
        /// Saved model JSON (from `train`)
        #[arg(long)]
        model_file: PathBuf,
        /// Dataset CSV to score
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Train every configured model on one shared split and rank them
    Compare {
        /// Prepared dataset CSV (from `prepare`)
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate {
            rows,
            default_rate,
            seed,
            out_dir,
        } => cli::cmd_generate(rows, default_rate, seed, &out_dir),
        Command::Prepare {
            applications,
            credit,
            out_dir,
            config,
        } => cli::cmd_prepare(&applications, &credit, &config.load()?, &out_dir),
        Command::Train {
            dataset,
            model,
            out_dir,
            config,
        } => cli::cmd_train(&dataset, &model, &config.load()?, &out_dir),
        Command::Evaluate {
            model_file,
            dataset,
            threshold,
            out_dir,
        } => cli::cmd_evaluate(&model_file, &dataset, threshold, &out_dir),
        Command::Compare {
            dataset,
            out_dir,
            config,
        } => cli::cmd_compare(&dataset, &config.load()?, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
