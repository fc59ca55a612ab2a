//! `kants` — split generation, training, classification, parameter sweeps,
//! snapshot rendering, and full experiment reproduction from one binary.
//!
//! Exit codes: 0 success, 1 runtime error (I/O, parsing, data), 2 usage
//! error (bad flags, bad config, invalid parameter values).

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kants::error::KantsError;
use settings::{ConfigFile, ParamArgs};

#[derive(Parser)]
#[command(
    name = "kants",
    version,
    about = "Ant-grid clustering and classification toolkit"
)]
struct Cli {
    /// Optional key=value config file (# comments); flags override it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory for artifacts (default: kants-out)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write stratified train/test split file pairs plus sidecar metadata
    MakeSplits {
        /// Source CSV (numeric features, label in one column)
        dataset: PathBuf,
        /// Fraction of each class that goes to the training side
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
        /// Number of independent split pairs
        #[arg(long, default_value_t = 1)]
        sets: usize,
        /// Base name for the files (default: the dataset file stem)
        #[arg(long)]
        name: Option<String>,
        /// Zero-based label column (default: last column)
        #[arg(long)]
        label_column: Option<usize>,
        /// Zero-based columns to drop, comma separated (e.g. an id column)
        #[arg(long, value_delimiter = ',')]
        ignore_columns: Vec<usize>,
        /// Master random seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a grid on a CSV and save the model
    Train {
        /// Training CSV (typically a -train.csv split file)
        train_csv: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Record ant positions every N iterations into history.csv
        #[arg(long, value_name = "N")]
        snapshot_every: Option<usize>,
        #[arg(long)]
        label_column: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        ignore_columns: Vec<usize>,
    },
    /// Score a saved model against a labeled test CSV
    Classify {
        /// A model.kants file written by `train`
        model: PathBuf,
        /// Test CSV with true labels
        test_csv: PathBuf,
        /// Neighbors consulted (default: the model's K)
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        label_column: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        ignore_columns: Vec<usize>,
    },
    /// Run a β–δ grid sweep and render final ant positions per run
    Sweep {
        dataset: PathBuf,
        /// β axis values, comma separated
        #[arg(long, value_delimiter = ',', default_value = "0.5,2,8,32,64")]
        betas: Vec<f64>,
        /// δ axis values, comma separated
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.2,1,2,4")]
        deltas: Vec<f64>,
        /// Seeded runs per (β,δ) point
        #[arg(long)]
        runs: Option<usize>,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        label_column: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        ignore_columns: Vec<usize>,
    },
    /// Render a training history file to one PPM image per frame
    Snapshot {
        /// A history.csv written by `train --snapshot-every`
        history: PathBuf,
    },
    /// Re-run the full split/train/score table for a dataset
    Reproduce {
        dataset: PathBuf,
        /// Independent split pairs per fraction
        #[arg(long, default_value_t = 3)]
        sets: usize,
        /// Seeded runs per split pair
        #[arg(long)]
        runs: Option<usize>,
        /// Row name stem (default: the dataset file stem)
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        label_column: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        ignore_columns: Vec<usize>,
    },
}

/// Minimal stderr logger so library warnings reach the user.
struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Info
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!(
                "{}: {}",
                record.level().as_str().to_lowercase(),
                record.args()
            );
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

fn run(cli: Cli) -> Result<(), KantsError> {
    let config = ConfigFile::load(cli.config.as_deref())?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::MakeSplits {
            dataset,
            fraction,
            sets,
            name,
            label_column,
            ignore_columns,
            seed,
        } => {
            let args = ParamArgs {
                seed,
                ..ParamArgs::default()
            };
            let settings = settings::resolve(&args, &config, None, None, out, 1)?;
            commands::make_splits(
                &dataset,
                label_column,
                &ignore_columns,
                fraction,
                sets,
                name.as_deref(),
                &settings,
            )
        }
        Command::Train {
            train_csv,
            params,
            snapshot_every,
            label_column,
            ignore_columns,
        } => {
            let settings = settings::resolve(&params, &config, None, snapshot_every, out, 1)?;
            commands::train(&train_csv, label_column, &ignore_columns, &settings)
        }
        Command::Classify {
            model,
            test_csv,
            k,
            label_column,
            ignore_columns,
        } => {
            let settings = settings::resolve(&ParamArgs::default(), &config, None, None, out, 1)?;
            // --k beats the config file beats the K stored in the model.
            let k = match k {
                Some(k) => Some(k),
                None => config.get::<usize>("k")?,
            };
            commands::classify(
                &model,
                &test_csv,
                label_column,
                &ignore_columns,
                k,
                &settings,
            )
        }
        Command::Sweep {
            dataset,
            betas,
            deltas,
            runs,
            params,
            label_column,
            ignore_columns,
        } => {
            let settings = settings::resolve(&params, &config, runs, None, out, 1)?;
            commands::run_sweep(
                &dataset,
                label_column,
                &ignore_columns,
                &betas,
                &deltas,
                &settings,
            )
        }
        Command::Snapshot { history } => {
            let settings = settings::resolve(&ParamArgs::default(), &config, None, None, out, 1)?;
            commands::snapshot(&history, &settings)
        }
        Command::Reproduce {
            dataset,
            sets,
            runs,
            name,
            params,
            label_column,
            ignore_columns,
        } => {
            let settings = settings::resolve(&params, &config, runs, None, out, 10)?;
            commands::run_reproduce(
                &dataset,
                label_column,
                &ignore_columns,
                sets,
                name.as_deref(),
                &settings,
            )
        }
    }
}

fn main() -> ExitCode {
    let _ = log::set_logger(&LOGGER);
    log::set_max_level(log::LevelFilter::Info);
    let cli = Cli::parse(); // clap itself exits 2 on usage errors
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                KantsError::InvalidParam(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
