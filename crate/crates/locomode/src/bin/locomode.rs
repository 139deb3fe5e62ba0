//! Thin CLI over the library: every subcommand maps to one stage of the
//! classification stack.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use locomode::commands::{
    cmd_evaluate, cmd_gen_synthetic, cmd_preprocess, cmd_table2_check, cmd_train, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "locomode",
    about = "Transportation-mode classification from smartphone motion sensors",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Key-value config file; omitted keys fall back to defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed override; equal seeds give bit-identical runs.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> locomode::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::read(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic ingestion-ready corpus (hip/bag/torso/hand).
    GenSynthetic {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory for the corpus.
        #[arg(long)]
        out: PathBuf,
        /// Blocks per class per position set.
        #[arg(long)]
        blocks_per_class: Option<usize>,
    },
    /// Ingest manifests and run the preprocessing pipeline.
    Preprocess {
        #[command(flatten)]
        config: ConfigArgs,
        /// Training-split manifest (repeatable, one per phone position).
        #[arg(long = "manifest", required = true)]
        manifests: Vec<PathBuf>,
        /// Validation-split manifest (repeatable).
        #[arg(long = "val-manifest")]
        val_manifests: Vec<PathBuf>,
        /// Test-split manifest (repeatable).
        #[arg(long = "test-manifest")]
        test_manifests: Vec<PathBuf>,
        /// Output directory for dataset and normalizer files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train on processed datasets with best-on-validation checkpointing.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Processed training dataset (train.mnds).
        #[arg(long)]
        dataset: PathBuf,
        /// Processed validation dataset (val.mnds).
        #[arg(long)]
        val_dataset: PathBuf,
        /// Output directory for checkpoints and history.csv.
        #[arg(long)]
        out: PathBuf,
        /// Epoch-count override.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Evaluate a checkpoint: report.csv, confusion.csv, predictions.
    Evaluate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Checkpoint file to evaluate.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Processed dataset to evaluate on.
        #[arg(long)]
        dataset: PathBuf,
        /// Output directory for the reports.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute metrics from the bundled reference confusion matrix.
    Table2Check {
        /// Optional directory for confusion.csv and report.csv copies.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run() -> locomode::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::GenSynthetic {
            config,
            out,
            blocks_per_class,
        } => {
            let mut cfg = config.resolve()?;
            if let Some(bpc) = blocks_per_class {
                cfg.blocks_per_class = bpc;
            }
            cmd_gen_synthetic(&cfg, &out)?;
        }
        Command::Preprocess {
            config,
            manifests,
            val_manifests,
            test_manifests,
            out,
        } => {
            let cfg = config.resolve()?;
            cmd_preprocess(&manifests, &val_manifests, &test_manifests, &cfg, &out)?;
        }
        Command::Train {
            config,
            dataset,
            val_dataset,
            out,
            epochs,
        } => {
            let mut cfg = config.resolve()?;
            if let Some(epochs) = epochs {
                cfg.epochs = epochs;
            }
            cmd_train(&dataset, &val_dataset, &cfg, &out)?;
        }
        Command::Evaluate {
            config,
            checkpoint,
            dataset,
            out,
        } => {
            let cfg = config.resolve()?;
            cmd_evaluate(&checkpoint, &dataset, &cfg, &out)?;
        }
        Command::Table2Check { out } => {
            cmd_table2_check(out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
