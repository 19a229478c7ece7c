//! `xassoc` — cross-platform association experiments from the command line.
//!
//! Typical flow:
//!   xassoc gen --config synth.toml --out data/
//!   xassoc train --model dca --data data/ --out dca.json --seed 7
//!   xassoc predict --model dca.json --direction t2y --data data/ --out preds.jsonl
//!   xassoc eval-assoc --preds preds.jsonl --data data/ --out assoc.json
//!   xassoc eval-rec --model dca.json --data data/ --k 10 --seed 7 --out rec.json
//!   xassoc measure --data data/ --clusters 10 --random-samples 200 --out measure.json
//!   xassoc baselines-compare --data data/ --out compare.json

mod commands;
mod manifest;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "xassoc", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every model-training surface.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Training epochs for gradient-trained models.
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    /// Minibatch size.
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 0.001)]
    pub learning_rate: f64,
    /// Weight-decay coefficient (autoencoder weight matrices).
    #[arg(long, default_value_t = 0.005)]
    pub lambda: f64,
    /// Hidden-layer L1 sparsity coefficient (autoencoder).
    #[arg(long, default_value_t = 0.0001)]
    pub mu: f64,
    /// Weight initialization scale.
    #[arg(long, default_value_t = 0.05)]
    pub init_scale: f64,
    /// Hidden split of the disparity-preserving layout.
    #[arg(long, default_value_t = 10)]
    pub mt: usize,
    #[arg(long, default_value_t = 80)]
    pub mc: usize,
    #[arg(long, default_value_t = 10)]
    pub my: usize,
    /// Hidden width of the fully-connected autoencoder variant.
    #[arg(long, default_value_t = 90)]
    pub ma_hidden: usize,
    /// Ridge regularization for the linear transfer baseline.
    #[arg(long, default_value_t = 0.01)]
    pub ridge_lambda: f64,
    /// Latent-attribute model: atoms, sparsity, alternations.
    #[arg(long, default_value_t = 40)]
    pub la_atoms: usize,
    #[arg(long, default_value_t = 0.05)]
    pub la_lambda: f64,
    #[arg(long, default_value_t = 20)]
    pub la_iters: usize,
    /// Hidden width of the MLP mapper.
    #[arg(long, default_value_t = 100)]
    pub mlp_hidden: usize,
}

/// Options shared by every dataset-loading surface.
#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Directory holding users.jsonl, videos.jsonl, interactions.jsonl.
    #[arg(long)]
    pub data: PathBuf,
    /// Expected topic dimensions.
    #[arg(long, default_value_t = 60)]
    pub dim_t: usize,
    #[arg(long, default_value_t = 80)]
    pub dim_y: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a TOML/JSON config.
    Gen {
        /// Generator config file (.toml or .json).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the dataset files and manifest.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a model on the training side of a user split.
    Train {
        /// Model kind: dca, ma, lr, la, or mlp.
        #[arg(long)]
        model: String,
        #[command(flatten)]
        data: DataArgs,
        /// Checkpoint output path.
        #[arg(long)]
        out: PathBuf,
        /// Master seed; split and training seeds derive from it.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Fraction of users used for training.
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[command(flatten)]
        model_args: ModelArgs,
    },
    /// Predict the unknown platform's representations for the test users.
    Predict {
        /// Trained checkpoint path.
        #[arg(long)]
        model: PathBuf,
        /// t2y or y2t.
        #[arg(long)]
        direction: String,
        #[command(flatten)]
        data: DataArgs,
        /// Output JSONL path.
        #[arg(long)]
        out: PathBuf,
        /// Input substitution for the unknown platform: mean or zeros.
        #[arg(long, default_value = "mean")]
        substitute: String,
        /// Predict for all users instead of just the held-out test side.
        #[arg(long, default_value_t = false)]
        all_users: bool,
    },
    /// Score predictions against the dataset's true representations.
    EvalAssoc {
        /// Predictions JSONL produced by `predict`.
        #[arg(long)]
        preds: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Report output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional flat CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Top-k recommendation evaluation on the test users.
    EvalRec {
        /// Trained checkpoint path.
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Master seed for candidate sampling.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Report output path.
        #[arg(long)]
        out: PathBuf,
        /// Input substitution: mean or zeros.
        #[arg(long, default_value = "mean")]
        substitute: String,
        /// Optional per-user ranked-list JSONL output.
        #[arg(long)]
        ranked_out: Option<PathBuf>,
        /// Optional flat CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Cluster users on each platform and report concentration ratios.
    Measure {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 10)]
        clusters: usize,
        /// Random size-matched groups per baseline estimate.
        #[arg(long, default_value_t = 200)]
        random_samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Report output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional flat CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Train and evaluate all five models on one dataset split.
    BaselinesCompare {
        #[command(flatten)]
        data: DataArgs,
        /// Report output path.
        #[arg(long)]
        out: PathBuf,
        /// Master seed; per-run seeds derive from it.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of training seeds to average over.
        #[arg(long, default_value_t = 6)]
        seeds: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        /// Input substitution: mean or zeros.
        #[arg(long, default_value = "mean")]
        substitute: String,
        #[command(flatten)]
        model_args: ModelArgs,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { config, out, seed } => commands::gen(&config, &out, seed),
        Command::Train { model, data, out, seed, train_fraction, model_args } => {
            commands::train(&model, &data, &out, seed, train_fraction, &model_args)
        }
        Command::Predict { model, direction, data, out, substitute, all_users } => {
            commands::predict(&model, &direction, &data, &out, &substitute, all_users)
        }
        Command::EvalAssoc { preds, data, out, csv } => {
            commands::eval_assoc(&preds, &data, &out, csv.as_deref())
        }
        Command::EvalRec { model, data, k, seed, out, substitute, ranked_out, csv } => {
            commands::eval_rec(
                &model,
                &data,
                k,
                seed,
                &out,
                &substitute,
                ranked_out.as_deref(),
                csv.as_deref(),
            )
        }
        Command::Measure { data, clusters, random_samples, seed, out, csv } => {
            commands::measure(&data, clusters, random_samples, seed, &out, csv.as_deref())
        }
        Command::BaselinesCompare {
            data,
            out,
            seed,
            seeds,
            k,
            train_fraction,
            substitute,
            model_args,
        } => commands::baselines_compare(
            &data,
            &out,
            seed,
            seeds,
            k,
            train_fraction,
            &substitute,
            &model_args,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
