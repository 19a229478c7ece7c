use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use xassoc_core::metrics::{measure_concentration, mae_rmse, ConcentrationReport};
use xassoc_core::models::{Direction, ModelKind, Substitution, TrainConfig, TrainedModel};
use xassoc_core::numerics::{AdamConfig, RngStream};
use xassoc_core::pipeline::{
    compare_models, eval_association, eval_recommendation, predict_users, train_model,
    ModelOptions,
};
use xassoc_core::repr::{
    gen_synthetic, load_dataset, split_train_test, write_dataset, write_manifest, Dataset,
    Platform, PlatformDims, SyntheticConfig,
};

use crate::manifest::RunTimer;
use crate::{DataArgs, ModelArgs};

fn load_data(args: &DataArgs) -> Result<Dataset> {
    let dims = PlatformDims { dim_t: args.dim_t, dim_y: args.dim_y };
    let dataset = load_dataset(
        &args.data.join("users.jsonl"),
        &args.data.join("videos.jsonl"),
        &args.data.join("interactions.jsonl"),
        dims,
    )
    .with_context(|| format!("loading dataset from {}", args.data.display()))?;
    Ok(dataset)
}

/// Stage seeds all derive from the master seed by stable hashing, so stages
/// can be re-run independently and still agree.
fn stage_seed(master: u64, stage: &str) -> u64 {
    RngStream::new(master).derive(stage).seed()
}

fn model_options(args: &ModelArgs, train_seed: u64) -> ModelOptions<f64> {
    ModelOptions {
        train: TrainConfig {
            epochs: args.epochs,
            batch_size: args.batch_size,
            adam: AdamConfig { learning_rate: args.learning_rate, ..AdamConfig::default() },
            lambda: args.lambda,
            mu: args.mu,
            init_scale: args.init_scale,
            seed: train_seed,
        },
        dca_split: (args.mt, args.mc, args.my),
        ma_hidden: args.ma_hidden,
        ridge_lambda: args.ridge_lambda,
        la_atoms: args.la_atoms,
        la_lambda: args.la_lambda,
        la_iters: args.la_iters,
        mlp_hidden: args.mlp_hidden,
    }
}

pub fn gen(config_path: &Path, out: &Path, seed_override: Option<u64>) -> Result<()> {
    let timer = RunTimer::start("gen");
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let mut config: SyntheticConfig = match config_path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text)?,
        _ => toml::from_str(&text)?,
    };
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let dataset = gen_synthetic(&config)?;
    write_dataset(&dataset, out)?;
    write_manifest(&config, out)?;
    println!(
        "generated {} users, {} videos into {}",
        dataset.user_count(),
        dataset.video_count(),
        out.display()
    );
    timer.finish(out, Some(config.seed), serde_json::to_value(&config)?)?;
    Ok(())
}

pub fn train(
    model: &str,
    data: &DataArgs,
    out: &Path,
    seed: u64,
    train_fraction: f64,
    model_args: &ModelArgs,
) -> Result<()> {
    let timer = RunTimer::start("train");
    let kind: ModelKind = model.parse()?;
    let dataset = load_data(data)?;
    let split_seed = stage_seed(seed, "split");
    let (train_set, _) = split_train_test(&dataset, train_fraction, split_seed)?;
    let opts = model_options(model_args, stage_seed(seed, "train"));

    let trained = train_model::<f64>(kind, &train_set.users, &opts)?;
    let mut extra = BTreeMap::new();
    extra.insert("master_seed".to_string(), json!(seed));
    extra.insert("split_seed".to_string(), json!(split_seed));
    extra.insert("train_fraction".to_string(), json!(train_fraction));
    trained.save_with_extra_hyper(out, extra)?;
    println!(
        "trained {} on {} users -> {}",
        kind.tag(),
        train_set.user_count(),
        out.display()
    );
    timer.finish(
        out,
        Some(seed),
        json!({
            "model": model,
            "data": data.data.display().to_string(),
            "train_fraction": train_fraction,
            "model_args": format!("{model_args:?}"),
        }),
    )?;
    Ok(())
}

/// One line of the predictions JSONL.
#[derive(Serialize, Deserialize)]
struct PredLine {
    user: String,
    platform: Platform,
    predicted: Vec<f64>,
}

/// Reconstructs the train/test split a checkpoint was trained under.
fn split_from_checkpoint(
    dataset: &Dataset,
    hyper: &BTreeMap<String, Value>,
) -> Result<(Dataset, Dataset)> {
    let split_seed = hyper
        .get("split_seed")
        .and_then(Value::as_u64)
        .ok_or_else(|| anyhow!("checkpoint lacks split_seed; was it written by `train`?"))?;
    let fraction = hyper
        .get("train_fraction")
        .and_then(Value::as_f64)
        .ok_or_else(|| anyhow!("checkpoint lacks train_fraction"))?;
    Ok(split_train_test(dataset, fraction, split_seed)?)
}

pub fn predict(
    model_path: &Path,
    direction: &str,
    data: &DataArgs,
    out: &Path,
    substitute: &str,
    all_users: bool,
) -> Result<()> {
    let timer = RunTimer::start("predict");
    let direction: Direction = direction.parse()?;
    let substitution: Substitution = substitute.parse()?;
    let (model, checkpoint) = TrainedModel::<f64>::load(model_path)?;
    let dataset = load_data(data)?;
    let users = if all_users {
        dataset.users.clone()
    } else {
        split_from_checkpoint(&dataset, &checkpoint.hyper)?.1.users
    };
    if users.is_empty() {
        bail!("no users to predict for");
    }

    let platform = match direction {
        Direction::TwitterToYoutube => Platform::Youtube,
        Direction::YoutubeToTwitter => Platform::Twitter,
    };
    let preds = predict_users(&model, &users, direction, substitution)?;
    let mut file = fs::File::create(out)?;
    for (user, predicted) in users.iter().zip(preds) {
        let line = serde_json::to_string(&PredLine {
            user: user.id.clone(),
            platform,
            predicted,
        })?;
        writeln!(file, "{line}")?;
    }
    println!("wrote {} predictions to {}", users.len(), out.display());
    timer.finish(
        out,
        None,
        json!({
            "model": model_path.display().to_string(),
            "direction": direction.tag(),
            "substitute": substitute,
            "all_users": all_users,
        }),
    )?;
    Ok(())
}

pub fn eval_assoc(preds: &Path, data: &DataArgs, out: &Path, csv: Option<&Path>) -> Result<()> {
    let timer = RunTimer::start("eval-assoc");
    let dataset = load_data(data)?;
    let by_id: BTreeMap<&str, &xassoc_core::repr::AlignedUser> =
        dataset.users.iter().map(|u| (u.id.as_str(), u)).collect();

    let text = fs::read_to_string(preds)?;
    let mut platform = None;
    let mut predictions = Vec::new();
    let mut truths = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: PredLine = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: malformed prediction", preds.display(), idx + 1))?;
        let user = by_id.get(parsed.user.as_str()).ok_or_else(|| {
            anyhow!("{}:{}: unknown user {}", preds.display(), idx + 1, parsed.user)
        })?;
        match platform {
            None => platform = Some(parsed.platform),
            Some(p) if p == parsed.platform => {}
            Some(p) => bail!(
                "{}:{}: mixed platforms in predictions ({} vs {})",
                preds.display(),
                idx + 1,
                p,
                parsed.platform
            ),
        }
        truths.push(user.repr(parsed.platform).entries.clone());
        predictions.push(parsed.predicted);
    }
    let platform = platform.ok_or_else(|| anyhow!("no predictions in {}", preds.display()))?;
    let dim = dataset.dims.dim(platform);
    let report = mae_rmse(platform, &predictions, &truths, dim)?;
    fs::write(out, serde_json::to_string_pretty(&report)?)?;
    if let Some(csv_path) = csv {
        fs::write(csv_path, report.to_csv())?;
    }
    println!(
        "platform {}: mae={:.6} rmse={:.6} over {} users -> {}",
        report.platform.tag(),
        report.mae,
        report.rmse,
        report.users,
        out.display()
    );
    timer.finish(
        out,
        None,
        json!({ "preds": preds.display().to_string(), "data": data.data.display().to_string() }),
    )?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn eval_rec(
    model_path: &Path,
    data: &DataArgs,
    k: usize,
    seed: u64,
    out: &Path,
    substitute: &str,
    ranked_out: Option<&Path>,
    csv: Option<&Path>,
) -> Result<()> {
    let timer = RunTimer::start("eval-rec");
    let substitution: Substitution = substitute.parse()?;
    let (model, checkpoint) = TrainedModel::<f64>::load(model_path)?;
    let dataset = load_data(data)?;
    let (_, test_set) = split_from_checkpoint(&dataset, &checkpoint.hyper)?;

    let rec_seed = stage_seed(seed, "rec");
    let (report, lines) =
        eval_recommendation(&model, &test_set.users, &dataset, k, rec_seed, substitution)?;
    fs::write(out, serde_json::to_string_pretty(&report)?)?;
    if let Some(path) = ranked_out {
        let mut file = fs::File::create(path)?;
        for line in &lines {
            writeln!(file, "{}", serde_json::to_string(line)?)?;
        }
    }
    if let Some(path) = csv {
        fs::write(path, report.to_csv())?;
    }
    println!(
        "top-{k}: precision={:.4} recall={:.4} f_score={:.4} over {} users -> {}",
        report.precision,
        report.recall,
        report.f_score,
        report.users,
        out.display()
    );
    timer.finish(
        out,
        Some(seed),
        json!({
            "model": model_path.display().to_string(),
            "k": k,
            "substitute": substitute,
        }),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct MeasureReport {
    format_version: u32,
    clusters: usize,
    random_samples: usize,
    reports: Vec<ConcentrationReport>,
}

pub fn measure(
    data: &DataArgs,
    clusters: usize,
    random_samples: usize,
    seed: u64,
    out: &Path,
    csv: Option<&Path>,
) -> Result<()> {
    let timer = RunTimer::start("measure");
    let dataset = load_data(data)?;
    let mut reports = Vec::new();
    for platform in [Platform::Twitter, Platform::Youtube] {
        let report = measure_concentration(
            &dataset.users,
            platform,
            clusters,
            random_samples,
            stage_seed(seed, &format!("measure_{}", platform.tag())),
        )?;
        println!(
            "clustered on {}: origin mean ratio {:.4}, other platform {:.4}",
            platform.tag(),
            report.origin.mean_ratio,
            report.other.mean_ratio
        );
        reports.push(report);
    }
    let full = MeasureReport {
        format_version: 1,
        clusters,
        random_samples,
        reports,
    };
    fs::write(out, serde_json::to_string_pretty(&full)?)?;
    if let Some(path) = csv {
        let mut text = String::from("metric,name,value\n");
        for r in &full.reports {
            text.push_str(&format!(
                "concentration_ratio,clustered_{}_origin,{}\n",
                r.clustered_on.tag(),
                r.origin.mean_ratio
            ));
            text.push_str(&format!(
                "concentration_ratio,clustered_{}_other,{}\n",
                r.clustered_on.tag(),
                r.other.mean_ratio
            ));
        }
        fs::write(path, text)?;
    }
    timer.finish(
        out,
        Some(seed),
        json!({ "clusters": clusters, "random_samples": random_samples }),
    )?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn baselines_compare(
    data: &DataArgs,
    out: &Path,
    seed: u64,
    n_seeds: usize,
    k: usize,
    train_fraction: f64,
    substitute: &str,
    model_args: &ModelArgs,
) -> Result<()> {
    let timer = RunTimer::start("baselines-compare");
    if n_seeds == 0 {
        bail!("--seeds must be >= 1");
    }
    let substitution: Substitution = substitute.parse()?;
    let dataset = load_data(data)?;
    let (train_set, test_set) =
        split_train_test(&dataset, train_fraction, stage_seed(seed, "split"))?;
    let opts = model_options(model_args, 0);
    let seeds: Vec<u64> = (0..n_seeds as u64)
        .map(|i| RngStream::new(seed).derive_indexed("train", i).seed())
        .collect();

    let kinds = [ModelKind::Lr, ModelKind::La, ModelKind::Mlp, ModelKind::Ma, ModelKind::Dca];
    let report = compare_models::<f64>(
        &kinds,
        &train_set.users,
        &test_set.users,
        &dataset,
        &opts,
        &seeds,
        k,
        substitution,
    )?;

    println!("model     mae_y     rmse_y    mae_t     rmse_t    p@{k:<4} r@{k:<4} f@{k}");
    for row in &report.rows {
        println!(
            "{:<9} {:<9.6} {:<9.6} {:<9.6} {:<9.6} {:<6.4} {:<6.4} {:<6.4}",
            row.model.tag(),
            row.mae_y,
            row.rmse_y,
            row.mae_t,
            row.rmse_t,
            row.precision.unwrap_or(f64::NAN),
            row.recall.unwrap_or(f64::NAN),
            row.f_score.unwrap_or(f64::NAN),
        );
    }
    fs::write(out, serde_json::to_string_pretty(&report)?)?;
    timer.finish(
        out,
        Some(seed),
        json!({
            "seeds": n_seeds,
            "k": k,
            "train_fraction": train_fraction,
            "substitute": substitute,
            "model_args": format!("{model_args:?}"),
        }),
    )?;
    Ok(())
}

/// Association report used by eval-assoc; alias so the eval code reads
/// naturally.
#[allow(unused)]
type AssocReport = xassoc_core::metrics::AssocReport;
