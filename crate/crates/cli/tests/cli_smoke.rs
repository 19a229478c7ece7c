//! End-to-end smoke tests driving the compiled binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn xassoc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xassoc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output, context: &str) {
    assert!(
        out.status.success(),
        "{context} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_tiny_config(path: &Path) {
    // Small dims keep the smoke run fast.
    fs::write(
        path,
        concat!(
            "users = 60\n",
            "dim_t = 12\n",
            "dim_y = 10\n",
            "latent_dim = 4\n",
            "specific_dim = 4\n",
            "coarse_groups = 5\n",
            "videos_per_user = 4\n",
            "background_videos = 80\n",
            "seed = 11\n",
        ),
    )
    .unwrap();
}

#[test]
fn gen_train_eval_pipeline_completes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let config = dir.path().join("synth.toml");
    write_tiny_config(&config);

    let out = xassoc(&["gen", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    assert_success(&out, "gen");
    assert!(data.join("users.jsonl").exists());
    assert!(data.join("videos.jsonl").exists());
    assert!(data.join("interactions.jsonl").exists());
    assert!(data.join("manifest.json").exists());

    let model = dir.path().join("dca.json");
    let out = xassoc(&[
        "train", "--model", "dca",
        "--data", data.to_str().unwrap(),
        "--dim-t", "12", "--dim-y", "10",
        "--out", model.to_str().unwrap(),
        "--seed", "3", "--epochs", "5",
        "--mt", "2", "--mc", "6", "--my", "2",
    ]);
    assert_success(&out, "train");
    assert!(model.exists());
    assert!(dir.path().join("dca.json.manifest.json").exists());

    let preds = dir.path().join("preds.jsonl");
    let out = xassoc(&[
        "predict", "--model", model.to_str().unwrap(),
        "--direction", "t2y",
        "--data", data.to_str().unwrap(),
        "--dim-t", "12", "--dim-y", "10",
        "--out", preds.to_str().unwrap(),
    ]);
    assert_success(&out, "predict");

    let report = dir.path().join("assoc.json");
    let out = xassoc(&[
        "eval-assoc", "--preds", preds.to_str().unwrap(),
        "--data", data.to_str().unwrap(),
        "--dim-t", "12", "--dim-y", "10",
        "--out", report.to_str().unwrap(),
    ]);
    assert_success(&out, "eval-assoc");
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["platform"], "Y");
    assert!(parsed["mae"].as_f64().unwrap() >= 0.0);
    assert_eq!(parsed["format_version"], 1);
}

#[test]
fn same_seed_trains_byte_identical_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let config = dir.path().join("synth.toml");
    write_tiny_config(&config);
    assert_success(
        &xassoc(&["gen", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()]),
        "gen",
    );

    let train = |name: &str| {
        let model = dir.path().join(name);
        let out = xassoc(&[
            "train", "--model", "ma",
            "--data", data.to_str().unwrap(),
            "--dim-t", "12", "--dim-y", "10",
            "--out", model.to_str().unwrap(),
            "--seed", "9", "--epochs", "4", "--ma-hidden", "6",
        ]);
        assert_success(&out, "train");
        fs::read(&model).unwrap()
    };
    assert_eq!(train("a.json"), train("b.json"));
}

#[test]
fn eval_rec_report_carries_prf_fields() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let config = dir.path().join("synth.toml");
    write_tiny_config(&config);
    assert_success(
        &xassoc(&["gen", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()]),
        "gen",
    );
    let model = dir.path().join("lr.json");
    assert_success(
        &xassoc(&[
            "train", "--model", "lr",
            "--data", data.to_str().unwrap(),
            "--dim-t", "12", "--dim-y", "10",
            "--out", model.to_str().unwrap(),
            "--seed", "3", "--ridge-lambda", "0.1",
        ]),
        "train lr",
    );
    let report = dir.path().join("rec.json");
    let ranked = dir.path().join("ranked.jsonl");
    let out = xassoc(&[
        "eval-rec", "--model", model.to_str().unwrap(),
        "--data", data.to_str().unwrap(),
        "--dim-t", "12", "--dim-y", "10",
        "--k", "10", "--seed", "5",
        "--out", report.to_str().unwrap(),
        "--ranked-out", ranked.to_str().unwrap(),
    ]);
    assert_success(&out, "eval-rec");
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    for field in ["precision", "recall", "f_score"] {
        let v = parsed[field].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v), "{field} = {v}");
    }
    assert_eq!(parsed["k"], 10);

    // Ranked output is one JSON object per line with the expected fields.
    let first_line = fs::read_to_string(&ranked).unwrap().lines().next().unwrap().to_string();
    let line: serde_json::Value = serde_json::from_str(&first_line).unwrap();
    assert!(line["user"].is_string());
    assert!(line["ranked"].is_array());
    assert!(line["seed"].is_u64());
}

#[test]
fn measure_writes_both_platform_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let config = dir.path().join("synth.toml");
    write_tiny_config(&config);
    assert_success(
        &xassoc(&["gen", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()]),
        "gen",
    );
    let report = dir.path().join("measure.json");
    let out = xassoc(&[
        "measure", "--data", data.to_str().unwrap(),
        "--dim-t", "12", "--dim-y", "10",
        "--clusters", "4", "--random-samples", "50",
        "--out", report.to_str().unwrap(),
    ]);
    assert_success(&out, "measure");
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let reports = parsed["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["clustered_on"], "T");
    assert_eq!(reports[1]["clustered_on"], "Y");
}

#[test]
fn unknown_subcommand_and_bad_flags_fail_with_usage() {
    let out = xassoc(&["frobnicate"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("usage"), "stderr: {err}");

    let out = xassoc(&["train", "--model", "nonsense", "--data", "/nonexistent", "--out", "/tmp/x.json"]);
    assert!(!out.status.success());
}

#[test]
fn gen_is_byte_deterministic_and_seed_override_changes_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("synth.toml");
    write_tiny_config(&config);
    let gen_to = |name: &str, seed: Option<&str>| {
        let out_dir = dir.path().join(name);
        let mut args = vec![
            "gen".to_string(),
            "--config".into(), config.to_str().unwrap().into(),
            "--out".into(), out_dir.to_str().unwrap().into(),
        ];
        if let Some(s) = seed {
            args.push("--seed".into());
            args.push(s.into());
        }
        let arg_refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        assert_success(&xassoc(&arg_refs), "gen");
        fs::read(out_dir.join("users.jsonl")).unwrap()
    };
    let a = gen_to("a", None);
    let b = gen_to("b", None);
    let c = gen_to("c", Some("99"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}
