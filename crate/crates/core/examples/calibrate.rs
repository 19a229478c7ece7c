//! Temporary calibration harness (not part of the deliverable).

use std::time::Instant;

use xassoc_core::metrics::measure_concentration;
use xassoc_core::models::{ModelKind, Substitution, TrainConfig};
use xassoc_core::pipeline::{compare_models, train_model, eval_association, ModelOptions};
use xassoc_core::models::Direction;
use xassoc_core::repr::{gen_synthetic, split_train_test, Platform, SyntheticConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(|s| s.as_str()).unwrap_or("assoc");
    let delta: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let noise: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.02);
    let epochs: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(60);
    let users: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let n_seeds: usize = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(2);

    let cfg = SyntheticConfig {
        users,
        disparity: delta,
        noise,
        seed: 20250810,
        ..SyntheticConfig::default()
    };

    match mode {
        "assoc" => {
            let t0 = Instant::now();
            let dataset = gen_synthetic(&cfg).unwrap();
            println!("gen: {:?}", t0.elapsed());
            let (train, test) = split_train_test(&dataset, 0.8, 7).unwrap();

            // Ridge lambda grid, most charitable to the linear baseline:
            // report the best TEST-side MAE.
            let mut best = (f64::INFINITY, 0.0);
            for lam in [0.01, 0.1, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0] {
                let opts = ModelOptions::<f64> {
                    ridge_lambda: lam,
                    ..ModelOptions::default()
                };
                let model = train_model(ModelKind::Lr, &train.users, &opts).unwrap();
                let rep = eval_association(&model, &test.users, Direction::TwitterToYoutube, Substitution::Mean).unwrap();
                println!("  lr lambda={lam}: mae_y={:.6} rmse_y={:.6}", rep.mae, rep.rmse);
                if rep.mae < best.0 { best = (rep.mae, lam); }
            }
            println!("best lr: mae={:.6} at lambda={}", best.0, best.1);

            let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| 100 + i).collect();
            let lr: f64 = std::env::var("CAL_LR").ok().and_then(|s| s.parse().ok()).unwrap_or(0.001);
            let lam: f64 = std::env::var("CAL_LAMBDA").ok().and_then(|s| s.parse().ok()).unwrap_or(0.005);
            let mu: f64 = std::env::var("CAL_MU").ok().and_then(|s| s.parse().ok()).unwrap_or(0.0001);
            let mlp_hidden: usize = std::env::var("CAL_MLP_HIDDEN").ok().and_then(|s| s.parse().ok()).unwrap_or(100);
            let mut train_cfg = TrainConfig { epochs, lambda: lam, mu, ..TrainConfig::default() };
            train_cfg.adam.learning_rate = lr;
            let opts = ModelOptions::<f64> {
                train: train_cfg,
                ridge_lambda: best.1,
                mlp_hidden,
                ..ModelOptions::default()
            };
            println!("adam lr = {lr}, lambda = {lam}, mu = {mu}, mlp_hidden = {mlp_hidden}");
            // Train-side error for LR and MLP, to separate optimization
            // failure from generalization gap.
            for kind in [ModelKind::Lr, ModelKind::Mlp] {
                let mut o = opts.clone();
                o.train.seed = 100;
                let model = train_model(kind, &train.users, &o).unwrap();
                let tr = eval_association(&model, &train.users, Direction::TwitterToYoutube, Substitution::Mean).unwrap();
                let te = eval_association(&model, &test.users, Direction::TwitterToYoutube, Substitution::Mean).unwrap();
                println!("  {kind:?}: train mae_y={:.6} test mae_y={:.6}", tr.mae, te.mae);
            }
            // Error-floor probes: mean predictor, and a "clean shared view"
            // ridge fit on the delta=0/noise=0 regeneration of the same seed
            // (user draws align across configs with the same seed).
            {
                let mean_y = xassoc_core::repr::platform_mean(&train.users, Platform::Youtube).unwrap();
                let mut mae_sum = 0.0;
                for u in &test.users {
                    mae_sum += mean_y.iter().zip(&u.youtube.entries).map(|(p, t)| (p - t).abs()).sum::<f64>() / 80.0;
                }
                println!("  mean-predictor: test mae_y={:.6}", mae_sum / test.users.len() as f64);

                let clean_cfg = SyntheticConfig { disparity: 0.0, noise: 0.0, ..cfg.clone() };
                let clean = gen_synthetic(&clean_cfg).unwrap();
                use xassoc_core::pipeline::user_matrix;
                use xassoc_core::models::ridge_fit;
                let by_id: std::collections::BTreeMap<&str, usize> =
                    clean.users.iter().enumerate().map(|(i, u)| (u.id.as_str(), i)).collect();
                let clean_t_train: Vec<_> = train.users.iter().map(|u| clean.users[by_id[u.id.as_str()]].clone()).collect();
                let ut_clean = user_matrix::<f64>(&clean_t_train, Platform::Twitter).unwrap();
                let uy_noisy = user_matrix::<f64>(&train.users, Platform::Youtube).unwrap();
                let oracle = ridge_fit(&ut_clean, &uy_noisy, 0.01).unwrap();
                let mut mae_sum = 0.0;
                for u in &test.users {
                    let clean_u = &clean.users[by_id[u.id.as_str()]];
                    let pred = oracle.predict(&clean_u.twitter.entries).unwrap();
                    mae_sum += pred.iter().zip(&u.youtube.entries).map(|(p, t)| (p - t).abs()).sum::<f64>() / 80.0;
                }
                println!("  clean-shared-oracle lr: test mae_y={:.6}", mae_sum / test.users.len() as f64);
            }
            // Piecewise-linear headroom probe: cluster train users on the
            // social platform, fit one ridge map per cluster, route test
            // users to the nearest centroid's map.
            {
                use xassoc_core::metrics::kmeans;
                use xassoc_core::pipeline::user_matrix;
                use xassoc_core::models::ridge_fit;
                let kc: usize = std::env::var("CAL_PIECES").ok().and_then(|s| s.parse().ok()).unwrap_or(8);
                let reps: Vec<Vec<f64>> = train.users.iter().map(|u| u.twitter.entries.clone()).collect();
                let clustering = kmeans(&reps, kc, 5, 100).unwrap();
                let mut maps = Vec::new();
                for c in 0..kc {
                    let members: Vec<_> = train.users.iter().zip(&clustering.assignments)
                        .filter(|(_, &a)| a == c).map(|(u, _)| u.clone()).collect();
                    if members.len() < 5 { maps.push(None); continue; }
                    let ut = user_matrix::<f64>(&members, Platform::Twitter).unwrap();
                    let uy = user_matrix::<f64>(&members, Platform::Youtube).unwrap();
                    maps.push(Some(ridge_fit(&ut, &uy, 0.05).unwrap()));
                }
                let global_ut = user_matrix::<f64>(&train.users, Platform::Twitter).unwrap();
                let global_uy = user_matrix::<f64>(&train.users, Platform::Youtube).unwrap();
                let global = ridge_fit(&global_ut, &global_uy, best.1).unwrap();
                let dist = |a: &[f64], b: &[f64]| -> f64 {
                    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()
                };
                let mut mae_sum = 0.0;
                for u in &test.users {
                    let x = &u.twitter.entries;
                    let c = (0..kc).min_by(|&i, &j| {
                        dist(x, &clustering.centroids[i]).partial_cmp(&dist(x, &clustering.centroids[j])).unwrap()
                    }).unwrap();
                    let pred = match &maps[c] {
                        Some(m) => m.predict(x).unwrap(),
                        None => global.predict(x).unwrap(),
                    };
                    let mae: f64 = pred.iter().zip(&u.youtube.entries).map(|(p, t)| (p - t).abs()).sum::<f64>() / 80.0;
                    mae_sum += mae;
                }
                println!("  piecewise-lr ({kc} pieces): test mae_y={:.6}", mae_sum / test.users.len() as f64);
            }
            let t1 = Instant::now();
            let report = compare_models(
                &[ModelKind::Lr, ModelKind::Mlp, ModelKind::Ma, ModelKind::Dca],
                &train.users,
                &test.users,
                &dataset,
                &opts,
                &seeds,
                10,
                Substitution::Mean,
            )
            .unwrap();
            println!("compare ({} seeds, epochs {epochs}): {:?}", seeds.len(), t1.elapsed());
            for row in &report.rows {
                println!(
                    "  {:?}: mae_y={:.6} rmse_y={:.6} mae_t={:.6} rmse_t={:.6} p={:.3?} f={:.3?}",
                    row.model, row.mae_y, row.rmse_y, row.mae_t, row.rmse_t, row.precision, row.f_score
                );
            }
            let get = |k: ModelKind| report.rows.iter().find(|r| r.model == k).unwrap();
            let lr = get(ModelKind::Lr).mae_y;
            println!(
                "ratios vs LR: mlp={:.4} ma={:.4} dca={:.4}; dca/ma={:.4}",
                get(ModelKind::Mlp).mae_y / lr,
                get(ModelKind::Ma).mae_y / lr,
                get(ModelKind::Dca).mae_y / lr,
                get(ModelKind::Dca).mae_y / get(ModelKind::Ma).mae_y,
            );
        }
        "mlp" => {
            let dataset = gen_synthetic(&cfg).unwrap();
            let (train, test) = split_train_test(&dataset, 0.8, 7).unwrap();
            use xassoc_core::pipeline::user_matrix;
            let u_t = user_matrix::<f64>(&train.users, Platform::Twitter).unwrap();
            let u_y = user_matrix::<f64>(&train.users, Platform::Youtube).unwrap();
            let lr: f64 = std::env::var("CAL_LR").ok().and_then(|s| s.parse().ok()).unwrap_or(0.01);
            let hidden: usize = std::env::var("CAL_MLP_HIDDEN").ok().and_then(|s| s.parse().ok()).unwrap_or(100);
            let batch: usize = std::env::var("CAL_BATCH").ok().and_then(|s| s.parse().ok()).unwrap_or(64);
            let mut train_cfg = TrainConfig { epochs, batch_size: batch, seed: 100, ..TrainConfig::default() };
            train_cfg.adam.learning_rate = lr;
            let t0 = Instant::now();
            let model = xassoc_core::models::mlp_fit(&u_t, &u_y, hidden, &train_cfg).unwrap();
            println!("mlp fit ({epochs} epochs, lr {lr}, hidden {hidden}, batch {batch}): {:?}", t0.elapsed());
            for (e, l) in model.loss_trace.iter().enumerate() {
                if e % (epochs / 10).max(1) == 0 || e == epochs - 1 {
                    println!("  epoch {e}: train loss/ex {l:.8}");
                }
            }
            let trained = xassoc_core::models::TrainedModel::Mlp { t2y: model.clone(), y2t: model };
            let rep = eval_association(&trained, &test.users, Direction::TwitterToYoutube, Substitution::Mean).unwrap();
            println!("  test mae_y={:.6}", rep.mae);
        }
        "ae" => {
            let dataset = gen_synthetic(&cfg).unwrap();
            let (train, test) = split_train_test(&dataset, 0.8, 7).unwrap();
            let lr: f64 = std::env::var("CAL_LR").ok().and_then(|s| s.parse().ok()).unwrap_or(0.01);
            let lam: f64 = std::env::var("CAL_LAMBDA").ok().and_then(|s| s.parse().ok()).unwrap_or(1e-5);
            let mu: f64 = std::env::var("CAL_MU").ok().and_then(|s| s.parse().ok()).unwrap_or(1e-6);
            let dca: bool = std::env::var("CAL_DCA").map(|s| s == "1").unwrap_or(true);
            let batch: usize = std::env::var("CAL_BATCH").ok().and_then(|s| s.parse().ok()).unwrap_or(64);
            let mut train_cfg = TrainConfig { epochs, batch_size: batch, lambda: lam, mu, seed: 100, ..TrainConfig::default() };
            train_cfg.adam.learning_rate = lr;
            let split: Vec<usize> = std::env::var("CAL_SPLIT").unwrap_or_default()
                .split(',').filter_map(|s| s.parse().ok()).collect();
            let ma_hidden: usize = std::env::var("CAL_MA_HIDDEN").ok().and_then(|s| s.parse().ok()).unwrap_or(90);
            let dca_split = if split.len() == 3 { (split[0], split[1], split[2]) } else { (10, 80, 10) };
            let opts = ModelOptions::<f64> { train: train_cfg, dca_split, ma_hidden, ..ModelOptions::default() };
            println!("dca_split {dca_split:?} ma_hidden {ma_hidden}");
            let kind = if dca { ModelKind::Dca } else { ModelKind::Ma };
            let t0 = Instant::now();
            let model = if std::env::var("CAL_ALL_AVG").map(|s| s == "1").unwrap_or(false) {
                // Dedicated-condition probe: every example mean-substituted on Y.
                use xassoc_core::repr::{augment_training_set, platform_mean, AugmentKind, AugmentedExample};
                let mean_t = platform_mean(&train.users, Platform::Twitter).unwrap();
                let mean_y = platform_mean(&train.users, Platform::Youtube).unwrap();
                let base: Vec<AugmentedExample<f64>> =
                    augment_training_set(&train.users, &mean_t, &mean_y, opts.train.seed).unwrap();
                let forced: Vec<AugmentedExample<f64>> = base.into_iter().map(|mut e| {
                    e.input_t = e.target_t.clone();
                    e.input_y = mean_y.clone();
                    e.kind = AugmentKind::RealTAvgY;
                    e
                }).collect();
                let layout = xassoc_core::models::AutoencoderLayout {
                    n_t: 60, n_y: 80,
                    m_t: opts.dca_split.0, m_c: opts.dca_split.1, m_y: opts.dca_split.2,
                };
                let ae = xassoc_core::models::MaskedAutoencoder::train(&forced, layout, &opts.train).unwrap();
                xassoc_core::models::TrainedModel::Autoencoder {
                    model: ae, dca: true,
                    mean_t: mean_t.clone(), mean_y: mean_y.clone(),
                }
            } else {
                train_model::<f64>(kind, &train.users, &opts).unwrap()
            };
            println!("{kind:?} fit ({epochs} epochs, lr {lr}, lambda {lam}, mu {mu}): {:?}", t0.elapsed());
            if let xassoc_core::models::TrainedModel::Autoencoder { model: ae, .. } = &model {
                for (e, l) in ae.loss_trace.iter().enumerate() {
                    if e % (epochs / 10).max(1) == 0 || e == epochs - 1 {
                        println!("  epoch {e}: train loss/ex {l:.8}");
                    }
                }
            }
            let rep = eval_association(&model, &test.users, Direction::TwitterToYoutube, Substitution::Mean).unwrap();
            println!("  test mae_y={:.6}", rep.mae);
        }
        "sweep" => {
            let dataset = gen_synthetic(&cfg).unwrap();
            let (train, test) = split_train_test(&dataset, 0.8, 7).unwrap();
            let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| 100 + i).collect();
            let ae_epochs: usize = std::env::var("CAL_AE_EPOCHS").ok().and_then(|s| s.parse().ok()).unwrap_or(1200);
            let mlp_epochs: usize = std::env::var("CAL_MLP_EPOCHS").ok().and_then(|s| s.parse().ok()).unwrap_or(800);
            let split: Vec<usize> = std::env::var("CAL_SPLIT").unwrap_or_default()
                .split(',').filter_map(|s| s.parse().ok()).collect();
            let dca_split = if split.len() == 3 { (split[0], split[1], split[2]) } else { (12, 40, 12) };
            let ma_hidden: usize = std::env::var("CAL_MA_HIDDEN").ok().and_then(|s| s.parse().ok()).unwrap_or(64);
            println!("sweep: delta={delta} noise={noise} users={users} seeds={seeds:?} dca={dca_split:?} ma={ma_hidden} ae_epochs={ae_epochs} mlp_epochs={mlp_epochs}");
            let t0 = Instant::now();
            let mut means = std::collections::BTreeMap::new();
            for kind in [ModelKind::Lr, ModelKind::Mlp, ModelKind::Ma, ModelKind::Dca] {
                let mut sum = 0.0;
                for &seed in &seeds {
                    let mut o = ModelOptions::<f64> {
                        train: TrainConfig {
                            epochs: if kind == ModelKind::Mlp { mlp_epochs } else { ae_epochs },
                            batch_size: 64,
                            lambda: 1e-5,
                            mu: 1e-6,
                            seed,
                            ..TrainConfig::default()
                        },
                        dca_split,
                        ma_hidden,
                        ridge_lambda: 0.01,
                        ..ModelOptions::default()
                    };
                    o.train.adam.learning_rate = if kind == ModelKind::Mlp { 0.01 } else { 0.02 };
                    let model = train_model::<f64>(kind, &train.users, &o).unwrap();
                    let rep = eval_association(&model, &test.users, Direction::TwitterToYoutube, Substitution::Mean).unwrap();
                    println!("  {kind:?} seed {seed}: mae_y={:.6}", rep.mae);
                    sum += rep.mae;
                }
                means.insert(format!("{kind:?}"), sum / seeds.len() as f64);
            }
            println!("elapsed {:?}", t0.elapsed());
            let lr = means["Lr"];
            for (k, v) in &means {
                println!("MEAN {k}: {v:.6} (ratio {:.4})", v / lr);
            }
            println!("VERDICT: mlp<=0.95lr {} | ma<=0.95lr {} | dca<=0.95lr {} | dca<=ma {}",
                means["Mlp"] <= 0.95 * lr, means["Ma"] <= 0.95 * lr,
                means["Dca"] <= 0.95 * lr, means["Dca"] <= means["Ma"]);
        }
        "measure" => {
            let dataset = gen_synthetic(&cfg).unwrap();
            let t0 = Instant::now();
            let report = measure_concentration(&dataset.users, Platform::Twitter, 10, 200, 11).unwrap();
            println!(
                "clustered on T (delta={delta}, noise={noise}): origin mean ratio {:.4}, other {:.4} ({:?})",
                report.origin.mean_ratio, report.other.mean_ratio, t0.elapsed()
            );
            let report_y = measure_concentration(&dataset.users, Platform::Youtube, 10, 200, 11).unwrap();
            println!(
                "clustered on Y: origin mean ratio {:.4}, other {:.4}",
                report_y.origin.mean_ratio, report_y.other.mean_ratio
            );
        }
        other => panic!("unknown mode {other}"),
    }
}
