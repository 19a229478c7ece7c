//! End-to-end orchestration shared by the CLI and the test harness:
//! train any model kind on a user split, evaluate association error in
//! either direction, run the top-k recommendation protocol, and average a
//! model comparison over several training seeds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{mae_rmse, topk_prf, AssocReport, RecReport, REPORT_FORMAT_VERSION};
use crate::models::{
    la_fit, mlp_fit, ridge_fit, AutoencoderLayout, Direction, MaskedAutoencoder, ModelKind,
    Substitution, TrainConfig, TrainedModel,
};
use crate::numerics::Matrix;
use crate::recommend::{rank_topk, sample_candidates, user_seed, RankedList};
use crate::repr::{augment_training_set, platform_mean, AlignedUser, Dataset, Platform};
use crate::scalar::Scalar;

/// Hyperparameters for every model kind, in one bundle so comparison runs
/// stay in sync.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelOptions<T> {
    pub train: TrainConfig<T>,
    /// Hidden split (m_t, m_c, m_y) for the disparity-preserving layout.
    pub dca_split: (usize, usize, usize),
    /// Hidden width of the fully-connected variant.
    pub ma_hidden: usize,
    pub ridge_lambda: T,
    pub la_atoms: usize,
    pub la_lambda: T,
    pub la_iters: usize,
    pub mlp_hidden: usize,
}

impl<T: Scalar> Default for ModelOptions<T> {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            dca_split: (10, 80, 10),
            ma_hidden: 90,
            ridge_lambda: T::from_f64(10.0),
            la_atoms: 40,
            la_lambda: T::from_f64(0.05),
            la_iters: 20,
            mlp_hidden: 100,
        }
    }
}

/// Users-as-columns matrix of one platform's vectors.
pub fn user_matrix<T: Scalar>(users: &[AlignedUser], platform: Platform) -> Result<Matrix<T>> {
    if users.is_empty() {
        return Err(Error::EmptyInput("user matrix over no users".into()));
    }
    let cols: Vec<Vec<T>> = users
        .iter()
        .map(|u| u.repr(platform).entries.iter().map(|&v| T::from_f64(v)).collect())
        .collect();
    Matrix::from_columns(&cols)
}

/// Trains one model kind on the given training users.
pub fn train_model<T: Scalar>(
    kind: ModelKind,
    train_users: &[AlignedUser],
    opts: &ModelOptions<T>,
) -> Result<TrainedModel<T>> {
    if train_users.is_empty() {
        return Err(Error::EmptyInput("training without users".into()));
    }
    let dim_t = train_users[0].twitter.dim();
    let dim_y = train_users[0].youtube.dim();

    match kind {
        ModelKind::Dca | ModelKind::Ma => {
            let mean_t = platform_mean(train_users, Platform::Twitter)?;
            let mean_y = platform_mean(train_users, Platform::Youtube)?;
            let examples =
                augment_training_set::<T>(train_users, &mean_t, &mean_y, opts.train.seed)?;
            let layout = if kind == ModelKind::Dca {
                let (m_t, m_c, m_y) = opts.dca_split;
                AutoencoderLayout { n_t: dim_t, n_y: dim_y, m_t, m_c, m_y }
            } else {
                AutoencoderLayout { n_t: dim_t, n_y: dim_y, m_t: 0, m_c: opts.ma_hidden, m_y: 0 }
            };
            let model = MaskedAutoencoder::train(&examples, layout, &opts.train)?;
            Ok(TrainedModel::Autoencoder {
                model,
                dca: kind == ModelKind::Dca,
                mean_t: mean_t.iter().map(|&v| T::from_f64(v)).collect(),
                mean_y: mean_y.iter().map(|&v| T::from_f64(v)).collect(),
            })
        }
        ModelKind::Lr => {
            let u_t = user_matrix::<T>(train_users, Platform::Twitter)?;
            let u_y = user_matrix::<T>(train_users, Platform::Youtube)?;
            Ok(TrainedModel::Ridge {
                t2y: ridge_fit(&u_t, &u_y, opts.ridge_lambda)?,
                y2t: ridge_fit(&u_y, &u_t, opts.ridge_lambda)?,
            })
        }
        ModelKind::La => {
            let u_t = user_matrix::<T>(train_users, Platform::Twitter)?;
            let u_y = user_matrix::<T>(train_users, Platform::Youtube)?;
            Ok(TrainedModel::Latent(la_fit(
                &u_t,
                &u_y,
                opts.la_atoms,
                opts.la_lambda,
                opts.la_iters,
                opts.train.seed,
            )?))
        }
        ModelKind::Mlp => {
            let u_t = user_matrix::<T>(train_users, Platform::Twitter)?;
            let u_y = user_matrix::<T>(train_users, Platform::Youtube)?;
            Ok(TrainedModel::Mlp {
                t2y: mlp_fit(&u_t, &u_y, opts.mlp_hidden, &opts.train)?,
                y2t: mlp_fit(&u_y, &u_t, opts.mlp_hidden, &opts.train)?,
            })
        }
    }
}

/// One prediction per user: the unknown platform's representation inferred
/// from the known one.
pub fn predict_users<T: Scalar>(
    model: &TrainedModel<T>,
    users: &[AlignedUser],
    direction: Direction,
    substitution: Substitution,
) -> Result<Vec<Vec<f64>>> {
    let known_platform = match direction {
        Direction::TwitterToYoutube => Platform::Twitter,
        Direction::YoutubeToTwitter => Platform::Youtube,
    };
    users
        .iter()
        .map(|u| {
            let known: Vec<T> = u
                .repr(known_platform)
                .entries
                .iter()
                .map(|&v| T::from_f64(v))
                .collect();
            let pred = model.predict_cross(&known, direction, substitution)?;
            Ok(pred.into_iter().map(|v| v.to_f64()).collect())
        })
        .collect()
}

/// MAE/RMSE of a model's cross-platform predictions on `test_users`.
pub fn eval_association<T: Scalar>(
    model: &TrainedModel<T>,
    test_users: &[AlignedUser],
    direction: Direction,
    substitution: Substitution,
) -> Result<AssocReport> {
    if test_users.is_empty() {
        return Err(Error::EmptyInput("association eval over no users".into()));
    }
    let target_platform = match direction {
        Direction::TwitterToYoutube => Platform::Youtube,
        Direction::YoutubeToTwitter => Platform::Twitter,
    };
    let preds = predict_users(model, test_users, direction, substitution)?;
    let truths: Vec<Vec<f64>> = test_users
        .iter()
        .map(|u| u.repr(target_platform).entries.clone())
        .collect();
    mae_rmse(target_platform, &preds, &truths, truths[0].len())
}

/// One user's ranked recommendations, as emitted in the output JSONL.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecommendationLine {
    pub user: String,
    pub ranked: Vec<RankedEntry>,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankedEntry {
    pub video: String,
    pub score: f64,
}

/// Top-k recommendation protocol over the test users: predict the video
/// platform representation from the social one, pool each user's groundtruth
/// with an equal number of sampled distractors, rank by Euclidean
/// similarity, and average precision/recall/F at `k`.
///
/// Users without groundtruth interactions are skipped. Per-user seeds derive
/// from `master_seed` and the user id, so evaluation order cannot matter.
pub fn eval_recommendation<T: Scalar>(
    model: &TrainedModel<T>,
    test_users: &[AlignedUser],
    corpus: &Dataset,
    k: usize,
    master_seed: u64,
    substitution: Substitution,
) -> Result<(RecReport, Vec<RecommendationLine>)> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be >= 1".into()));
    }
    let vectors: BTreeMap<&str, &Vec<f64>> = corpus
        .videos
        .iter()
        .map(|v| (v.id.as_str(), &v.vec.entries))
        .collect();

    // Per-user results keyed by id; aggregation happens in id order below,
    // so the input order (or a parallel schedule) cannot change the sums.
    let mut per_user: BTreeMap<String, (f64, f64, f64, RecommendationLine)> = BTreeMap::new();

    for user in test_users {
        let Some(groundtruth) = corpus.interactions.videos_of(&user.id) else {
            continue;
        };
        if groundtruth.is_empty() {
            continue;
        }
        let seed = user_seed(master_seed, &user.id);
        let candidate_set = sample_candidates(&user.id, &corpus.interactions, corpus, seed)?;

        let known: Vec<T> = user.twitter.entries.iter().map(|&v| T::from_f64(v)).collect();
        let pred: Vec<f64> = model
            .predict_cross(&known, Direction::TwitterToYoutube, substitution)?
            .into_iter()
            .map(|v| v.to_f64())
            .collect();

        let candidates: Vec<(String, Vec<f64>)> = candidate_set
            .candidates
            .iter()
            .map(|id| {
                let vec = vectors.get(id.as_str()).ok_or_else(|| {
                    Error::InvalidConfig(format!("candidate {id} missing from corpus"))
                })?;
                Ok((id.clone(), (*vec).clone()))
            })
            .collect::<Result<_>>()?;
        let ranked: RankedList<f64> = rank_topk(&pred, &candidates, k)?;
        let (p, r, f) = topk_prf(&ranked, groundtruth, k)?;
        let line = RecommendationLine {
            user: user.id.clone(),
            ranked: ranked
                .entries
                .into_iter()
                .map(|(video, score)| RankedEntry { video, score })
                .collect(),
            k,
            seed,
        };
        per_user.insert(user.id.clone(), (p, r, f, line));
    }

    if per_user.is_empty() {
        return Err(Error::EmptyInput("no test user had groundtruth videos".into()));
    }
    let mut p_sum = 0.0;
    let mut r_sum = 0.0;
    let mut f_sum = 0.0;
    let mut lines = Vec::with_capacity(per_user.len());
    let evaluated = per_user.len();
    for (_, (p, r, f, line)) in per_user {
        p_sum += p;
        r_sum += r;
        f_sum += f;
        lines.push(line);
    }
    let n = evaluated as f64;
    Ok((
        RecReport {
            format_version: REPORT_FORMAT_VERSION,
            k,
            precision: p_sum / n,
            recall: r_sum / n,
            f_score: f_sum / n,
            users: evaluated,
        },
        lines,
    ))
}

/// One model's averaged scores in a comparison run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    /// Social -> video direction.
    pub mae_y: f64,
    pub rmse_y: f64,
    /// Video -> social direction.
    pub mae_t: f64,
    pub rmse_t: f64,
    /// Top-k scores in the social -> video scenario; absent when the corpus
    /// has no interactions.
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_score: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub format_version: u32,
    pub seeds: Vec<u64>,
    pub k: usize,
    pub substitution: Substitution,
    pub rows: Vec<ComparisonRow>,
}

/// Trains every requested kind once per seed on `train_users`, evaluates on
/// `test_users`, and averages the metrics over seeds.
#[allow(clippy::too_many_arguments)]
pub fn compare_models<T: Scalar>(
    kinds: &[ModelKind],
    train_users: &[AlignedUser],
    test_users: &[AlignedUser],
    corpus: &Dataset,
    opts: &ModelOptions<T>,
    seeds: &[u64],
    k: usize,
    substitution: Substitution,
) -> Result<ComparisonReport> {
    if seeds.is_empty() {
        return Err(Error::EmptyInput("comparison without seeds".into()));
    }
    let with_rec = corpus.interactions.len() > 0;
    let mut rows = Vec::new();

    for &kind in kinds {
        let mut acc = [0.0f64; 7];
        for &seed in seeds {
            let mut run_opts = opts.clone();
            run_opts.train.seed = seed;
            let model = train_model::<T>(kind, train_users, &run_opts)?;

            let to_y =
                eval_association(&model, test_users, Direction::TwitterToYoutube, substitution)?;
            let to_t =
                eval_association(&model, test_users, Direction::YoutubeToTwitter, substitution)?;
            acc[0] += to_y.mae;
            acc[1] += to_y.rmse;
            acc[2] += to_t.mae;
            acc[3] += to_t.rmse;
            if with_rec {
                let (rec, _) =
                    eval_recommendation(&model, test_users, corpus, k, seed, substitution)?;
                acc[4] += rec.precision;
                acc[5] += rec.recall;
                acc[6] += rec.f_score;
            }
        }
        let n = seeds.len() as f64;
        rows.push(ComparisonRow {
            model: kind,
            mae_y: acc[0] / n,
            rmse_y: acc[1] / n,
            mae_t: acc[2] / n,
            rmse_t: acc[3] / n,
            precision: with_rec.then_some(acc[4] / n),
            recall: with_rec.then_some(acc[5] / n),
            f_score: with_rec.then_some(acc[6] / n),
        });
    }

    Ok(ComparisonReport {
        format_version: REPORT_FORMAT_VERSION,
        seeds: seeds.to_vec(),
        k,
        substitution,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::{gen_synthetic, split_train_test, SyntheticConfig};

    fn tiny_dataset() -> Dataset {
        gen_synthetic(&SyntheticConfig {
            users: 40,
            dim_t: 10,
            dim_y: 8,
            latent_dim: 3,
            specific_dim: 3,
            coarse_groups: 4,
            videos_per_user: 3,
            background_videos: 60,
            seed: 3,
            ..SyntheticConfig::default()
        })
        .unwrap()
    }

    fn tiny_opts() -> ModelOptions<f64> {
        ModelOptions {
            train: TrainConfig { epochs: 5, batch_size: 8, ..TrainConfig::default() },
            dca_split: (2, 6, 2),
            ma_hidden: 8,
            la_atoms: 4,
            la_iters: 5,
            mlp_hidden: 8,
            ..ModelOptions::default()
        }
    }

    #[test]
    fn every_kind_trains_and_evaluates() {
        let d = tiny_dataset();
        let (train, test) = split_train_test(&d, 0.8, 1).unwrap();
        let opts = tiny_opts();
        for kind in [ModelKind::Dca, ModelKind::Ma, ModelKind::Lr, ModelKind::La, ModelKind::Mlp] {
            let model = train_model::<f64>(kind, &train.users, &opts).unwrap();
            let report = eval_association(
                &model,
                &test.users,
                Direction::TwitterToYoutube,
                Substitution::Mean,
            )
            .unwrap();
            assert!(report.mae.is_finite() && report.mae >= 0.0, "{kind:?}");
            assert!(report.rmse >= report.mae - 1e-12);
            assert_eq!(report.dim, 8);

            let (rec, lines) =
                eval_recommendation(&model, &test.users, &d, 3, 7, Substitution::Mean).unwrap();
            assert_eq!(rec.k, 3);
            assert_eq!(lines.len(), rec.users);
            assert!((0.0..=1.0).contains(&rec.precision));
        }
    }

    #[test]
    fn comparison_runs_and_is_deterministic() {
        let d = tiny_dataset();
        let (train, test) = split_train_test(&d, 0.8, 1).unwrap();
        let opts = tiny_opts();
        let kinds = [ModelKind::Lr, ModelKind::Dca];
        let a = compare_models::<f64>(
            &kinds, &train.users, &test.users, &d, &opts, &[1, 2], 3, Substitution::Mean,
        )
        .unwrap();
        let b = compare_models::<f64>(
            &kinds, &train.users, &test.users, &d, &opts, &[1, 2], 3, Substitution::Mean,
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn recommendation_is_order_independent() {
        let d = tiny_dataset();
        let (_, test) = split_train_test(&d, 0.6, 2).unwrap();
        let opts = tiny_opts();
        let model = train_model::<f64>(ModelKind::Lr, &test.users, &opts).unwrap();

        let (rec_a, mut lines_a) =
            eval_recommendation(&model, &test.users, &d, 3, 11, Substitution::Mean).unwrap();
        let mut reversed = test.users.clone();
        reversed.reverse();
        let (rec_b, mut lines_b) =
            eval_recommendation(&model, &reversed, &d, 3, 11, Substitution::Mean).unwrap();
        assert_eq!(rec_a.precision, rec_b.precision);
        assert_eq!(rec_a.recall, rec_b.recall);
        lines_a.sort_by(|x, y| x.user.cmp(&y.user));
        lines_b.sort_by(|x, y| x.user.cmp(&y.user));
        assert_eq!(
            serde_json::to_string(&lines_a).unwrap(),
            serde_json::to_string(&lines_b).unwrap()
        );
    }
}
