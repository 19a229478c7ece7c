//! Evaluation metrics: association error (MAE/RMSE), top-k
//! precision/recall/F-score, k-means grouping, and the concentration-ratio
//! analysis of cross-platform interest consistency.

mod concentration;
mod kmeans;

pub use concentration::{
    concentration_ratio, measure_concentration, ConcentrationReport, ConcentrationSide,
    GroupConcentration,
};
pub use kmeans::{kmeans, KmeansResult};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recommend::RankedList;
use crate::repr::Platform;

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Spread of the per-user errors behind an [`AssocReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub mae_min: f64,
    pub mae_max: f64,
    pub rmse_min: f64,
    pub rmse_max: f64,
}

/// Association accuracy on one platform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssocReport {
    pub format_version: u32,
    pub platform: Platform,
    /// Mean over users of the dimension-normalized L1 residual.
    pub mae: f64,
    /// Mean over users of the per-user root-mean-square residual.
    pub rmse: f64,
    pub users: usize,
    pub dim: usize,
    pub residuals: ResidualSummary,
}

impl AssocReport {
    /// Flat `metric,name,value` rows for external plotting.
    pub fn to_csv(&self) -> String {
        let p = self.platform.tag();
        format!(
            "metric,name,value\nmae,{p},{}\nrmse,{p},{}\n",
            self.mae, self.rmse
        )
    }
}

/// Mean top-k precision/recall/F-score across test users.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecReport {
    pub format_version: u32,
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub users: usize,
}

impl RecReport {
    pub fn to_csv(&self) -> String {
        format!(
            "metric,name,value\nprecision,top{k},{}\nrecall,top{k},{}\nf_score,top{k},{}\n",
            self.precision,
            self.recall,
            self.f_score,
            k = self.k
        )
    }
}

/// MAE and RMSE over per-user prediction/truth pairs, each of dimension
/// `dim`. The root is taken per user, then averaged.
pub fn mae_rmse(
    platform: Platform,
    preds: &[Vec<f64>],
    truths: &[Vec<f64>],
    dim: usize,
) -> Result<AssocReport> {
    if preds.is_empty() {
        return Err(Error::EmptyInput("mae_rmse over no users".into()));
    }
    if preds.len() != truths.len() {
        return Err(Error::DimMismatch(format!(
            "{} predictions vs {} truths",
            preds.len(),
            truths.len()
        )));
    }
    let k = dim as f64;
    let mut mae_sum = 0.0;
    let mut rmse_sum = 0.0;
    let mut summary = ResidualSummary {
        mae_min: f64::INFINITY,
        mae_max: 0.0,
        rmse_min: f64::INFINITY,
        rmse_max: 0.0,
    };
    for (p, t) in preds.iter().zip(truths) {
        if p.len() != dim || t.len() != dim {
            return Err(Error::DimMismatch(format!(
                "vector dims ({}, {}) vs expected {dim}",
                p.len(),
                t.len()
            )));
        }
        let l1: f64 = p.iter().zip(t).map(|(a, b)| (a - b).abs()).sum();
        let l2sq: f64 = p.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum();
        let user_mae = l1 / k;
        let user_rmse = (l2sq / k).sqrt();
        mae_sum += user_mae;
        rmse_sum += user_rmse;
        summary.mae_min = summary.mae_min.min(user_mae);
        summary.mae_max = summary.mae_max.max(user_mae);
        summary.rmse_min = summary.rmse_min.min(user_rmse);
        summary.rmse_max = summary.rmse_max.max(user_rmse);
    }
    let n = preds.len() as f64;
    Ok(AssocReport {
        format_version: REPORT_FORMAT_VERSION,
        platform,
        mae: mae_sum / n,
        rmse: rmse_sum / n,
        users: preds.len(),
        dim,
        residuals: summary,
    })
}

/// Top-k precision, recall, and F-score for one ranked list against the
/// user's groundtruth set. F is 0 when both P and R are 0.
pub fn topk_prf(
    ranked: &RankedList<f64>,
    groundtruth: &BTreeSet<String>,
    k: usize,
) -> Result<(f64, f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidConfig("topk_prf: k must be >= 1".into()));
    }
    if groundtruth.is_empty() {
        return Err(Error::EmptyInput("topk_prf: empty groundtruth".into()));
    }
    let hits = ranked
        .entries
        .iter()
        .take(k)
        .filter(|(id, _)| groundtruth.contains(id))
        .count() as f64;
    let precision = hits / k as f64;
    let recall = hits / groundtruth.len() as f64;
    let f_score = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok((precision, recall, f_score))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    #[test]
    fn perfect_predictions_give_zero_error() {
        let vs = vec![vec![0.2, 0.8], vec![0.5, 0.5]];
        let r = mae_rmse(Platform::Youtube, &vs, &vs, 2).unwrap();
        assert_eq!(r.mae, 0.0);
        assert_eq!(r.rmse, 0.0);
    }

    #[test]
    fn hand_case_with_equal_residuals() {
        // |residuals| all 0.2, so MAE and RMSE coincide at 0.2.
        let truths = vec![vec![0.2, 0.8]];
        let preds = vec![vec![0.4, 0.6]];
        let r = mae_rmse(Platform::Youtube, &preds, &truths, 2).unwrap();
        assert!((r.mae - 0.2).abs() < 1e-15);
        assert!((r.rmse - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rmse_dominates_mae_on_random_instances() {
        let mut rng = RngStream::new(3);
        for _ in 0..20 {
            let preds: Vec<Vec<f64>> = (0..20)
                .map(|_| (0..5).map(|_| rng.uniform(0.0, 1.0)).collect())
                .collect();
            let truths: Vec<Vec<f64>> = (0..20)
                .map(|_| (0..5).map(|_| rng.uniform(0.0, 1.0)).collect())
                .collect();
            let r = mae_rmse(Platform::Twitter, &preds, &truths, 5).unwrap();
            assert!(r.rmse >= r.mae - 1e-12);
        }
    }

    #[test]
    fn mae_rmse_rejects_bad_shapes() {
        let a = vec![vec![0.5, 0.5]];
        assert!(mae_rmse(Platform::Twitter, &a, &[], 2).is_err());
        assert!(mae_rmse(Platform::Twitter, &[], &[], 2).is_err());
        let b = vec![vec![0.5]];
        assert!(mae_rmse(Platform::Twitter, &a, &b, 2).is_err());
    }

    fn ranked(ids: &[&str]) -> RankedList<f64> {
        RankedList {
            entries: ids
                .iter()
                .enumerate()
                .map(|(i, id)| (id.to_string(), 1.0 - i as f64 * 0.1))
                .collect(),
        }
    }

    #[test]
    fn topk_hand_case() {
        let gt: BTreeSet<String> =
            ["v1", "v2", "v4"].iter().map(|s| s.to_string()).collect();
        let (p, r, f) = topk_prf(&ranked(&["v1", "v3"]), &gt, 2).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
        assert!((f - 0.4).abs() < 1e-15);
    }

    #[test]
    fn topk_perfect_and_empty_cases() {
        let gt: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let (p, r, f) = topk_prf(&ranked(&["a", "b"]), &gt, 2).unwrap();
        assert_eq!((p, r, f), (1.0, 1.0, 1.0));

        let (p, r, f) = topk_prf(&ranked(&["x", "y"]), &gt, 2).unwrap();
        assert_eq!((p, r, f), (0.0, 0.0, 0.0));

        let empty: BTreeSet<String> = BTreeSet::new();
        assert!(topk_prf(&ranked(&["a"]), &empty, 1).is_err());
    }

    #[test]
    fn topk_bounds_hold_on_random_instances() {
        let mut rng = RngStream::new(8);
        for _ in 0..50 {
            let n = 2 + rng.index(10);
            let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let gt: BTreeSet<String> = ids
                .iter()
                .filter(|_| rng.next_f64() < 0.5)
                .cloned()
                .collect();
            if gt.is_empty() {
                continue;
            }
            let k = 1 + rng.index(n);
            let list = RankedList {
                entries: ids.iter().map(|id| (id.clone(), rng.next_f64())).collect(),
            };
            let (p, r, f) = topk_prf(&list, &gt, k).unwrap();
            let hits = p * k as f64;
            assert!(hits <= k.min(gt.len()) as f64 + 1e-9);
            assert!((0.0..=1.0).contains(&p));
            assert!((0.0..=1.0).contains(&r));
            assert!(f >= p.min(r) - 1e-12 && f <= p.max(r) + 1e-12);
        }
    }
}
