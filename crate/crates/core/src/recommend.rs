//! Top-k video recommendation: candidate sampling, Euclidean similarity,
//! and deterministic ranking.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{euclidean_distance, RngStream};
use crate::repr::{Dataset, InteractionSet};
use crate::scalar::Scalar;

/// Groundtruth videos plus an equal number of sampled distractors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub user_id: String,
    /// Sorted candidate ids: groundtruth union distractors, no duplicates.
    pub candidates: Vec<String>,
    pub seed: u64,
}

/// Ranked `(video, score)` pairs, scores non-increasing, ties broken by
/// ascending video id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList<T> {
    pub entries: Vec<(String, T)>,
}

/// Per-user seed derived from the master seed and the user id, so per-user
/// evaluation can run in any order (or in parallel) without changing
/// results.
pub fn user_seed(master_seed: u64, user_id: &str) -> u64 {
    let mut rng = RngStream::new(master_seed).derive(user_id);
    rng.next_u64()
}

/// Samples as many distractors as the user has groundtruth videos, uniformly
/// without replacement from the corpus minus the groundtruth set.
pub fn sample_candidates(
    user_id: &str,
    interactions: &InteractionSet,
    corpus: &Dataset,
    seed: u64,
) -> Result<CandidateSet> {
    let groundtruth: &BTreeSet<String> = interactions
        .videos_of(user_id)
        .ok_or_else(|| Error::EmptyInput(format!("user {user_id} has no groundtruth videos")))?;
    let k = groundtruth.len();

    let mut eligible: Vec<&str> = corpus
        .videos
        .iter()
        .map(|v| v.id.as_str())
        .filter(|id| !groundtruth.contains(*id))
        .collect();
    eligible.sort_unstable();
    if eligible.len() < k {
        return Err(Error::InvalidConfig(format!(
            "corpus has {} non-groundtruth videos, need {k} distractors for user {user_id}",
            eligible.len()
        )));
    }

    let mut rng = RngStream::new(seed).derive_indexed("candidate_sampling", k as u64);
    let picks = rng.sample_indices(eligible.len(), k);
    let mut candidates: Vec<String> = groundtruth.iter().cloned().collect();
    candidates.extend(picks.into_iter().map(|i| eligible[i].to_string()));
    candidates.sort_unstable();

    Ok(CandidateSet {
        user_id: user_id.to_string(),
        candidates,
        seed,
    })
}

/// Euclidean similarity `1 / (1 + ||a - b||_2)`.
pub fn similarity<T: Scalar>(u_hat: &[T], v: &[T]) -> Result<T> {
    Ok(T::one() / (T::one() + euclidean_distance(u_hat, v)?))
}

/// Ranks candidates by similarity to `u_hat`, descending, ties by ascending
/// video id, truncated to `k`.
pub fn rank_topk<T: Scalar>(
    u_hat: &[T],
    candidates: &[(String, Vec<T>)],
    k: usize,
) -> Result<RankedList<T>> {
    if k == 0 {
        return Err(Error::InvalidConfig("rank_topk: k must be >= 1".into()));
    }
    let mut scored: Vec<(String, T)> = candidates
        .iter()
        .map(|(id, vec)| Ok((id.clone(), similarity(u_hat, vec)?)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    scored.truncate(k);
    Ok(RankedList { entries: scored })
}
