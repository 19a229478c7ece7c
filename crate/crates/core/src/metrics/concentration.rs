//! Concentration analysis: how tightly user groups formed on one platform
//! cluster when viewed in a (possibly different) platform's topic space,
//! normalized by random size-matched groups. A ratio near 1 means the group
//! looks no tighter than chance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{euclidean_distance, RngStream};
use crate::repr::{AlignedUser, Platform};

use super::kmeans::kmeans;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupConcentration {
    pub group: usize,
    pub size: usize,
    /// Average Euclidean distance from members to the group centroid.
    pub distance: f64,
    /// Same statistic averaged over random size-matched groups.
    pub baseline: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationSide {
    pub per_group: Vec<GroupConcentration>,
    pub mean_ratio: f64,
}

/// Table-style report: groups are clustered on `clustered_on`, then measured
/// both in their own space and in the other platform's space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub format_version: u32,
    pub clustered_on: Platform,
    pub clusters: usize,
    pub origin: ConcentrationSide,
    pub other: ConcentrationSide,
}

fn average_distance_to_centroid(members: &[usize], reps: &[Vec<f64>]) -> Result<f64> {
    let dim = reps[members[0]].len();
    let mut centroid = vec![0.0; dim];
    for &i in members {
        for (c, v) in centroid.iter_mut().zip(&reps[i]) {
            *c += v;
        }
    }
    let n = members.len() as f64;
    for c in &mut centroid {
        *c /= n;
    }
    let mut total = 0.0;
    for &i in members {
        total += euclidean_distance(&centroid, &reps[i])?;
    }
    Ok(total / n)
}

/// Per-group average distance to centroid in `reps` space, normalized by the
/// mean over `n_random` random groups of the same size.
pub fn concentration_ratio(
    assignments: &[usize],
    reps: &[Vec<f64>],
    n_random: usize,
    seed: u64,
) -> Result<ConcentrationSide> {
    if assignments.len() != reps.len() {
        return Err(Error::DimMismatch(format!(
            "{} assignments vs {} representations",
            assignments.len(),
            reps.len()
        )));
    }
    if reps.is_empty() {
        return Err(Error::EmptyInput("concentration over no users".into()));
    }
    if n_random == 0 {
        return Err(Error::InvalidConfig("n_random must be >= 1".into()));
    }

    let n_groups = assignments.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
    for (i, &g) in assignments.iter().enumerate() {
        members[g].push(i);
    }

    // One baseline per distinct group size, each averaged over n_random
    // uniformly sampled groups of that size.
    let mut rng = RngStream::new(seed).derive("concentration_baseline");
    let mut baselines: BTreeMap<usize, f64> = BTreeMap::new();
    let mut sizes: Vec<usize> = members.iter().map(|m| m.len()).filter(|&s| s > 0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    for size in sizes {
        let mut total = 0.0;
        for _ in 0..n_random {
            let sample = rng.sample_indices(reps.len(), size);
            total += average_distance_to_centroid(&sample, reps)?;
        }
        baselines.insert(size, total / n_random as f64);
    }

    let mut per_group = Vec::new();
    for (g, group) in members.iter().enumerate() {
        if group.is_empty() {
            log::warn!("concentration: skipping empty group {g}");
            continue;
        }
        let distance = average_distance_to_centroid(group, reps)?;
        let baseline = baselines[&group.len()];
        let ratio = if distance == 0.0 { 0.0 } else { distance / baseline };
        per_group.push(GroupConcentration {
            group: g,
            size: group.len(),
            distance,
            baseline,
            ratio,
        });
    }
    if per_group.is_empty() {
        return Err(Error::EmptyInput("every group was empty".into()));
    }
    let mean_ratio = per_group.iter().map(|g| g.ratio).sum::<f64>() / per_group.len() as f64;
    Ok(ConcentrationSide { per_group, mean_ratio })
}

/// Clusters users on `clustered_on`, then measures concentration of those
/// groups in both platforms' spaces.
pub fn measure_concentration(
    users: &[AlignedUser],
    clustered_on: Platform,
    clusters: usize,
    n_random: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    let reps_of = |p: Platform| -> Vec<Vec<f64>> {
        users.iter().map(|u| u.repr(p).entries.clone()).collect()
    };
    let origin_reps = reps_of(clustered_on);
    let other_reps = reps_of(clustered_on.other());

    let clustering = kmeans(&origin_reps, clusters, seed, 100)?;
    let origin = concentration_ratio(&clustering.assignments, &origin_reps, n_random, seed)?;
    let other = concentration_ratio(&clustering.assignments, &other_reps, n_random, seed)?;

    Ok(ConcentrationReport {
        format_version: 1,
        clustered_on,
        clusters,
        origin,
        other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_groups_have_ratio_near_one() {
        let mut rng = RngStream::new(2);
        let reps: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..6).map(|_| rng.uniform(0.0, 1.0)).collect())
            .collect();
        // Assignments ARE uniformly random: ten groups of 30.
        let mut assignments: Vec<usize> = (0..300).map(|i| i / 30).collect();
        rng.shuffle(&mut assignments);
        let side = concentration_ratio(&assignments, &reps, 200, 5).unwrap();
        assert!(
            (0.9..=1.1).contains(&side.mean_ratio),
            "mean ratio {} outside [0.9, 1.1]",
            side.mean_ratio
        );
    }

    #[test]
    fn singleton_groups_have_zero_distance_and_ratio() {
        let reps = vec![vec![0.1, 0.9], vec![0.8, 0.2], vec![0.5, 0.5]];
        let side = concentration_ratio(&[0, 1, 2], &reps, 10, 1).unwrap();
        for g in &side.per_group {
            assert_eq!(g.distance, 0.0);
            assert_eq!(g.ratio, 0.0);
        }
    }

    #[test]
    fn tight_groups_score_well_below_random() {
        let mut rng = RngStream::new(9);
        let mut reps = Vec::new();
        let mut assignments = Vec::new();
        for g in 0..3 {
            let center = g as f64 * 5.0;
            for _ in 0..40 {
                reps.push(vec![
                    center + rng.uniform(-0.05, 0.05),
                    center + rng.uniform(-0.05, 0.05),
                ]);
                assignments.push(g);
            }
        }
        let side = concentration_ratio(&assignments, &reps, 100, 3).unwrap();
        assert!(side.mean_ratio < 0.2, "mean ratio {}", side.mean_ratio);
    }
}
