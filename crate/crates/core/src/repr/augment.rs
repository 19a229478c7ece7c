//! Dataset preparation: interaction-count filtering, user-level train/test
//! splitting, and the thirds-based training-set augmentation that substitutes
//! platform means for absent inputs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::scalar::Scalar;

use super::{AlignedUser, Dataset, InteractionSet, Provenance};

/// Iteratively removes users with fewer than `min_user_interactions` videos
/// and videos with fewer than `min_video_consumers` users, until a fixed
/// point. Users without any interactions are removed as well.
pub fn filter_dataset(
    dataset: &Dataset,
    min_user_interactions: usize,
    min_video_consumers: usize,
) -> Result<Dataset> {
    if min_user_interactions < 1 || min_video_consumers < 1 {
        return Err(Error::InvalidConfig("filter thresholds must be >= 1".into()));
    }

    let mut kept_users: BTreeSet<String> = dataset.users.iter().map(|u| u.id.clone()).collect();
    let mut kept_videos: BTreeSet<String> = dataset.videos.iter().map(|v| v.id.clone()).collect();

    loop {
        let mut changed = false;

        for user in kept_users.clone() {
            let count = dataset
                .interactions
                .videos_of(&user)
                .map(|vs| vs.iter().filter(|v| kept_videos.contains(*v)).count())
                .unwrap_or(0);
            if count < min_user_interactions {
                kept_users.remove(&user);
                changed = true;
            }
        }

        for video in kept_videos.clone() {
            let consumers = dataset
                .interactions
                .iter()
                .filter(|(u, vs)| kept_users.contains(*u) && vs.contains(&video))
                .count();
            if consumers < min_video_consumers {
                kept_videos.remove(&video);
                changed = true;
            }
        }

        if !changed {
            break;
        }
    }

    let users: Vec<AlignedUser> = dataset
        .users
        .iter()
        .filter(|u| kept_users.contains(&u.id))
        .cloned()
        .collect();
    let videos = dataset
        .videos
        .iter()
        .filter(|v| kept_videos.contains(&v.id))
        .cloned()
        .collect();
    let mut interactions = InteractionSet::new();
    for (user, vids) in dataset.interactions.iter() {
        if !kept_users.contains(user) {
            continue;
        }
        for v in vids {
            if kept_videos.contains(v) {
                interactions.insert(user, v);
            }
        }
    }

    if users.is_empty() {
        log::warn!(
            "filter thresholds ({min_user_interactions}, {min_video_consumers}) removed every user"
        );
    }

    Ok(Dataset {
        users,
        videos,
        interactions,
        dims: dataset.dims,
        provenance: Provenance::Derived {
            operation: format!(
                "filter(min_user_interactions={min_user_interactions}, min_video_consumers={min_video_consumers})"
            ),
        },
    })
}

/// User-level train/test split: `floor(n * train_fraction)` users train, the
/// rest test. Both halves keep the full video corpus; interactions are
/// restricted to each half's users. Deterministic per seed.
pub fn split_train_test(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n = dataset.users.len();
    if n < 2 {
        return Err(Error::EmptyInput("split needs at least 2 users".into()));
    }

    let mut order: Vec<usize> = (0..n).collect();
    RngStream::new(seed).derive("train_test_split").shuffle(&mut order);
    let n_train = (n as f64 * train_fraction).floor() as usize;

    let take = |indices: &[usize], label: &str| -> Dataset {
        let users: Vec<AlignedUser> = indices.iter().map(|&i| dataset.users[i].clone()).collect();
        let ids: BTreeSet<&str> = users.iter().map(|u| u.id.as_str()).collect();
        let mut interactions = InteractionSet::new();
        for (user, vids) in dataset.interactions.iter() {
            if ids.contains(user.as_str()) {
                for v in vids {
                    interactions.insert(user, v);
                }
            }
        }
        Dataset {
            users,
            videos: dataset.videos.clone(),
            interactions,
            dims: dataset.dims,
            provenance: Provenance::Derived {
                operation: format!("split(fraction={train_fraction}, seed={seed}, side={label})"),
            },
        }
    };

    Ok((take(&order[..n_train], "train"), take(&order[n_train..], "test")))
}

/// Which inputs a training example carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentKind {
    /// Both inputs are the user's real representations.
    RealBoth,
    /// Real first-platform input, platform mean substituted on the second.
    RealTAvgY,
    /// Platform mean substituted on the first, real second-platform input.
    AvgTRealY,
}

/// One training example. Targets are always the user's real representations,
/// whatever the inputs were replaced with.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedExample<T> {
    pub input_t: Vec<T>,
    pub input_y: Vec<T>,
    pub target_t: Vec<T>,
    pub target_y: Vec<T>,
    pub kind: AugmentKind,
}

/// Shuffles users by seed and partitions them into three near-equal groups:
/// mean-substituted on the video platform, mean-substituted on the social
/// platform, and untouched. Remainder users go to the earliest groups
/// (n = 3q + r gives the first r groups one extra user).
pub fn augment_training_set<T: Scalar>(
    train_users: &[AlignedUser],
    mean_t: &[f64],
    mean_y: &[f64],
    seed: u64,
) -> Result<Vec<AugmentedExample<T>>> {
    if train_users.is_empty() {
        return Err(Error::EmptyInput("augmentation over no users".into()));
    }
    let dim_t = train_users[0].twitter.dim();
    let dim_y = train_users[0].youtube.dim();
    if mean_t.len() != dim_t || mean_y.len() != dim_y {
        return Err(Error::DimMismatch("platform means do not match user dims".into()));
    }

    let n = train_users.len();
    let mut order: Vec<usize> = (0..n).collect();
    RngStream::new(seed).derive("augment_shuffle").shuffle(&mut order);

    let kinds = if n < 3 {
        log::warn!("fewer than 3 training users; every example keeps real inputs");
        vec![AugmentKind::RealBoth; n]
    } else {
        let q = n / 3;
        let r = n % 3;
        let sizes = [q + usize::from(r > 0), q + usize::from(r > 1), q];
        let mut kinds = Vec::with_capacity(n);
        for (size, kind) in sizes.iter().zip([
            AugmentKind::RealTAvgY,
            AugmentKind::AvgTRealY,
            AugmentKind::RealBoth,
        ]) {
            kinds.extend(std::iter::repeat(kind).take(*size));
        }
        kinds
    };

    let conv = |v: &[f64]| -> Vec<T> { v.iter().map(|&x| T::from_f64(x)).collect() };
    let mean_t = conv(mean_t);
    let mean_y = conv(mean_y);

    let mut out = Vec::with_capacity(n);
    for (&idx, &kind) in order.iter().zip(&kinds) {
        let user = &train_users[idx];
        let real_t = conv(&user.twitter.entries);
        let real_y = conv(&user.youtube.entries);
        let (input_t, input_y) = match kind {
            AugmentKind::RealBoth => (real_t.clone(), real_y.clone()),
            AugmentKind::RealTAvgY => (real_t.clone(), mean_y.clone()),
            AugmentKind::AvgTRealY => (mean_t.clone(), real_y.clone()),
        };
        out.push(AugmentedExample {
            input_t,
            input_y,
            target_t: real_t,
            target_y: real_y,
            kind,
        });
    }
    Ok(out)
}
