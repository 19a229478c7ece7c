//! Data model and ingestion: aligned users, video vectors, interaction sets,
//! dataset filtering and splitting, training-set augmentation, and the
//! synthetic generator with planted disparity and granularity structure.

mod augment;
mod jsonl;
mod synthetic;

pub use augment::{
    augment_training_set, filter_dataset, split_train_test, AugmentKind, AugmentedExample,
};
pub use jsonl::{load_dataset, write_dataset};
pub use synthetic::{
    aggregate_fine_to_coarse, gen_synthetic, write_manifest, SyntheticConfig,
    SYNTHETIC_MANIFEST_VERSION,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum deviation of an incoming vector's sum from 1 before it is
/// rejected instead of renormalized.
pub const SIMPLEX_SUM_TOLERANCE: f64 = 1e-3;

/// The two platforms a user is aligned across.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Platform {
    #[serde(rename = "T")]
    Twitter,
    #[serde(rename = "Y")]
    Youtube,
}

impl Platform {
    pub fn tag(self) -> &'static str {
        match self {
            Platform::Twitter => "T",
            Platform::Youtube => "Y",
        }
    }

    pub fn other(self) -> Platform {
        match self {
            Platform::Twitter => Platform::Youtube,
            Platform::Youtube => Platform::Twitter,
        }
    }
}

impl std::fmt::Display for Platform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Configured topic-space dimensions per platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlatformDims {
    pub dim_t: usize,
    pub dim_y: usize,
}

impl Default for PlatformDims {
    fn default() -> Self {
        Self { dim_t: 60, dim_y: 80 }
    }
}

impl PlatformDims {
    pub fn dim(&self, platform: Platform) -> usize {
        match platform {
            Platform::Twitter => self.dim_t,
            Platform::Youtube => self.dim_y,
        }
    }
}

/// A probability distribution over one platform's topics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicVector {
    pub platform: Platform,
    pub entries: Vec<f64>,
}

impl TopicVector {
    /// Validates and renormalizes raw entries.
    ///
    /// Entries must be finite and non-negative with the expected dimension;
    /// the sum may drift from 1 by at most [`SIMPLEX_SUM_TOLERANCE`] and is
    /// renormalized to exactly 1 (up to rounding).
    pub fn new(platform: Platform, entries: Vec<f64>, expected_dim: usize) -> Result<Self> {
        if entries.len() != expected_dim {
            return Err(Error::DimMismatch(format!(
                "platform {} vector has {} entries, expected {}",
                platform,
                entries.len(),
                expected_dim
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("platform {platform} vector entry")));
        }
        if entries.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "platform {platform} vector has a negative entry"
            )));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "platform {platform} vector sums to {sum}, outside tolerance"
            )));
        }
        let entries = entries.into_iter().map(|v| v / sum).collect();
        Ok(Self { platform, entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }
}

/// One user with linked accounts on both platforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedUser {
    pub id: String,
    pub twitter: TopicVector,
    pub youtube: TopicVector,
}

impl AlignedUser {
    pub fn repr(&self, platform: Platform) -> &TopicVector {
        match platform {
            Platform::Twitter => &self.twitter,
            Platform::Youtube => &self.youtube,
        }
    }
}

/// A video with its topic vector in the video platform's space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub id: String,
    pub vec: TopicVector,
}

/// Groundtruth interactions: user id -> set of video ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionSet {
    map: BTreeMap<String, BTreeSet<String>>,
}

impl InteractionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, user: &str, video: &str) {
        self.map
            .entry(user.to_string())
            .or_default()
            .insert(video.to_string());
    }

    pub fn videos_of(&self, user: &str) -> Option<&BTreeSet<String>> {
        self.map.get(user)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BTreeSet<String>)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn remove_user(&mut self, user: &str) {
        self.map.remove(user);
    }

    /// Count of distinct users interacting with each video.
    pub fn consumers_per_video(&self) -> BTreeMap<&str, usize> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for videos in self.map.values() {
            for v in videos {
                *counts.entry(v.as_str()).or_default() += 1;
            }
        }
        counts
    }
}

/// Where a dataset came from, for run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Loaded { users: String, videos: String, interactions: String },
    Generated { config: SyntheticConfig },
    Derived { operation: String },
}

/// A full dataset: aligned users, video corpus, and interactions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub users: Vec<AlignedUser>,
    pub videos: Vec<VideoRecord>,
    pub interactions: InteractionSet,
    pub dims: PlatformDims,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn video_count(&self) -> usize {
        self.videos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn video_by_id(&self, id: &str) -> Option<&VideoRecord> {
        self.videos.iter().find(|v| v.id == id)
    }

    /// Checks id uniqueness and interaction referential integrity.
    pub fn validate(&self) -> Result<()> {
        let mut user_ids = BTreeSet::new();
        for u in &self.users {
            if !user_ids.insert(u.id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate user id {}", u.id)));
            }
        }
        let mut video_ids = BTreeSet::new();
        for v in &self.videos {
            if !video_ids.insert(v.id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate video id {}", v.id)));
            }
        }
        for (user, videos) in self.interactions.iter() {
            if !user_ids.contains(user.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "interactions reference unknown user {user}"
                )));
            }
            for v in videos {
                if !video_ids.contains(v.as_str()) {
                    return Err(Error::InvalidConfig(format!(
                        "interactions reference unknown video {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Arithmetic mean of one platform's vectors over `users`.
pub fn platform_mean(users: &[AlignedUser], platform: Platform) -> Result<Vec<f64>> {
    if users.is_empty() {
        return Err(Error::EmptyInput("platform_mean over no users".into()));
    }
    let dim = users[0].repr(platform).dim();
    let mut mean = vec![0.0; dim];
    for u in users {
        let v = u.repr(platform);
        if v.dim() != dim {
            return Err(Error::DimMismatch("inconsistent user vector dims".into()));
        }
        for (m, e) in mean.iter_mut().zip(&v.entries) {
            *m += e;
        }
    }
    let n = users.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    Ok(mean)
}

/// Mean of interacted video vectors; lives in the same video-platform topic
/// space as the videos themselves.
pub fn derive_user_repr_from_videos(video_vecs: &[&[f64]]) -> Result<Vec<f64>> {
    if video_vecs.is_empty() {
        return Err(Error::EmptyInput("user representation from no videos".into()));
    }
    let dim = video_vecs[0].len();
    if video_vecs.iter().any(|v| v.len() != dim) {
        return Err(Error::DimMismatch("inconsistent video vector dims".into()));
    }
    let mut mean = vec![0.0; dim];
    for v in video_vecs {
        for (m, e) in mean.iter_mut().zip(*v) {
            *m += e;
        }
    }
    let n = video_vecs.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    Ok(mean)
}
