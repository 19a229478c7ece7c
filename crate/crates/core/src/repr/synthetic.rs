//! Synthetic dataset generator.
//!
//! Users are built from three latent factors: a shared latent `z` drawn
//! around shared cluster centers, and per-platform latents `e_t`, `e_y`
//! drawn around platform-specific cluster centers. The disparity fraction
//! weighs the platform-specific factors against the shared one, and a
//! granularity map aggregates fine first-platform topics into coarse
//! second-platform topics, so the second platform sees the shared signal
//! only at reduced resolution. Videos are drawn near cluster centers in the
//! video platform's space, and each user's groundtruth videos near that
//! user's own representation. Everything is a pure function of the seed.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngStream;

use super::{
    AlignedUser, Dataset, InteractionSet, Platform, PlatformDims, Provenance, TopicVector,
    VideoRecord,
};

pub const SYNTHETIC_MANIFEST_VERSION: u32 = 1;

/// How tightly latent draws hug their cluster center.
const CLUSTER_SPREAD: f64 = 0.2;
/// Scale of the shared and first-platform cluster centers.
const CENTER_SCALE: f64 = 1.6;
/// Each user's first-platform specific interests carry an individual
/// magnitude; after simplex normalization this dilutes the shared part by a
/// continuously varying factor the models must undo from shape alone.
const T_USER_MAGNITUDE_RANGE: (f64, f64) = (0.3, 5.0);
/// Second-platform specific interests vary less across users, so the video
/// platform is dominated by the (coarsened) shared signal.
const Y_CENTER_SCALE: f64 = 0.4;
/// Extra gain on the first platform's specific loadings; raises the share
/// of platform-specific mass that the normalization folds into `u_t`.
const T_SPECIFIC_GAIN: f64 = 2.0;
/// Sharpness of the positive squash; higher values clip more coordinates
/// toward zero and make the topic map less linear.
const SHARPNESS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    /// Number of aligned users.
    pub users: usize,
    /// Topic dimensions per platform.
    pub dim_t: usize,
    pub dim_y: usize,
    /// Dimension of the shared latent factor.
    pub latent_dim: usize,
    /// Dimension of each platform-specific latent factor.
    pub specific_dim: usize,
    /// Weight of platform-specific factors, in [0, 1].
    pub disparity: f64,
    /// Number of coarse topics the fine topics aggregate into.
    pub coarse_groups: usize,
    /// Explicit fine-topic -> coarse-group assignment; defaults to
    /// contiguous near-equal blocks.
    pub granularity_map: Option<Vec<usize>>,
    /// Scale of the non-negative per-entry noise added to topic vectors.
    pub noise: f64,
    /// Cluster counts for the shared and platform-specific latents.
    pub shared_clusters: usize,
    pub platform_clusters: usize,
    /// Groundtruth interactions generated per user.
    pub videos_per_user: usize,
    /// Background corpus size (distractor pool).
    pub background_videos: usize,
    /// Spread of videos around their anchor vector.
    pub video_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            users: 500,
            dim_t: 60,
            dim_y: 80,
            latent_dim: 8,
            specific_dim: 8,
            disparity: 0.3,
            coarse_groups: 15,
            granularity_map: None,
            noise: 0.02,
            shared_clusters: 6,
            platform_clusters: 6,
            videos_per_user: 5,
            background_videos: 300,
            video_noise: 0.1,
            seed: 42,
        }
    }
}

impl SyntheticConfig {
    /// Resolves the granularity map and checks it is a surjection from fine
    /// topic indices onto `0..coarse_groups`.
    pub fn resolved_granularity(&self) -> Result<Vec<usize>> {
        if self.coarse_groups == 0 || self.coarse_groups > self.dim_y {
            return Err(Error::InvalidConfig(format!(
                "coarse_groups {} must be in 1..={}",
                self.coarse_groups, self.dim_y
            )));
        }
        let map = match &self.granularity_map {
            Some(m) => m.clone(),
            None => (0..self.dim_t)
                .map(|i| i * self.coarse_groups / self.dim_t)
                .collect(),
        };
        if map.len() != self.dim_t {
            return Err(Error::InvalidConfig(format!(
                "granularity map covers {} fine topics, expected {}",
                map.len(),
                self.dim_t
            )));
        }
        let mut hit = vec![false; self.coarse_groups];
        for &g in &map {
            if g >= self.coarse_groups {
                return Err(Error::InvalidConfig(format!(
                    "granularity map targets group {g}, only {} groups exist",
                    self.coarse_groups
                )));
            }
            hit[g] = true;
        }
        if !hit.iter().all(|&h| h) {
            return Err(Error::InvalidConfig(
                "granularity map is not surjective onto the coarse groups".into(),
            ));
        }
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::InvalidConfig("users must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.disparity) {
            return Err(Error::InvalidConfig(format!(
                "disparity {} outside [0, 1]",
                self.disparity
            )));
        }
        if self.dim_t == 0 || self.dim_y == 0 || self.latent_dim == 0 || self.specific_dim == 0 {
            return Err(Error::InvalidConfig("dimensions must be > 0".into()));
        }
        if self.noise < 0.0 || self.video_noise < 0.0 {
            return Err(Error::InvalidConfig("noise scales must be >= 0".into()));
        }
        if self.shared_clusters == 0 || self.platform_clusters == 0 {
            return Err(Error::InvalidConfig("cluster counts must be > 0".into()));
        }
        self.resolved_granularity().map(|_| ())
    }
}

/// Smooth positive squash; approaches ReLU as [`SHARPNESS`] grows.
fn positive(x: f64) -> f64 {
    softplus(SHARPNESS * x) / SHARPNESS
}

fn softplus(x: f64) -> f64 {
    // ln(1 + e^x) without overflow for large |x|.
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn normal_vec(rng: &mut RngStream, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * rng.normal()).collect()
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let sum: f64 = v.iter().sum();
    for e in &mut v {
        *e /= sum;
    }
    v
}

/// Dense factor-loading matrices and cluster centers shared by all users.
struct Structure {
    a_t: Vec<Vec<f64>>,      // dim_t rows of latent_dim
    b_t: Vec<Vec<f64>>,      // dim_t rows of specific_dim
    b_y: Vec<Vec<f64>>,      // dim_y rows of specific_dim
    shared_centers: Vec<Vec<f64>>,
    t_centers: Vec<Vec<f64>>,
    y_centers: Vec<Vec<f64>>,
    gmap: Vec<usize>,
}

impl Structure {
    fn build(cfg: &SyntheticConfig, rng: &mut RngStream) -> Result<Self> {
        let load = |rng: &mut RngStream, rows: usize, cols: usize| -> Vec<Vec<f64>> {
            let scale = 1.0 / (cols as f64).sqrt();
            (0..rows).map(|_| normal_vec(rng, cols, scale)).collect()
        };
        let mut b_t = load(rng, cfg.dim_t, cfg.specific_dim);
        for row in &mut b_t {
            for v in row {
                *v *= T_SPECIFIC_GAIN;
            }
        }
        Ok(Self {
            a_t: load(rng, cfg.dim_t, cfg.latent_dim),
            b_t,
            b_y: load(rng, cfg.dim_y, cfg.specific_dim),
            shared_centers: (0..cfg.shared_clusters)
                .map(|_| normal_vec(rng, cfg.latent_dim, CENTER_SCALE))
                .collect(),
            t_centers: (0..cfg.platform_clusters)
                .map(|_| normal_vec(rng, cfg.specific_dim, CENTER_SCALE))
                .collect(),
            y_centers: (0..cfg.platform_clusters)
                .map(|_| normal_vec(rng, cfg.specific_dim, Y_CENTER_SCALE))
                .collect(),
            gmap: cfg.resolved_granularity()?,
        })
    }

    fn mix(matrix: &[Vec<f64>], latent: &[f64]) -> Vec<f64> {
        matrix
            .iter()
            .map(|row| row.iter().zip(latent).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Draws one user's pair of topic vectors.
    fn draw_user(&self, cfg: &SyntheticConfig, rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
        let delta = cfg.disparity;

        let z_center = &self.shared_centers[rng.index(self.shared_centers.len())];
        let z: Vec<f64> = z_center
            .iter()
            .map(|c| c + CLUSTER_SPREAD * rng.normal())
            .collect();
        let et_center = &self.t_centers[rng.index(self.t_centers.len())];
        let (mag_lo, mag_hi) = T_USER_MAGNITUDE_RANGE;
        let t_magnitude = rng.uniform(mag_lo, mag_hi);
        let e_t: Vec<f64> = et_center
            .iter()
            .map(|c| t_magnitude * (c + CLUSTER_SPREAD * rng.normal()))
            .collect();
        let ey_center = &self.y_centers[rng.index(self.y_centers.len())];
        let e_y: Vec<f64> = ey_center
            .iter()
            .map(|c| c + CLUSTER_SPREAD * rng.normal())
            .collect();

        let t_mix = Self::mix(&self.a_t, &z);
        let t_spec = Self::mix(&self.b_t, &e_t);
        let shared_pos: Vec<f64> = t_mix.iter().map(|&x| positive(x)).collect();

        let mut t_raw = Vec::with_capacity(cfg.dim_t);
        for i in 0..cfg.dim_t {
            let v = positive((1.0 - delta) * t_mix[i] + delta * t_spec[i]);
            t_raw.push(v + cfg.noise * rng.normal().abs());
        }
        let u_t = normalize(t_raw);

        let y_spec = Self::mix(&self.b_y, &e_y);
        let mut y_raw = vec![0.0; cfg.dim_y];
        for i in 0..cfg.dim_t {
            y_raw[self.gmap[i]] += (1.0 - delta) * shared_pos[i];
        }
        for (out, &s) in y_raw.iter_mut().zip(&y_spec) {
            *out += delta * positive(s);
        }
        for out in &mut y_raw {
            *out += cfg.noise * rng.normal().abs();
        }
        let u_y = normalize(y_raw);

        (u_t, u_y)
    }

    /// A fresh point on the video-platform manifold, used as a video anchor.
    fn draw_video_anchor(&self, cfg: &SyntheticConfig, rng: &mut RngStream) -> Vec<f64> {
        let (_, u_y) = self.draw_user(cfg, rng);
        u_y
    }
}

fn jitter_on_simplex(anchor: &[f64], scale: f64, rng: &mut RngStream) -> Vec<f64> {
    normalize(
        anchor
            .iter()
            .map(|&a| a + scale * rng.normal().abs())
            .collect(),
    )
}

/// Generates a dataset from `cfg`; byte-identical across runs for the same
/// config and seed.
pub fn gen_synthetic(cfg: &SyntheticConfig) -> Result<Dataset> {
    cfg.validate()?;
    let root = RngStream::new(cfg.seed);
    let mut rng_structure = root.derive("structure");
    let structure = Structure::build(cfg, &mut rng_structure)?;

    let mut rng_users = root.derive("users");
    let dims = PlatformDims { dim_t: cfg.dim_t, dim_y: cfg.dim_y };
    let mut users = Vec::with_capacity(cfg.users);
    for i in 0..cfg.users {
        let (u_t, u_y) = structure.draw_user(cfg, &mut rng_users);
        users.push(AlignedUser {
            id: format!("u{i:05}"),
            twitter: TopicVector::new(Platform::Twitter, u_t, cfg.dim_t)?,
            youtube: TopicVector::new(Platform::Youtube, u_y, cfg.dim_y)?,
        });
    }

    let mut rng_videos = root.derive("videos");
    let n_anchors = cfg.platform_clusters.max(1);
    let anchors: Vec<Vec<f64>> = (0..n_anchors)
        .map(|_| structure.draw_video_anchor(cfg, &mut rng_videos))
        .collect();

    let mut videos = Vec::new();
    let mut interactions = InteractionSet::new();
    for j in 0..cfg.background_videos {
        let anchor = &anchors[rng_videos.index(n_anchors)];
        let vec = jitter_on_simplex(anchor, cfg.video_noise, &mut rng_videos);
        videos.push(VideoRecord {
            id: format!("bg{j:06}"),
            vec: TopicVector::new(Platform::Youtube, vec, cfg.dim_y)?,
        });
    }
    for (i, user) in users.iter().enumerate() {
        for k in 0..cfg.videos_per_user {
            let vec = jitter_on_simplex(&user.youtube.entries, cfg.video_noise, &mut rng_videos);
            let id = format!("v{i:05}_{k}");
            videos.push(VideoRecord {
                id: id.clone(),
                vec: TopicVector::new(Platform::Youtube, vec, cfg.dim_y)?,
            });
            interactions.insert(&user.id, &id);
        }
    }

    let dataset = Dataset {
        users,
        videos,
        interactions,
        dims,
        provenance: Provenance::Generated { config: cfg.clone() },
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Writes the generator manifest next to the dataset files.
pub fn write_manifest(cfg: &SyntheticConfig, dir: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct Manifest<'a> {
        format_version: u32,
        seed: u64,
        config: &'a SyntheticConfig,
    }
    fs::create_dir_all(dir)?;
    let manifest = Manifest {
        format_version: SYNTHETIC_MANIFEST_VERSION,
        seed: cfg.seed,
        config: cfg,
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// Aggregates a fine-topic vector through the granularity map.
pub fn aggregate_fine_to_coarse(fine: &[f64], gmap: &[usize], coarse_groups: usize) -> Vec<f64> {
    let mut out = vec![0.0; coarse_groups];
    for (i, &g) in gmap.iter().enumerate() {
        out[g] += fine[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SyntheticConfig {
        SyntheticConfig {
            users: 40,
            dim_t: 12,
            dim_y: 10,
            latent_dim: 4,
            specific_dim: 4,
            coarse_groups: 5,
            videos_per_user: 3,
            background_videos: 20,
            seed: 7,
            ..SyntheticConfig::default()
        }
    }

    #[test]
    fn zero_disparity_zero_noise_aggregates_exactly() {
        let cfg = SyntheticConfig {
            disparity: 0.0,
            noise: 0.0,
            ..small_cfg()
        };
        let gmap = cfg.resolved_granularity().unwrap();
        let d = gen_synthetic(&cfg).unwrap();
        for u in &d.users {
            let agg = aggregate_fine_to_coarse(&u.twitter.entries, &gmap, cfg.coarse_groups);
            for (g, &a) in agg.iter().enumerate() {
                assert!(
                    (u.youtube.entries[g] - a).abs() < 1e-12,
                    "user {}: coarse dim {g} is {} vs aggregated {a}",
                    u.id,
                    u.youtube.entries[g]
                );
            }
            for &rest in &u.youtube.entries[cfg.coarse_groups..] {
                assert_eq!(rest, 0.0);
            }
        }
    }

    #[test]
    fn same_config_same_seed_is_byte_identical() {
        let cfg = small_cfg();
        let a = serde_json::to_string(&gen_synthetic(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&gen_synthetic(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let cfg = small_cfg();
        let other = SyntheticConfig { seed: 8, ..cfg.clone() };
        let a = serde_json::to_string(&gen_synthetic(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&gen_synthetic(&other).unwrap()).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn full_disparity_decorrelates_platforms() {
        let cfg = SyntheticConfig {
            users: 1200,
            disparity: 1.0,
            noise: 0.01,
            videos_per_user: 1,
            background_videos: 1,
            ..SyntheticConfig::default()
        };
        let gmap = cfg.resolved_granularity().unwrap();
        let d = gen_synthetic(&cfg).unwrap();

        // Independent correlation oracle: plain two-pass Pearson r per coarse
        // dimension, computed from raw sums.
        let n = d.users.len();
        let mut mean_r = 0.0;
        for g in 0..cfg.coarse_groups {
            let xs: Vec<f64> = d
                .users
                .iter()
                .map(|u| {
                    aggregate_fine_to_coarse(&u.twitter.entries, &gmap, cfg.coarse_groups)[g]
                })
                .collect();
            let ys: Vec<f64> = d.users.iter().map(|u| u.youtube.entries[g]).collect();
            let mx = xs.iter().sum::<f64>() / n as f64;
            let my = ys.iter().sum::<f64>() / n as f64;
            let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
            mean_r += cov / (vx * vy).sqrt();
        }
        mean_r /= cfg.coarse_groups as f64;
        assert!(mean_r.abs() < 0.1, "mean per-dim correlation {mean_r}");
    }

    #[test]
    fn invalid_granularity_maps_are_rejected() {
        let mut cfg = small_cfg();
        cfg.granularity_map = Some(vec![0; cfg.dim_t]); // misses groups 1..5
        assert!(gen_synthetic(&cfg).is_err());

        let mut cfg = small_cfg();
        cfg.granularity_map = Some(vec![99; cfg.dim_t]);
        assert!(gen_synthetic(&cfg).is_err());

        let mut cfg = small_cfg();
        cfg.coarse_groups = cfg.dim_y + 1;
        assert!(gen_synthetic(&cfg).is_err());
    }

    #[test]
    fn simplex_invariant_holds_for_all_generated_vectors() {
        let d = gen_synthetic(&small_cfg()).unwrap();
        for u in &d.users {
            let st: f64 = u.twitter.entries.iter().sum();
            let sy: f64 = u.youtube.entries.iter().sum();
            assert!((st - 1.0).abs() < 1e-9);
            assert!((sy - 1.0).abs() < 1e-9);
            assert!(u.twitter.entries.iter().all(|&v| v >= 0.0));
            assert!(u.youtube.entries.iter().all(|&v| v >= 0.0));
        }
        for v in &d.videos {
            let s: f64 = v.vec.entries.iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
        assert_eq!(d.video_count(), 20 + 40 * 3);
        d.validate().unwrap();
    }
}
