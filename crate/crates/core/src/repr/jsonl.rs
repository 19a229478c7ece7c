//! JSONL dataset files.
//!
//! One JSON object per line:
//!   users.jsonl:        {"id": str, "twitter": [f64; dim_t], "youtube": [f64; dim_y]}
//!   videos.jsonl:       {"id": str, "vec": [f64; dim_y]}
//!   interactions.jsonl: {"user": str, "videos": [str, ...]}

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{
    AlignedUser, Dataset, InteractionSet, Platform, PlatformDims, Provenance, TopicVector,
    VideoRecord,
};

#[derive(Serialize, Deserialize)]
struct UserLine {
    id: String,
    twitter: Vec<f64>,
    youtube: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct VideoLine {
    id: String,
    vec: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct InteractionLine {
    user: String,
    videos: Vec<String>,
}

fn data_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::DataFormat {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(line)
            .map_err(|e| data_err(path, lineno, format!("malformed record: {e}")))?;
        out.push((lineno, record));
    }
    Ok(out)
}

/// Loads and validates a dataset from its three JSONL files.
///
/// Vectors are renormalized onto the simplex; any violation is reported with
/// the offending file and line number.
pub fn load_dataset(
    users_path: &Path,
    videos_path: &Path,
    interactions_path: &Path,
    dims: PlatformDims,
) -> Result<Dataset> {
    let mut users = Vec::new();
    let mut user_ids = BTreeSet::new();
    for (lineno, rec) in parse_lines::<UserLine>(users_path)? {
        let twitter = TopicVector::new(Platform::Twitter, rec.twitter, dims.dim_t)
            .map_err(|e| data_err(users_path, lineno, format!("user {}: {e}", rec.id)))?;
        let youtube = TopicVector::new(Platform::Youtube, rec.youtube, dims.dim_y)
            .map_err(|e| data_err(users_path, lineno, format!("user {}: {e}", rec.id)))?;
        if !user_ids.insert(rec.id.clone()) {
            return Err(data_err(users_path, lineno, format!("duplicate user id {}", rec.id)));
        }
        users.push(AlignedUser { id: rec.id, twitter, youtube });
    }

    let mut videos = Vec::new();
    let mut video_ids = BTreeSet::new();
    for (lineno, rec) in parse_lines::<VideoLine>(videos_path)? {
        let vec = TopicVector::new(Platform::Youtube, rec.vec, dims.dim_y)
            .map_err(|e| data_err(videos_path, lineno, format!("video {}: {e}", rec.id)))?;
        if !video_ids.insert(rec.id.clone()) {
            return Err(data_err(videos_path, lineno, format!("duplicate video id {}", rec.id)));
        }
        videos.push(VideoRecord { id: rec.id, vec });
    }

    let mut interactions = InteractionSet::new();
    for (lineno, rec) in parse_lines::<InteractionLine>(interactions_path)? {
        if !user_ids.contains(&rec.user) {
            return Err(data_err(
                interactions_path,
                lineno,
                format!("unknown user {}", rec.user),
            ));
        }
        for v in &rec.videos {
            if !video_ids.contains(v) {
                return Err(data_err(
                    interactions_path,
                    lineno,
                    format!("user {} references unknown video {v}", rec.user),
                ));
            }
            interactions.insert(&rec.user, v);
        }
    }

    let dataset = Dataset {
        users,
        videos,
        interactions,
        dims,
        provenance: Provenance::Loaded {
            users: users_path.display().to_string(),
            videos: videos_path.display().to_string(),
            interactions: interactions_path.display().to_string(),
        },
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Writes `users.jsonl`, `videos.jsonl`, and `interactions.jsonl` into `dir`.
///
/// Output is deterministic: records keep dataset order and floats use the
/// shortest round-trip representation.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut users_out = fs::File::create(dir.join("users.jsonl"))?;
    for u in &dataset.users {
        let line = serde_json::to_string(&UserLine {
            id: u.id.clone(),
            twitter: u.twitter.entries.clone(),
            youtube: u.youtube.entries.clone(),
        })?;
        writeln!(users_out, "{line}")?;
    }

    let mut videos_out = fs::File::create(dir.join("videos.jsonl"))?;
    for v in &dataset.videos {
        let line = serde_json::to_string(&VideoLine {
            id: v.id.clone(),
            vec: v.vec.entries.clone(),
        })?;
        writeln!(videos_out, "{line}")?;
    }

    let mut inter_out = fs::File::create(dir.join("interactions.jsonl"))?;
    for (user, videos) in dataset.interactions.iter() {
        let line = serde_json::to_string(&InteractionLine {
            user: user.clone(),
            videos: videos.iter().cloned().collect(),
        })?;
        writeln!(inter_out, "{line}")?;
    }

    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_fixture(dir: &Path, users: &str, videos: &str, interactions: &str) {
        fs::write(dir.join("users.jsonl"), users).unwrap();
        fs::write(dir.join("videos.jsonl"), videos).unwrap();
        fs::write(dir.join("interactions.jsonl"), interactions).unwrap();
    }

    fn load(dir: &Path, dims: PlatformDims) -> Result<Dataset> {
        load_dataset(
            &dir.join("users.jsonl"),
            &dir.join("videos.jsonl"),
            &dir.join("interactions.jsonl"),
            dims,
        )
    }

    const DIMS2: PlatformDims = PlatformDims { dim_t: 2, dim_y: 2 };

    #[test]
    fn loads_valid_three_user_fixture() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(
            dir.path(),
            concat!(
                "{\"id\":\"u1\",\"twitter\":[0.5,0.5],\"youtube\":[0.2,0.8]}\n",
                "{\"id\":\"u2\",\"twitter\":[0.1,0.9],\"youtube\":[0.3,0.7]}\n",
                "{\"id\":\"u3\",\"twitter\":[0.6,0.4],\"youtube\":[0.9,0.1]}\n",
            ),
            "{\"id\":\"v1\",\"vec\":[1.0,0.0]}\n{\"id\":\"v2\",\"vec\":[0.0,1.0]}\n",
            "{\"user\":\"u1\",\"videos\":[\"v1\",\"v2\"]}\n",
        );
        let d = load(dir.path(), DIMS2).unwrap();
        assert_eq!(d.user_count(), 3);
        assert_eq!(d.video_count(), 2);
        assert_eq!(d.interactions.videos_of("u1").unwrap().len(), 2);
    }

    #[test]
    fn wrong_dimension_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(
            dir.path(),
            concat!(
                "{\"id\":\"u1\",\"twitter\":[0.5,0.5],\"youtube\":[0.2,0.8]}\n",
                "{\"id\":\"u2\",\"twitter\":[1.0],\"youtube\":[0.3,0.7]}\n",
            ),
            "",
            "",
        );
        let err = load(dir.path(), DIMS2).unwrap_err();
        match err {
            Error::DataFormat { line, .. } => assert_eq!(line, 2),
            other => panic!("expected DataFormat, got {other}"),
        }
    }

    #[test]
    fn near_simplex_vector_is_renormalized() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(
            dir.path(),
            "{\"id\":\"u1\",\"twitter\":[0.5,0.5000004],\"youtube\":[0.2,0.8]}\n",
            "",
            "",
        );
        let d = load(dir.path(), DIMS2).unwrap();
        let sum: f64 = d.users[0].twitter.entries.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_video_reference_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(
            dir.path(),
            "{\"id\":\"u1\",\"twitter\":[0.5,0.5],\"youtube\":[0.2,0.8]}\n",
            "{\"id\":\"v1\",\"vec\":[1.0,0.0]}\n",
            "{\"user\":\"u1\",\"videos\":[\"nope\"]}\n",
        );
        let err = load(dir.path(), DIMS2).unwrap_err();
        assert!(err.to_string().contains("nope"));
        assert!(err.to_string().contains("interactions.jsonl:1"));
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(
            dir.path(),
            concat!(
                "{\"id\":\"u1\",\"twitter\":[0.5,0.5],\"youtube\":[0.2,0.8]}\n",
                "{\"id\":\"u2\",\"twitter\":[0.1,0.9],\"youtube\":[0.3,0.7]}\n",
            ),
            "{\"id\":\"v1\",\"vec\":[1.0,0.0]}\n",
            "{\"user\":\"u1\",\"videos\":[\"v1\"]}\n",
        );
        let d = load(dir.path(), DIMS2).unwrap();
        let out = tempfile::tempdir().unwrap();
        write_dataset(&d, out.path()).unwrap();
        let d2 = load(out.path(), DIMS2).unwrap();
        assert_eq!(d.users, d2.users);
        assert_eq!(d.videos, d2.videos);
        assert_eq!(d.interactions, d2.interactions);
    }
}
