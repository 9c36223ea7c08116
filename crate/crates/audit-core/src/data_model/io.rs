//! JSONL bundle persistence.
//!
//! A bundle is a directory holding a `manifest.json` plus one JSON Lines file
//! per record kind. The manifest maps record kinds to file paths (relative
//! paths resolve against the manifest's directory):
//!
//! ```json
//! {"accounts": "accounts.jsonl", "comments": "comments.jsonl",
//!  "exposures": "exposures.jsonl", "videos": "videos.jsonl"}
//! ```
//!
//! The `videos` entry is optional; without it, video descriptions and channel
//! ids default to empty strings. One record per line, UTF-8 throughout.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AuditAccount, AuditDataset, CommentRecord, RankedExposure, VideoRecord};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Manifest of a JSONL bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub accounts: PathBuf,
    pub comments: PathBuf,
    pub exposures: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub videos: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VideoRow {
    video_id: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    channel_id: String,
}

/// Load and fully validate a dataset from a manifest path (or a directory
/// containing `manifest.json`).
pub fn load_dataset(path: &Path) -> Result<AuditDataset> {
    let manifest_path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let manifest: Manifest = serde_json::from_reader(BufReader::new(File::open(&manifest_path)?))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let accounts: Vec<AuditAccount> = read_jsonl(&resolve(base, &manifest.accounts))?;
    let comments: Vec<CommentRecord> = read_jsonl(&resolve(base, &manifest.comments))?;
    let exposures: Vec<RankedExposure> = read_jsonl(&resolve(base, &manifest.exposures))?;
    let video_rows: Vec<VideoRow> = match &manifest.videos {
        Some(p) => read_jsonl(&resolve(base, p))?,
        None => Vec::new(),
    };

    let mut videos: BTreeMap<String, VideoRecord> = BTreeMap::new();
    for row in video_rows {
        videos.insert(
            row.video_id.clone(),
            VideoRecord {
                video_id: row.video_id,
                description: row.description,
                channel_id: row.channel_id,
                comments: Vec::new(),
                exposures: Vec::new(),
            },
        );
    }
    for comment in comments {
        videos
            .entry(comment.video_id.clone())
            .or_insert_with(|| empty_video(&comment.video_id))
            .comments
            .push(comment);
    }
    for exposure in exposures {
        videos
            .entry(exposure.video_id.clone())
            .or_insert_with(|| empty_video(&exposure.video_id))
            .exposures
            .push(exposure);
    }

    AuditDataset::new(accounts, videos.into_values().collect())
}

/// Write a dataset as a JSONL bundle into `dir`, creating it if needed.
/// Returns the paths written (manifest first). Output is order-normalized and
/// byte-deterministic.
pub fn save_dataset(dataset: &AuditDataset, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut normalized = dataset.clone();
    normalized.normalize();
    normalized.validate()?;

    std::fs::create_dir_all(dir)?;
    let manifest = Manifest {
        accounts: PathBuf::from("accounts.jsonl"),
        comments: PathBuf::from("comments.jsonl"),
        exposures: PathBuf::from("exposures.jsonl"),
        videos: Some(PathBuf::from("videos.jsonl")),
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut out = BufWriter::new(File::create(&manifest_path)?);
    serde_json::to_writer_pretty(&mut out, &manifest)?;
    out.write_all(b"\n")?;
    out.flush()?;

    let accounts_path = dir.join(&manifest.accounts);
    write_jsonl(&accounts_path, normalized.accounts.iter())?;

    let comments_path = dir.join(&manifest.comments);
    write_jsonl(&comments_path, normalized.videos.iter().flat_map(|v| v.comments.iter()))?;

    let exposures_path = dir.join(&manifest.exposures);
    write_jsonl(&exposures_path, normalized.videos.iter().flat_map(|v| v.exposures.iter()))?;

    let videos_path = dir.join(manifest.videos.as_ref().unwrap());
    let rows: Vec<VideoRow> = normalized
        .videos
        .iter()
        .map(|v| VideoRow {
            video_id: v.video_id.clone(),
            description: v.description.clone(),
            channel_id: v.channel_id.clone(),
        })
        .collect();
    write_jsonl(&videos_path, rows.iter())?;

    Ok(vec![manifest_path, accounts_path, comments_path, exposures_path, videos_path])
}

fn empty_video(video_id: &str) -> VideoRecord {
    VideoRecord {
        video_id: video_id.to_string(),
        description: String::new(),
        channel_id: String::new(),
        comments: Vec::new(),
        exposures: Vec::new(),
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| {
        Error::InvalidInput(format!("cannot open {}: {e}", path.display()))
    })?;
    let display = path.display().to_string();
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            file: display.clone(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    rows: impl Iterator<Item = &'a T>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
