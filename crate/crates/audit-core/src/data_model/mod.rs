//! Canonical audit data types and JSONL persistence.
//!
//! A dataset bundles the account roster with per-video comment pools and the
//! ranked exposure lists each account observed. Bundles are stored as JSON
//! Lines files referenced by a small manifest (see [`io`]). Datasets are
//! immutable after [`io::load_dataset`] and safe to share across threads.

mod io;

pub use io::{load_dataset, save_dataset, Manifest, MANIFEST_FILE};

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stance::StanceLabel5;

/// Audit group an account belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Left,
    Right,
    Control,
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Group::Left => write!(f, "left"),
            Group::Right => write!(f, "right"),
            Group::Control => write!(f, "control"),
        }
    }
}

/// One audit account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditAccount {
    pub account_id: String,
    pub group: Group,
}

/// One top-level comment on a video. IDs are opaque strings and never parsed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub comment_id: String,
    pub video_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub like_count: u64,
    pub reply_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stance: Option<StanceLabel5>,
}

/// The ordered comment list one account saw on one video.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedExposure {
    pub video_id: String,
    pub account_id: String,
    pub items: Vec<String>,
}

impl RankedExposure {
    /// Set view of the exposure. Equal in size to `items` because exposures
    /// are duplicate-free.
    pub fn item_set(&self) -> HashSet<&str> {
        self.items.iter().map(String::as_str).collect()
    }
}

/// Keep the first `min(k, len)` items of an exposure, in original order.
/// Shorter lists pass through unchanged.
pub fn truncate_top_k(exposure: &RankedExposure, k: usize) -> RankedExposure {
    assert!(k >= 1, "truncation depth must be at least 1");
    let mut out = exposure.clone();
    out.items.truncate(k.min(out.items.len()));
    out
}

/// A video with its comment pool and the exposures recorded on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub channel_id: String,
    pub comments: Vec<CommentRecord>,
    pub exposures: Vec<RankedExposure>,
}

impl VideoRecord {
    pub fn comment(&self, comment_id: &str) -> Option<&CommentRecord> {
        self.comments.iter().find(|c| c.comment_id == comment_id)
    }
}

/// A fully validated audit dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditDataset {
    pub accounts: Vec<AuditAccount>,
    pub videos: Vec<VideoRecord>,
}

impl AuditDataset {
    /// Build a dataset, normalize ordering, and check every invariant.
    pub fn new(accounts: Vec<AuditAccount>, videos: Vec<VideoRecord>) -> Result<AuditDataset> {
        let mut dataset = AuditDataset { accounts, videos };
        dataset.normalize();
        dataset.validate()?;
        Ok(dataset)
    }

    /// Sort accounts, videos, comments, and exposures by their IDs. Exposure
    /// item order is ranking data and is preserved verbatim.
    pub fn normalize(&mut self) {
        self.accounts.sort_by(|a, b| a.account_id.cmp(&b.account_id));
        self.videos.sort_by(|a, b| a.video_id.cmp(&b.video_id));
        for video in &mut self.videos {
            video.comments.sort_by(|a, b| a.comment_id.cmp(&b.comment_id));
            video.exposures.sort_by(|a, b| a.account_id.cmp(&b.account_id));
        }
    }

    pub fn account(&self, account_id: &str) -> Option<&AuditAccount> {
        self.accounts.iter().find(|a| a.account_id == account_id)
    }

    pub fn video(&self, video_id: &str) -> Option<&VideoRecord> {
        self.videos.iter().find(|v| v.video_id == video_id)
    }

    pub fn groups_present(&self) -> BTreeSet<Group> {
        self.accounts.iter().map(|a| a.group).collect()
    }

    /// Eagerly check all structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.accounts.is_empty() {
            return Err(Error::NoAccounts);
        }
        let mut roster = BTreeSet::new();
        for account in &self.accounts {
            if account.account_id.is_empty() {
                return Err(Error::InvalidInput("empty account_id".into()));
            }
            if !roster.insert(account.account_id.as_str()) {
                return Err(Error::Duplicate(format!("account {}", account.account_id)));
            }
        }

        let mut video_ids = BTreeSet::new();
        for video in &self.videos {
            if video.video_id.is_empty() {
                return Err(Error::InvalidInput("empty video_id".into()));
            }
            if !video_ids.insert(video.video_id.as_str()) {
                return Err(Error::Duplicate(format!("video {}", video.video_id)));
            }

            let mut comment_ids = BTreeSet::new();
            for comment in &video.comments {
                if comment.video_id != video.video_id {
                    return Err(Error::Integrity(format!(
                        "comment {} carries video_id {} inside video {}",
                        comment.comment_id, comment.video_id, video.video_id
                    )));
                }
                if !comment_ids.insert(comment.comment_id.as_str()) {
                    return Err(Error::Duplicate(format!(
                        "comment {} in video {}",
                        comment.comment_id, video.video_id
                    )));
                }
            }

            let mut seen_accounts = BTreeSet::new();
            for exposure in &video.exposures {
                if exposure.video_id != video.video_id {
                    return Err(Error::Integrity(format!(
                        "exposure for account {} carries video_id {} inside video {}",
                        exposure.account_id, exposure.video_id, video.video_id
                    )));
                }
                if !roster.contains(exposure.account_id.as_str()) {
                    return Err(Error::Integrity(format!(
                        "exposure on video {} references unknown account {}",
                        video.video_id, exposure.account_id
                    )));
                }
                if !seen_accounts.insert(exposure.account_id.as_str()) {
                    return Err(Error::Duplicate(format!(
                        "exposure for account {} on video {}",
                        exposure.account_id, video.video_id
                    )));
                }
                if exposure.items.is_empty() {
                    return Err(Error::InvalidInput(format!(
                        "empty exposure for account {} on video {}",
                        exposure.account_id, video.video_id
                    )));
                }
                let mut seen_items = HashSet::with_capacity(exposure.items.len());
                for item in &exposure.items {
                    if !seen_items.insert(item.as_str()) {
                        return Err(Error::Duplicate(format!(
                            "comment {} repeated in exposure for account {} on video {}",
                            item, exposure.account_id, video.video_id
                        )));
                    }
                    if !comment_ids.contains(item.as_str()) {
                        return Err(Error::Integrity(format!(
                            "exposure for account {} on video {} references unknown comment_id {}",
                            exposure.account_id, video.video_id, item
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Map from account id to group for quick lookups.
    pub fn group_map(&self) -> BTreeMap<&str, Group> {
        self.accounts
            .iter()
            .map(|a| (a.account_id.as_str(), a.group))
            .collect()
    }
}
