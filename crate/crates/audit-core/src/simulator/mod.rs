//! Synthetic audit generator with a controllable personalization strength.
//!
//! The generator produces datasets in the exact bundle format the rest of the
//! crate consumes, together with ground truth, so the statistical pipeline
//! can be calibrated (no personalization injected: p-values must be uniform)
//! and power-tested (strong personalization injected: it must be detected).
//!
//! Design: which comments appear in an exposure list is decided by a
//! group-independent popularity score with a small per-account jitter, while
//! the *order* of the selected comments follows the personalized score
//! `(1 - lambda) * popularity + lambda * affinity(group, stance) + noise`.
//! Personalization therefore reorders a (nearly) shared comment set and
//! never changes what is shown, mirroring a ranking-only intervention.
//! Control accounts have constant affinity, so their ordering stays
//! popularity-driven at any `lambda` while per-account noise keeps genuine
//! within-group variance.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data_model::{
    save_dataset, AuditAccount, AuditDataset, CommentRecord, Group, RankedExposure, VideoRecord,
};
use crate::error::{Error, Result};
use crate::seed::derive_rng;
use crate::stance::{collapse_stance, StanceLabel3, StanceLabel5};

const STANCE_TAG: u64 = 1;
const LIKES_TAG: u64 = 2;
const REPLIES_TAG: u64 = 3;
const SELECTION_TAG: u64 = 4;
const ORDERING_TAG: u64 = 5;
const TEXT_TAG: u64 = 6;
const JITTER_TAG: u64 = 7;

/// Simulator configuration. Serializable from a TOML file; see the README
/// for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_videos: usize,
    pub accounts_left: usize,
    pub accounts_right: usize,
    pub accounts_control: usize,
    /// Comment pool size per video.
    pub comments_per_video: usize,
    /// Upper bound on a uniform per-video addition to the pool size, so
    /// comment volume varies across videos. Zero keeps pools equal.
    #[serde(default)]
    pub comments_jitter: usize,
    /// (left, right, neutral) stance mixture; must sum to 1.
    pub stance_mixture: [f64; 3],
    /// Rich-get-richer strength for likes/replies: the next engagement goes
    /// to comment i with probability proportional to (count_i + 1)^alpha.
    pub engagement_alpha: f64,
    /// Personalization strength in [0, 1]: weight of group affinity in the
    /// ordering score.
    pub lambda: f64,
    /// Per-account ordering noise scale.
    pub noise_scale: f64,
    /// Per-account selection jitter scale; defaults to a tenth of
    /// `noise_scale`, keeping exposure composition nearly shared.
    #[serde(default)]
    pub selection_noise: Option<f64>,
    /// Emitted exposure list length.
    pub list_length: usize,
    /// Total likes distributed per video (default 10x the pool size).
    #[serde(default)]
    pub likes_total: Option<usize>,
    /// Total replies distributed per video (default 2x the pool size).
    #[serde(default)]
    pub replies_total: Option<usize>,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_videos == 0 {
            return Err(Error::Config("n_videos must be positive".into()));
        }
        if self.list_length == 0 {
            return Err(Error::Config("list_length must be positive".into()));
        }
        if self.comments_per_video < self.list_length {
            return Err(Error::Config(format!(
                "comments_per_video ({}) must be at least list_length ({})",
                self.comments_per_video, self.list_length
            )));
        }
        let mixture_sum: f64 = self.stance_mixture.iter().sum();
        if self.stance_mixture.iter().any(|p| !(0.0..=1.0).contains(p)) || (mixture_sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "stance_mixture must be unit-interval and sum to 1, got {:?}",
                self.stance_mixture
            )));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config("lambda must be in [0, 1]".into()));
        }
        if self.noise_scale < 0.0 || self.engagement_alpha < 0.0 {
            return Err(Error::Config("noise_scale and engagement_alpha must be nonnegative".into()));
        }
        if self.selection_noise.is_some_and(|s| s < 0.0) {
            return Err(Error::Config("selection_noise must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<SimConfig> {
        let config: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn selection_noise(&self) -> f64 {
        self.selection_noise.unwrap_or(self.noise_scale * 0.1)
    }

    fn likes_total(&self) -> usize {
        self.likes_total.unwrap_or(self.comments_per_video * 10)
    }

    fn replies_total(&self) -> usize {
        self.replies_total.unwrap_or(self.comments_per_video * 2)
    }

    /// The account roster implied by the group sizes: L01.., R01.., C01..
    pub fn accounts(&self) -> Vec<AuditAccount> {
        let mut accounts = Vec::new();
        for (prefix, group, count) in [
            ("L", Group::Left, self.accounts_left),
            ("R", Group::Right, self.accounts_right),
            ("C", Group::Control, self.accounts_control),
        ] {
            for i in 1..=count {
                accounts.push(AuditAccount { account_id: format!("{prefix}{i:02}"), group });
            }
        }
        accounts
    }
}

/// Ground-truth labels accompanying a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub accounts: Vec<AuditAccount>,
    pub videos: Vec<VideoTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoTruth {
    pub video_id: String,
    pub lambda: f64,
    /// Collapsed stance per comment id.
    pub stances: BTreeMap<String, StanceLabel3>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TruthRow {
    Account { account_id: String, group: Group },
    Video { video_id: String, lambda: f64 },
    Comment { comment_id: String, video_id: String, stance: StanceLabel3 },
}

const LEFT_TEXTS: &[&str] = &[
    "cant wait for madam president",
    "vote blue 💙",
    "kamala has my vote",
    "orange man has to go",
];
const RIGHT_TEXTS: &[&str] = &[
    "trump2024 let's gooo",
    "maga forever",
    "red wave incoming ❤",
    "sleepy joe did nothing",
];
const NEUTRAL_TEXTS: &[&str] = &[
    "saw this live",
    "what a moment",
    "the audio is off on this one",
    "who else is here before it blows up",
];

/// Generate one video's comment pool: stances drawn from the mixture, likes
/// and replies assigned sequentially with rich-get-richer weighting
/// `(count + 1)^alpha` on independent streams. Deterministic per
/// (seed, video_index).
pub fn generate_comment_pool(config: &SimConfig, video_index: usize) -> Result<Vec<CommentRecord>> {
    config.validate()?;
    let video_id = video_id(video_index);
    let pool_size = pool_size(config, video_index);

    let mut stance_rng = derive_rng(config.seed, &[video_index as u64, STANCE_TAG]);
    let mut text_rng = derive_rng(config.seed, &[video_index as u64, TEXT_TAG]);
    let [p_left, p_right, _] = config.stance_mixture;

    let mut comments = Vec::with_capacity(pool_size);
    for i in 0..pool_size {
        let draw: f64 = stance_rng.gen();
        let stance3 = if draw < p_left {
            StanceLabel3::Left
        } else if draw < p_left + p_right {
            StanceLabel3::Right
        } else {
            StanceLabel3::Neutral
        };
        // Pick a concrete five-way label consistent with the collapsed truth.
        let stance5 = match stance3 {
            StanceLabel3::Left => {
                if stance_rng.gen::<bool>() { StanceLabel5::ProDemocrat } else { StanceLabel5::AntiRepublican }
            }
            StanceLabel3::Right => {
                if stance_rng.gen::<bool>() { StanceLabel5::ProRepublican } else { StanceLabel5::AntiDemocrat }
            }
            StanceLabel3::Neutral => StanceLabel5::Neutral,
        };
        let texts = match stance3 {
            StanceLabel3::Left => LEFT_TEXTS,
            StanceLabel3::Right => RIGHT_TEXTS,
            StanceLabel3::Neutral => NEUTRAL_TEXTS,
        };
        let text = texts[text_rng.gen_range(0..texts.len())];
        comments.push(CommentRecord {
            comment_id: format!("{video_id}c{i:04}"),
            video_id: video_id.clone(),
            text: Some(format!("{text} #{i}")),
            like_count: 0,
            reply_count: 0,
            stance: Some(stance5),
        });
    }

    let likes = preferential_counts(
        pool_size,
        config.likes_total(),
        config.engagement_alpha,
        derive_rng(config.seed, &[video_index as u64, LIKES_TAG]),
    );
    let replies = preferential_counts(
        pool_size,
        config.replies_total(),
        config.engagement_alpha,
        derive_rng(config.seed, &[video_index as u64, REPLIES_TAG]),
    );
    for ((comment, like), reply) in comments.iter_mut().zip(likes).zip(replies) {
        comment.like_count = like;
        comment.reply_count = reply;
    }
    Ok(comments)
}

fn preferential_counts(n: usize, total: usize, alpha: f64, mut rng: impl Rng) -> Vec<u64> {
    let mut counts = vec![0u64; n];
    if alpha == 0.0 {
        for _ in 0..total {
            counts[rng.gen_range(0..n)] += 1;
        }
        return counts;
    }
    let mut weights: Vec<f64> = vec![1.0; n];
    let mut weight_sum = n as f64;
    for _ in 0..total {
        let mut target = rng.gen::<f64>() * weight_sum;
        let mut chosen = n - 1;
        for (idx, w) in weights.iter().enumerate() {
            target -= w;
            if target <= 0.0 {
                chosen = idx;
                break;
            }
        }
        counts[chosen] += 1;
        let new_weight = ((counts[chosen] + 1) as f64).powf(alpha);
        weight_sum += new_weight - weights[chosen];
        weights[chosen] = new_weight;
    }
    counts
}

fn affinity(group: Group, stance: StanceLabel3) -> f64 {
    match group {
        Group::Control => 0.5,
        Group::Left => match stance {
            StanceLabel3::Left => 1.0,
            StanceLabel3::Neutral => 0.5,
            StanceLabel3::Right => 0.0,
        },
        Group::Right => match stance {
            StanceLabel3::Right => 1.0,
            StanceLabel3::Neutral => 0.5,
            StanceLabel3::Left => 0.0,
        },
    }
}

/// Generate every account's ranked exposure for one comment pool.
///
/// Selection: top `list_length` comments by `popularity + selection_noise`,
/// group-independent. Ordering of the selected set: descending
/// `(1 - lambda) * popularity + lambda * affinity + noise_scale * noise`.
/// Ties break by comment index. Deterministic per (seed, video, account).
pub fn generate_rankings(
    pool: &[CommentRecord],
    accounts: &[AuditAccount],
    config: &SimConfig,
    video_index: usize,
) -> Result<Vec<RankedExposure>> {
    if pool.len() < config.list_length {
        return Err(Error::Config(format!(
            "pool of {} cannot fill lists of length {}",
            pool.len(),
            config.list_length
        )));
    }
    let video_id = pool[0].video_id.clone();
    let popularity = normalized_popularity(pool);
    let stances: Vec<StanceLabel3> = pool
        .iter()
        .map(|c| collapse_stance(c.stance.expect("simulated comments are labeled")))
        .collect();

    let mut exposures = Vec::with_capacity(accounts.len());
    for (account_index, account) in accounts.iter().enumerate() {
        let mut selection_rng =
            derive_rng(config.seed, &[video_index as u64, account_index as u64, SELECTION_TAG, JITTER_TAG]);
        let mut ordering_rng =
            derive_rng(config.seed, &[video_index as u64, account_index as u64, ORDERING_TAG]);

        let selection_scores: Vec<f64> = popularity
            .iter()
            .map(|&pop| {
                let noise: f64 = StandardNormal.sample(&mut selection_rng);
                pop + config.selection_noise() * noise
            })
            .collect();
        let mut selected = top_indices(&selection_scores, config.list_length);

        let ordering_noise: Vec<f64> = (0..pool.len())
            .map(|_| StandardNormal.sample(&mut ordering_rng))
            .collect();
        let ordering_scores: Vec<f64> = (0..pool.len())
            .map(|i| {
                (1.0 - config.lambda) * popularity[i]
                    + config.lambda * affinity(account.group, stances[i])
                    + config.noise_scale * ordering_noise[i]
            })
            .collect();
        selected.sort_by(|&a, &b| {
            ordering_scores[b]
                .partial_cmp(&ordering_scores[a])
                .expect("finite scores")
                .then(a.cmp(&b))
        });

        exposures.push(RankedExposure {
            video_id: video_id.clone(),
            account_id: account.account_id.clone(),
            items: selected.iter().map(|&i| pool[i].comment_id.clone()).collect(),
        });
    }
    Ok(exposures)
}

fn normalized_popularity(pool: &[CommentRecord]) -> Vec<f64> {
    let likes: Vec<f64> = pool.iter().map(|c| c.like_count as f64).collect();
    let min = likes.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = likes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max > min {
        likes.iter().map(|l| (l - min) / (max - min)).collect()
    } else {
        vec![0.5; pool.len()]
    }
}

fn top_indices(scores: &[f64], k: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..scores.len()).collect();
    indices.sort_by(|&a, &b| {
        scores[b].partial_cmp(&scores[a]).expect("finite scores").then(a.cmp(&b))
    });
    indices.truncate(k);
    indices
}

/// Generate one full video (pool + exposures) plus its ground truth, using
/// `config.lambda`. Sweeps vary the config per call while keeping the seed.
pub fn generate_video(
    config: &SimConfig,
    video_index: usize,
    accounts: &[AuditAccount],
) -> Result<(VideoRecord, VideoTruth)> {
    let pool = generate_comment_pool(config, video_index)?;
    let exposures = generate_rankings(&pool, accounts, config, video_index)?;
    let stances = pool
        .iter()
        .map(|c| (c.comment_id.clone(), collapse_stance(c.stance.expect("labeled"))))
        .collect();
    let video_id = video_id(video_index);
    Ok((
        VideoRecord {
            video_id: video_id.clone(),
            description: format!("simulated discussion #{video_index}"),
            channel_id: "sim".into(),
            comments: pool,
            exposures,
        },
        VideoTruth { video_id, lambda: config.lambda, stances },
    ))
}

/// Run the full synthetic audit: every account exposed to every video.
pub fn run_synthetic_audit(config: &SimConfig) -> Result<(AuditDataset, GroundTruth)> {
    config.validate()?;
    let accounts = config.accounts();
    if accounts.is_empty() {
        return Err(Error::Config("no accounts configured".into()));
    }
    let mut videos = Vec::with_capacity(config.n_videos);
    let mut truths = Vec::with_capacity(config.n_videos);
    for video_index in 0..config.n_videos {
        let (video, truth) = generate_video(config, video_index, &accounts)?;
        videos.push(video);
        truths.push(truth);
    }
    let dataset = AuditDataset::new(accounts.clone(), videos)?;
    Ok((dataset, GroundTruth { accounts, videos: truths }))
}

/// Write the dataset bundle plus `ground_truth.jsonl` into `dir`.
pub fn write_bundle(dataset: &AuditDataset, truth: &GroundTruth, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = save_dataset(dataset, dir)?;
    let truth_path = dir.join("ground_truth.jsonl");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&truth_path)?);
    use std::io::Write;
    for account in &truth.accounts {
        serde_json::to_writer(
            &mut out,
            &TruthRow::Account { account_id: account.account_id.clone(), group: account.group },
        )?;
        out.write_all(b"\n")?;
    }
    for video in &truth.videos {
        serde_json::to_writer(
            &mut out,
            &TruthRow::Video { video_id: video.video_id.clone(), lambda: video.lambda },
        )?;
        out.write_all(b"\n")?;
        for (comment_id, stance) in &video.stances {
            serde_json::to_writer(
                &mut out,
                &TruthRow::Comment {
                    comment_id: comment_id.clone(),
                    video_id: video.video_id.clone(),
                    stance: *stance,
                },
            )?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    written.push(truth_path);
    Ok(written)
}

/// Collapsed stance map over all videos, as consumed by the exposure tests.
pub fn truth_stance_map(truth: &GroundTruth) -> BTreeMap<String, StanceLabel3> {
    truth
        .videos
        .iter()
        .flat_map(|v| v.stances.iter().map(|(id, s)| (id.clone(), *s)))
        .collect()
}

fn video_id(video_index: usize) -> String {
    format!("v{video_index:04}")
}

fn pool_size(config: &SimConfig, video_index: usize) -> usize {
    if config.comments_jitter == 0 {
        return config.comments_per_video;
    }
    let mut rng = derive_rng(config.seed, &[video_index as u64, JITTER_TAG]);
    config.comments_per_video + rng.gen_range(0..=config.comments_jitter)
}
