//! Pipeline orchestration: everything the CLI runs lives here, as library
//! functions so the whole flow is testable in-process.

mod report;

pub use report::{
    write_classify_report, write_exposure_report, write_report, AnosimRecord, AuditReport,
    ClassifyReport, ClassifyVideoReport, ClusterRow, CorrelationRecord, DroppedVideo,
    ExposureReport, ExposureVideoReport, PcaReport, SkippedVideo, StanceSampleRecord,
    StructureReport, VideoReport,
};

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data_model::{AuditDataset, Group, VideoRecord};
use crate::error::{Error, Result};
use crate::features::{
    compute_features_with, exposure_difference_test, posthoc_ipd, IpdDenominator, Leaning,
    StanceCounts,
};
use crate::rank_metrics::{dissimilarity_matrix, Metric};
use crate::seed::derive_seed;
use crate::stance::{
    collapse_stance, sample_and_estimate, LookupClassifier, StanceClassifier, StanceLabel3,
    StanceLabel5,
};
use crate::stats::{anosim_permutation_test, GroupAssignment};
use crate::structure::{
    cluster_compare, correlation_heatmap_lenient, kmeans, pca, standardize, FeatureTable,
};

const ANALYSIS_PERM_TAG: u64 = 0x504d;
const ANALYSIS_SAMPLE_TAG: u64 = 0x5350;
const ANALYSIS_KMEANS_TAG: u64 = 0x4b4d;
const CLASSIFY_TAG: u64 = 0x434c;

/// The three pairwise group comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grouping {
    #[serde(rename = "L-R")]
    LeftRight,
    #[serde(rename = "L-C")]
    LeftControl,
    #[serde(rename = "R-C")]
    RightControl,
}

impl Grouping {
    pub const ALL: [Grouping; 3] = [Grouping::LeftRight, Grouping::LeftControl, Grouping::RightControl];

    pub fn groups(self) -> (Group, Group) {
        match self {
            Grouping::LeftRight => (Group::Left, Group::Right),
            Grouping::LeftControl => (Group::Left, Group::Control),
            Grouping::RightControl => (Group::Right, Group::Control),
        }
    }
}

impl std::fmt::Display for Grouping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Grouping::LeftRight => write!(f, "L-R"),
            Grouping::LeftControl => write!(f, "L-C"),
            Grouping::RightControl => write!(f, "R-C"),
        }
    }
}

/// Analysis knobs; every threshold has its audit-protocol default.
#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// Exposure truncation depth.
    pub k: usize,
    pub n_permutations: usize,
    pub seed: u64,
    /// Comments sampled per video for the stance composition estimate.
    pub stance_sample: usize,
    /// Worker threads for the per-video fan-out; 0 uses the rayon default.
    /// Output is identical at any setting.
    pub workers: usize,
    pub kmeans_k: usize,
    pub kmeans_restarts: usize,
    pub alpha: f64,
    /// Cumulative explained-variance target for component retention.
    pub variance_target: f64,
    /// Standardize columns before PCA (correlation PCA). Off means raw
    /// covariance.
    pub standardize_pca: bool,
    pub ipd_denominator: IpdDenominator,
}

impl Default for AnalysisOptions {
    fn default() -> AnalysisOptions {
        AnalysisOptions {
            k: 10,
            n_permutations: 1000,
            seed: 0,
            stance_sample: 50,
            workers: 0,
            kmeans_k: 3,
            kmeans_restarts: 10,
            alpha: 0.05,
            variance_target: 0.90,
            standardize_pca: true,
            ipd_denominator: IpdDenominator::PartisanOnly,
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        if self.n_permutations < 1 {
            return Err(Error::InvalidInput("n_permutations must be at least 1".into()));
        }
        if self.stance_sample < 1 {
            return Err(Error::InvalidInput("stance_sample must be at least 1".into()));
        }
        if self.kmeans_k < 1 {
            return Err(Error::InvalidInput("kmeans_k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.variance_target) {
            return Err(Error::InvalidInput("alpha and variance_target must be in [0,1]".into()));
        }
        Ok(())
    }
}

/// Metric/grouping column names used in the wide feature table.
fn metric_column(metric: Metric, grouping: Grouping) -> String {
    let grouping_code = match grouping {
        Grouping::LeftRight => "lr",
        Grouping::LeftControl => "lc",
        Grouping::RightControl => "rc",
    };
    format!("r_{grouping_code}_{metric}")
}

const FEATURE_COLUMNS: [&str; 4] = ["log_volume", "gini_likes", "gini_replies", "ipd"];

/// Run the full analysis: per-video dissimilarity matrices and ANOSIM tests
/// for both metrics and all available groupings, structural features, the
/// correlation table, PCA, and clustering.
pub fn run_analysis(dataset: &AuditDataset, options: &AnalysisOptions) -> Result<AuditReport> {
    options.validate()?;
    dataset.validate()?;
    if dataset.groups_present().len() < 2 {
        return Err(Error::InvalidInput(
            "between-group analysis needs at least 2 groups in the roster".into(),
        ));
    }

    let per_video: Vec<std::result::Result<VideoOutcome, (String, String)>> = {
        let job = || {
            dataset
                .videos
                .par_iter()
                .enumerate()
                .map(|(index, video)| analyze_video(dataset, video, index, options))
                .collect()
        };
        if options.workers > 0 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(options.workers)
                .build()
                .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
            pool.install(job)
        } else {
            job()
        }
    };

    let mut videos = Vec::new();
    let mut skipped = Vec::new();
    for outcome in per_video {
        match outcome {
            Ok(outcome) => videos.push(outcome),
            Err((video_id, reason)) => skipped.push(SkippedVideo { video_id, reason }),
        }
    }

    let (correlations, structure, structure_note) = build_structure(&videos, options)?;

    Ok(AuditReport {
        k: options.k,
        n_permutations: options.n_permutations,
        seed: options.seed,
        alpha: options.alpha,
        videos: videos.into_iter().map(|o| o.report).collect(),
        skipped_videos: skipped,
        correlations,
        structure,
        structure_note,
    })
}

struct VideoOutcome {
    report: VideoReport,
    /// Wide-table row: 4 features then 6 metric columns.
    row: Vec<Option<f64>>,
}

fn analyze_video(
    dataset: &AuditDataset,
    video: &VideoRecord,
    video_index: usize,
    options: &AnalysisOptions,
) -> std::result::Result<VideoOutcome, (String, String)> {
    if video.exposures.len() < 2 {
        return Err((
            video.video_id.clone(),
            format!("{} exposure(s); need at least 2", video.exposures.len()),
        ));
    }

    let mut anosim_records = Vec::new();
    let mut metric_cells: BTreeMap<String, f64> = BTreeMap::new();
    let mut mean_jd = 0.0;
    let mut mean_ndld = 0.0;
    for (metric_index, metric) in [Metric::Jd, Metric::Ndld].into_iter().enumerate() {
        let matrix = dissimilarity_matrix(video, metric, options.k)
            .map_err(|e| (video.video_id.clone(), e.to_string()))?;
        match metric {
            Metric::Jd => mean_jd = matrix.mean_off_diagonal(),
            Metric::Ndld => mean_ndld = matrix.mean_off_diagonal(),
        }
        for (grouping_index, grouping) in Grouping::ALL.into_iter().enumerate() {
            let Some(assignment) = grouping_assignment(dataset, &matrix.account_ids, grouping) else {
                continue;
            };
            let seed = derive_seed(
                options.seed,
                &[ANALYSIS_PERM_TAG, video_index as u64, metric_index as u64, grouping_index as u64],
            );
            let result = anosim_permutation_test(&matrix, &assignment, options.n_permutations, seed)
                .map_err(|e| (video.video_id.clone(), e.to_string()))?;
            metric_cells.insert(metric_column(metric, grouping), result.r);
            anosim_records.push(AnosimRecord::new(metric, grouping, &result));
        }
    }

    // Stance sample over stored labels; unlabeled comments count as failures.
    let sample_seed = derive_seed(options.seed, &[ANALYSIS_SAMPLE_TAG, video_index as u64]);
    let (features, stance_sample) =
        match sample_and_estimate(video, options.stance_sample, sample_seed, &LookupClassifier, 1) {
            Ok(sample) => {
                let record = StanceSampleRecord {
                    n_left: sample.counts.n_left,
                    n_right: sample.counts.n_right,
                    n_neutral: sample.counts.n_neutral,
                    n_requested: sample.n_requested,
                    n_classified: sample.n_classified,
                    n_failed: sample.n_failed,
                };
                let features =
                    compute_features_with(video, &sample.counts, options.ipd_denominator).ok();
                (features, Some(record))
            }
            Err(_) => (None, None),
        };

    let mut row: Vec<Option<f64>> = Vec::with_capacity(10);
    match &features {
        Some(f) => {
            row.push(Some(f.log_volume));
            row.push(Some(f.gini_likes));
            row.push(Some(f.gini_replies));
            row.push(f.ipd);
        }
        None => row.extend([None, None, None, None]),
    }
    for metric in [Metric::Jd, Metric::Ndld] {
        for grouping in Grouping::ALL {
            row.push(metric_cells.get(&metric_column(metric, grouping)).copied());
        }
    }

    Ok(VideoOutcome {
        report: VideoReport {
            video_id: video.video_id.clone(),
            n_exposures: video.exposures.len(),
            mean_jd,
            mean_ndld,
            anosim: anosim_records,
            features,
            stance_sample,
        },
        row,
    })
}

/// Restrict a grouping to the accounts present in a matrix; `None` when
/// either side has fewer than two members there.
fn grouping_assignment(
    dataset: &AuditDataset,
    matrix_accounts: &[String],
    grouping: Grouping,
) -> Option<GroupAssignment> {
    let group_map = dataset.group_map();
    let (a, b) = grouping.groups();
    let labels: BTreeMap<String, String> = matrix_accounts
        .iter()
        .filter_map(|account| {
            let group = *group_map.get(account.as_str())?;
            (group == a || group == b).then(|| (account.clone(), group.to_string()))
        })
        .collect();
    GroupAssignment::new(labels).ok()
}

fn wide_table(videos: &[VideoOutcome]) -> Result<FeatureTable> {
    let mut columns: Vec<String> = FEATURE_COLUMNS.iter().map(|s| s.to_string()).collect();
    for metric in [Metric::Jd, Metric::Ndld] {
        for grouping in Grouping::ALL {
            columns.push(metric_column(metric, grouping));
        }
    }
    FeatureTable::new(
        videos.iter().map(|o| o.report.video_id.clone()).collect(),
        columns,
        videos.iter().map(|o| o.row.clone()).collect(),
    )
}

type StructureParts = (Vec<CorrelationRecord>, Option<StructureReport>, Option<String>);

fn build_structure(videos: &[VideoOutcome], options: &AnalysisOptions) -> Result<StructureParts> {
    if videos.is_empty() {
        return Ok((Vec::new(), None, Some("no analyzable videos".into())));
    }
    let table = wide_table(videos)?;

    // Correlation table: features against all six R columns, degenerate
    // cells left empty.
    let metric_names: Vec<String> = [Metric::Jd, Metric::Ndld]
        .into_iter()
        .flat_map(|metric| Grouping::ALL.into_iter().map(move |g| metric_column(metric, g)))
        .collect();
    let metric_refs: Vec<&str> = metric_names.iter().map(String::as_str).collect();
    let grid = correlation_heatmap_lenient(&table, &FEATURE_COLUMNS, &metric_refs)?;
    let mut correlations = Vec::new();
    for (feature_idx, feature) in FEATURE_COLUMNS.iter().enumerate() {
        for (metric_idx, metric) in metric_names.iter().enumerate() {
            let cell = grid[feature_idx][metric_idx];
            correlations.push(CorrelationRecord {
                feature: feature.to_string(),
                metric: metric.clone(),
                rho: cell.map(|c| c.rho),
                p: cell.map(|c| c.p),
                n: cell.map(|c| c.n),
            });
        }
    }

    // PCA input: the four features plus the three NDLD groupings.
    let mut pca_columns: Vec<&str> = FEATURE_COLUMNS.to_vec();
    let ndld_names: Vec<String> =
        Grouping::ALL.into_iter().map(|g| metric_column(Metric::Ndld, g)).collect();
    pca_columns.extend(ndld_names.iter().map(String::as_str));

    let pca_table = project_columns(&table, &pca_columns)?.drop_incomplete_rows();
    let min_rows = options.kmeans_k.max(3);
    if pca_table.n_rows() < min_rows {
        return Ok((
            correlations,
            None,
            Some(format!(
                "structure analysis needs at least {min_rows} complete videos, found {}",
                pca_table.n_rows()
            )),
        ));
    }

    let prepared = if options.standardize_pca {
        match standardize(&pca_table) {
            Ok(t) => t,
            Err(Error::ConstantInput(column)) => {
                return Ok((
                    correlations,
                    None,
                    Some(format!("constant {column}; PCA skipped")),
                ))
            }
            Err(e) => return Err(e),
        }
    } else {
        pca_table
    };

    let pca_result = match pca(&prepared, options.variance_target) {
        Ok(r) => r,
        Err(Error::InvalidInput(reason)) => {
            return Ok((correlations, None, Some(format!("PCA skipped: {reason}"))))
        }
        Err(e) => return Err(e),
    };

    let scores = pca_result.retained_scores();
    let cluster_seed = derive_seed(options.seed, &[ANALYSIS_KMEANS_TAG]);
    let clusters = kmeans(
        &prepared.video_ids,
        &scores,
        options.kmeans_k,
        cluster_seed,
        options.kmeans_restarts,
    )?;

    let cluster_rows: Vec<ClusterRow> = prepared
        .video_ids
        .iter()
        .enumerate()
        .map(|(row_idx, video_id)| ClusterRow {
            video_id: video_id.clone(),
            cluster: clusters.assignments[video_id],
            pc1: pca_result.scores[row_idx][0],
            pc2: if pca_result.scores[row_idx].len() > 1 { pca_result.scores[row_idx][1] } else { 0.0 },
        })
        .collect();

    // Compare clusters on the L-R ranking divergence.
    let lr_column = metric_column(Metric::Ndld, Grouping::LeftRight);
    let lr_idx = prepared.column_index(&lr_column).expect("column set above");
    let values: BTreeMap<String, f64> = prepared
        .video_ids
        .iter()
        .enumerate()
        .filter_map(|(row, id)| prepared.get(row, lr_idx).map(|v| (id.clone(), v)))
        .collect();
    let comparisons = match cluster_compare(&clusters, &values) {
        Ok(c) => c,
        // A cluster can legitimately hold a single video; p-values are then
        // uninformative but the comparison still runs. Only an empty cluster
        // sample fails, which implies degenerate input; skip comparisons.
        Err(_) => Vec::new(),
    };

    let pca_report = PcaReport {
        columns: pca_result.column_names.clone(),
        components: (0..pca_result.explained_variance_ratio.len())
            .map(|comp| (0..pca_result.column_names.len()).map(|col| pca_result.loadings[col][comp]).collect())
            .collect(),
        explained_variance_ratio: pca_result.explained_variance_ratio.clone(),
        n_components_retained: pca_result.n_components_retained,
    };

    Ok((
        correlations,
        Some(StructureReport {
            pca: pca_report,
            clusters: cluster_rows,
            kmeans_inertia: clusters.inertia,
            comparisons,
        }),
        None,
    ))
}

fn project_columns(table: &FeatureTable, columns: &[&str]) -> Result<FeatureTable> {
    let indices: Vec<usize> = columns
        .iter()
        .map(|name| {
            table
                .column_index(name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown column {name}")))
        })
        .collect::<Result<_>>()?;
    let values = (0..table.n_rows())
        .map(|row| indices.iter().map(|&col| table.get(row, col)).collect())
        .collect();
    FeatureTable::new(
        table.video_ids.clone(),
        columns.iter().map(|s| s.to_string()).collect(),
        values,
    )
}

/// Exposure analysis options.
#[derive(Debug, Clone)]
pub struct ExposureOptions {
    pub ipd_threshold: f64,
    /// Exposure depth for the post-hoc IPD pool.
    pub depth: usize,
    pub max_position: usize,
    pub alpha: f64,
}

impl Default for ExposureOptions {
    fn default() -> ExposureOptions {
        ExposureOptions { ipd_threshold: 0.8, depth: 50, max_position: 10, alpha: 0.05 }
    }
}

/// Positional partisan-exposure analysis: post-hoc IPD filter, then per
/// position Mann-Whitney comparisons for both leanings.
pub fn run_exposure(
    dataset: &AuditDataset,
    stance_map: &BTreeMap<String, StanceLabel3>,
    options: &ExposureOptions,
) -> Result<ExposureReport> {
    let group_map = dataset.group_map();
    let mut videos = Vec::new();
    let mut dropped = Vec::new();
    for video in &dataset.videos {
        let partisan_lengths: Vec<usize> = video
            .exposures
            .iter()
            .filter(|e| {
                matches!(group_map.get(e.account_id.as_str()), Some(Group::Left | Group::Right))
            })
            .map(|e| e.items.len())
            .collect();
        let has_left = video.exposures.iter().any(|e| group_map.get(e.account_id.as_str()) == Some(&Group::Left));
        let has_right = video.exposures.iter().any(|e| group_map.get(e.account_id.as_str()) == Some(&Group::Right));
        if !has_left || !has_right {
            dropped.push(DroppedVideo {
                video_id: video.video_id.clone(),
                posthoc_ipd: None,
                reason: "missing a partisan group".into(),
            });
            continue;
        }

        let ipd_value = posthoc_ipd(video, stance_map, options.depth)?;
        match ipd_value {
            None => {
                dropped.push(DroppedVideo {
                    video_id: video.video_id.clone(),
                    posthoc_ipd: None,
                    reason: "no partisan comments in the exposure pool".into(),
                });
            }
            Some(value) if value >= options.ipd_threshold => {
                dropped.push(DroppedVideo {
                    video_id: video.video_id.clone(),
                    posthoc_ipd: Some(value),
                    reason: format!("post-hoc IPD {value:.3} not below {}", options.ipd_threshold),
                });
            }
            Some(value) => {
                let max_position = options.max_position.min(
                    partisan_lengths.iter().copied().min().unwrap_or(0),
                );
                let mut tests = Vec::new();
                for leaning in [Leaning::Left, Leaning::Right] {
                    tests.extend(exposure_difference_test(
                        video,
                        &dataset.accounts,
                        stance_map,
                        max_position,
                        leaning,
                        options.alpha,
                    )?);
                }
                videos.push(ExposureVideoReport {
                    video_id: video.video_id.clone(),
                    posthoc_ipd: value,
                    tests,
                });
            }
        }
    }
    Ok(ExposureReport {
        ipd_threshold: options.ipd_threshold,
        depth: options.depth,
        alpha: options.alpha,
        videos,
        dropped,
    })
}

/// Collapsed stance map from the labels already stored in a dataset.
pub fn stance_map_from_dataset(dataset: &AuditDataset) -> BTreeMap<String, StanceLabel3> {
    dataset
        .videos
        .iter()
        .flat_map(|v| v.comments.iter())
        .filter_map(|c| c.stance.map(|s| (c.comment_id.clone(), collapse_stance(s))))
        .collect()
}

/// Read a `comment_id,label` CSV of five-way labels.
pub fn read_label_csv(path: &Path) -> Result<BTreeMap<String, StanceLabel5>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut labels = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::Malformed {
                file: path.display().to_string(),
                line: idx + 2,
                message: "expected comment_id,label".into(),
            });
        }
        let label = StanceLabel5::parse(&record[1]).ok_or_else(|| Error::Malformed {
            file: path.display().to_string(),
            line: idx + 2,
            message: format!("unknown label {:?}", &record[1]),
        })?;
        labels.insert(record[0].to_string(), label);
    }
    Ok(labels)
}

/// Collapse a five-way label map to the three-way form used by exposure
/// analysis.
pub fn collapse_label_map(labels: &BTreeMap<String, StanceLabel5>) -> BTreeMap<String, StanceLabel3> {
    labels.iter().map(|(id, &l)| (id.clone(), collapse_stance(l))).collect()
}

/// Sample and classify every video; returns the per-video report plus all
/// comment-level labels (suitable as a `--stances` input).
pub fn run_classify(
    dataset: &AuditDataset,
    sample_size: usize,
    seed: u64,
    classifier: &dyn StanceClassifier,
    concurrency: usize,
) -> Result<(ClassifyReport, Vec<(String, StanceLabel5)>)> {
    let mut videos = Vec::new();
    let mut labels = Vec::new();
    for (index, video) in dataset.videos.iter().enumerate() {
        if video.comments.is_empty() {
            continue;
        }
        let video_seed = derive_seed(seed, &[CLASSIFY_TAG, index as u64]);
        let sample = sample_and_estimate(video, sample_size, video_seed, classifier, concurrency)?;
        videos.push(ClassifyVideoReport {
            video_id: video.video_id.clone(),
            n_requested: sample.n_requested,
            n_classified: sample.n_classified,
            n_failed: sample.n_failed,
            n_left: sample.counts.n_left,
            n_right: sample.counts.n_right,
            n_neutral: sample.counts.n_neutral,
        });
        labels.extend(sample.labels.clone());
    }
    Ok((ClassifyReport { sample_size, seed, videos }, labels))
}

/// Per-video stance counts keyed by video id, from a classify run.
pub fn counts_by_video(report: &ClassifyReport) -> BTreeMap<String, StanceCounts> {
    report
        .videos
        .iter()
        .map(|v| (v.video_id.clone(), StanceCounts::new(v.n_left, v.n_right, v.n_neutral)))
        .collect()
}
