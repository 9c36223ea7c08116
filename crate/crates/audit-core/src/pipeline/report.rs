//! Report data structures, file emission, and post-write schema validation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ExposureTestResult, VideoFeatures};
use crate::rank_metrics::Metric;
use crate::stance::StanceLabel5;
use crate::stats::AnosimResult;
use crate::structure::ClusterComparison;

use super::Grouping;

/// One ANOSIM permutation-test outcome within a video report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnosimRecord {
    pub metric: Metric,
    pub grouping: Grouping,
    pub r: f64,
    pub mean_rank_between: f64,
    pub mean_rank_within: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub null_mean: f64,
    pub null_sd: f64,
}

impl AnosimRecord {
    pub fn new(metric: Metric, grouping: Grouping, result: &AnosimResult) -> AnosimRecord {
        AnosimRecord {
            metric,
            grouping,
            r: result.r,
            mean_rank_between: result.mean_rank_between,
            mean_rank_within: result.mean_rank_within,
            p_value: result.p_value,
            n_permutations: result.n_permutations,
            null_mean: result.null.mean,
            null_sd: result.null.sd,
        }
    }
}

/// Stance-sample bookkeeping attached to the per-video features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceSampleRecord {
    pub n_left: u64,
    pub n_right: u64,
    pub n_neutral: u64,
    pub n_requested: usize,
    pub n_classified: usize,
    pub n_failed: usize,
}

/// Everything reported for one analyzed video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoReport {
    pub video_id: String,
    pub n_exposures: usize,
    pub mean_jd: f64,
    pub mean_ndld: f64,
    pub anosim: Vec<AnosimRecord>,
    pub features: Option<VideoFeatures>,
    pub stance_sample: Option<StanceSampleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedVideo {
    pub video_id: String,
    pub reason: String,
}

/// One cell of the feature/metric correlation table; empty values mark a
/// degenerate pair (constant column or too few complete observations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub feature: String,
    pub metric: String,
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaReport {
    pub columns: Vec<String>,
    /// `components[c][j]` is the loading of column `j` on component `c`.
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    pub n_components_retained: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub video_id: String,
    pub cluster: usize,
    pub pc1: f64,
    pub pc2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub pca: PcaReport,
    pub clusters: Vec<ClusterRow>,
    pub kmeans_inertia: f64,
    pub comparisons: Vec<ClusterComparison>,
}

/// Full analysis report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub k: usize,
    pub n_permutations: usize,
    pub seed: u64,
    pub alpha: f64,
    pub videos: Vec<VideoReport>,
    pub skipped_videos: Vec<SkippedVideo>,
    pub correlations: Vec<CorrelationRecord>,
    pub structure: Option<StructureReport>,
    /// Why the structure section is absent, when it is.
    pub structure_note: Option<String>,
}

/// Exposure analysis report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureReport {
    pub ipd_threshold: f64,
    pub depth: usize,
    pub alpha: f64,
    pub videos: Vec<ExposureVideoReport>,
    pub dropped: Vec<DroppedVideo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExposureVideoReport {
    pub video_id: String,
    pub posthoc_ipd: f64,
    pub tests: Vec<ExposureTestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedVideo {
    pub video_id: String,
    /// Post-hoc IPD; absent when the pool had no partisan comments at all.
    pub posthoc_ipd: Option<f64>,
    pub reason: String,
}

/// Classification summary per video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub sample_size: usize,
    pub seed: u64,
    pub videos: Vec<ClassifyVideoReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyVideoReport {
    pub video_id: String,
    pub n_requested: usize,
    pub n_classified: usize,
    pub n_failed: usize,
    pub n_left: u64,
    pub n_right: u64,
    pub n_neutral: u64,
}

/// Writes a set of report files, removing everything written so far if any
/// step fails.
pub(crate) struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<OutputSet> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputSet { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write_with<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.dir.join(name);
        let result = (|| {
            let mut out = BufWriter::new(File::create(&path)?);
            body(&mut out)?;
            out.flush()?;
            Ok(())
        })();
        match result {
            Ok(()) => {
                self.written.push(path);
                Ok(())
            }
            Err(e) => {
                let _ = std::fs::remove_file(&path);
                self.cleanup();
                Err(e)
            }
        }
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write_with(name, |out| {
            serde_json::to_writer_pretty(&mut *out, value)?;
            out.write_all(b"\n")?;
            Ok(())
        })
    }

    pub fn cleanup(&mut self) {
        for path in self.written.drain(..) {
            let _ = std::fs::remove_file(path);
        }
    }

    pub fn into_paths(self) -> Vec<PathBuf> {
        self.written
    }
}

/// Emit every analysis output file. Returns the written paths; on failure no
/// partial outputs remain.
pub fn write_report(report: &AuditReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut outputs = OutputSet::new(out_dir)?;

    outputs.write_json("report.json", report)?;

    outputs.write_with("anosim.csv", |out| {
        writeln!(
            out,
            "video_id,metric,grouping,r,mean_rank_between,mean_rank_within,p_value,n_permutations,null_mean,null_sd"
        )?;
        for video in &report.videos {
            for a in &video.anosim {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    video.video_id,
                    a.metric,
                    a.grouping,
                    a.r,
                    a.mean_rank_between,
                    a.mean_rank_within,
                    a.p_value,
                    a.n_permutations,
                    a.null_mean,
                    a.null_sd
                )?;
            }
        }
        Ok(())
    })?;

    outputs.write_with("features.csv", |out| {
        let features: Vec<VideoFeatures> =
            report.videos.iter().filter_map(|v| v.features.clone()).collect();
        crate::features::features_to_csv(&features, out)
    })?;

    outputs.write_with("correlations.csv", |out| {
        writeln!(out, "feature,metric,rho,p,n")?;
        for record in &report.correlations {
            writeln!(
                out,
                "{},{},{},{},{}",
                record.feature,
                record.metric,
                record.rho.map(|v| v.to_string()).unwrap_or_default(),
                record.p.map(|v| v.to_string()).unwrap_or_default(),
                record.n.map(|v| v.to_string()).unwrap_or_default(),
            )?;
        }
        Ok(())
    })?;

    if let Some(structure) = &report.structure {
        outputs.write_json("pca.json", &structure.pca)?;

        outputs.write_with("clusters.csv", |out| {
            writeln!(out, "video_id,cluster,pc1,pc2")?;
            for row in &structure.clusters {
                writeln!(out, "{},{},{},{}", row.video_id, row.cluster, row.pc1, row.pc2)?;
            }
            Ok(())
        })?;

        outputs.write_with("cluster_compare.csv", |out| {
            writeln!(out, "cluster_a,cluster_b,n_a,n_b,u,p")?;
            for c in &structure.comparisons {
                writeln!(out, "{},{},{},{},{},{}", c.cluster_a, c.cluster_b, c.n_a, c.n_b, c.u, c.p)?;
            }
            Ok(())
        })?;
    }

    let paths = outputs.into_paths();
    if let Err(e) = validate_analysis_outputs(&paths, report.structure.is_some()) {
        for path in &paths {
            let _ = std::fs::remove_file(path);
        }
        return Err(e);
    }
    Ok(paths)
}

/// Emit the exposure outputs (JSON report + flat test table).
pub fn write_exposure_report(report: &ExposureReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut outputs = OutputSet::new(out_dir)?;
    outputs.write_json("exposure_report.json", report)?;
    outputs.write_with("exposure_tests.csv", |out| {
        let rows: Vec<ExposureTestResult> =
            report.videos.iter().flat_map(|v| v.tests.iter().cloned()).collect();
        crate::features::exposure_tests_to_csv(&rows, out)
    })?;
    let paths = outputs.into_paths();
    validate_csv_header(&paths[1], "video_id,k,leaning,diff,u,p,significant")?;
    Ok(paths)
}

/// Emit classification outputs: per-video counts plus a comment-level label
/// file suitable as a `--stances` input.
pub fn write_classify_report(
    report: &ClassifyReport,
    labels: &[(String, StanceLabel5)],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut outputs = OutputSet::new(out_dir)?;
    outputs.write_json("classify_report.json", report)?;
    outputs.write_with("stance_counts.csv", |out| {
        writeln!(out, "video_id,n_requested,n_classified,n_failed,n_left,n_right,n_neutral")?;
        for v in &report.videos {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                v.video_id, v.n_requested, v.n_classified, v.n_failed, v.n_left, v.n_right, v.n_neutral
            )?;
        }
        Ok(())
    })?;
    outputs.write_with("labels.csv", |out| {
        writeln!(out, "comment_id,label")?;
        for (comment_id, label) in labels {
            writeln!(out, "{},{}", comment_id, label.code())?;
        }
        Ok(())
    })?;
    Ok(outputs.into_paths())
}

fn validate_csv_header(path: &Path, expected: &str) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput(format!("{} is empty", path.display())))?;
    if header != expected {
        return Err(Error::InvalidInput(format!(
            "{}: header {header:?} does not match {expected:?}",
            path.display()
        )));
    }
    let columns = expected.split(',').count();
    for (idx, line) in lines.enumerate() {
        if line.split(',').count() != columns {
            return Err(Error::InvalidInput(format!(
                "{}:{}: expected {columns} columns",
                path.display(),
                idx + 2
            )));
        }
    }
    Ok(())
}

/// Re-read every emitted file and check it against its schema.
fn validate_analysis_outputs(paths: &[PathBuf], with_structure: bool) -> Result<()> {
    let find = |name: &str| paths.iter().find(|p| p.file_name().is_some_and(|f| f == name));

    let report_path = find("report.json")
        .ok_or_else(|| Error::InvalidInput("report.json missing".into()))?;
    let _: AuditReport = serde_json::from_reader(File::open(report_path)?)?;

    for (name, header) in [
        (
            "anosim.csv",
            "video_id,metric,grouping,r,mean_rank_between,mean_rank_within,p_value,n_permutations,null_mean,null_sd",
        ),
        ("features.csv", "video_id,log_volume,gini_likes,gini_replies,ipd"),
        ("correlations.csv", "feature,metric,rho,p,n"),
    ] {
        let path = find(name).ok_or_else(|| Error::InvalidInput(format!("{name} missing")))?;
        validate_csv_header(path, header)?;
    }

    if with_structure {
        let pca_path = find("pca.json").ok_or_else(|| Error::InvalidInput("pca.json missing".into()))?;
        let _: PcaReport = serde_json::from_reader(File::open(pca_path)?)?;
        for (name, header) in [
            ("clusters.csv", "video_id,cluster,pc1,pc2"),
            ("cluster_compare.csv", "cluster_a,cluster_b,n_a,n_b,u,p"),
        ] {
            let path = find(name).ok_or_else(|| Error::InvalidInput(format!("{name} missing")))?;
            validate_csv_header(path, header)?;
        }
    }
    Ok(())
}
