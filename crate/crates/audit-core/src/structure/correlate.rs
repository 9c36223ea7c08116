//! Feature/metric correlation tables and cluster comparisons.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ClusterResult, FeatureTable};
use crate::error::{Error, Result};
use crate::stats::{mann_whitney_u, spearman_rho};

/// One correlation cell: Spearman rho, two-sided p, and the number of
/// complete pairs it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrCell {
    pub rho: f64,
    pub p: f64,
    pub n: usize,
}

/// Spearman correlation of every (feature, metric) column pair, with
/// pairwise deletion of missing cells. Any degenerate pair (fewer than 3
/// complete observations, or a constant column) is an error.
pub fn correlation_heatmap(
    table: &FeatureTable,
    feature_cols: &[&str],
    metric_cols: &[&str],
) -> Result<Vec<Vec<CorrCell>>> {
    cell_grid(table, feature_cols, metric_cols)?
        .into_iter()
        .map(|row| row.into_iter().collect())
        .collect()
}

/// Like [`correlation_heatmap`], but degenerate pairs become `None` instead
/// of failing the whole table. Used by report assembly, where a constant
/// metric column (every video scoring identically) is data, not an error.
pub fn correlation_heatmap_lenient(
    table: &FeatureTable,
    feature_cols: &[&str],
    metric_cols: &[&str],
) -> Result<Vec<Vec<Option<CorrCell>>>> {
    Ok(cell_grid(table, feature_cols, metric_cols)?
        .into_iter()
        .map(|row| row.into_iter().map(|cell| cell.ok()).collect())
        .collect())
}

fn cell_grid(
    table: &FeatureTable,
    feature_cols: &[&str],
    metric_cols: &[&str],
) -> Result<Vec<Vec<Result<CorrCell>>>> {
    let resolve = |name: &str| {
        table
            .column_index(name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown column {name}")))
    };
    let features: Vec<usize> = feature_cols.iter().map(|n| resolve(n)).collect::<Result<_>>()?;
    let metrics: Vec<usize> = metric_cols.iter().map(|n| resolve(n)).collect::<Result<_>>()?;

    Ok(features
        .iter()
        .map(|&f| {
            metrics
                .iter()
                .map(|&m| {
                    let (xs, ys) = table.complete_pairs(f, m);
                    if xs.len() < 3 {
                        return Err(Error::InvalidInput(format!(
                            "only {} complete pairs for columns {} and {}",
                            xs.len(),
                            table.column_names[f],
                            table.column_names[m]
                        )));
                    }
                    let result = spearman_rho(&xs, &ys)?;
                    Ok(CorrCell { rho: result.rho, p: result.p, n: xs.len() })
                })
                .collect()
        })
        .collect())
}

/// Pairwise cluster comparison on a per-video value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterComparison {
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub u: f64,
    pub p: f64,
}

/// Mann-Whitney test of `values` between every pair of clusters. Videos
/// without a value are skipped; a cluster with no valued members is an error.
pub fn cluster_compare(
    clusters: &ClusterResult,
    values: &BTreeMap<String, f64>,
) -> Result<Vec<ClusterComparison>> {
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); clusters.k];
    for (video_id, &cluster) in &clusters.assignments {
        if let Some(&value) = values.get(video_id) {
            samples[cluster].push(value);
        }
    }
    if let Some(empty) = samples.iter().position(Vec::is_empty) {
        return Err(Error::InvalidInput(format!("cluster {empty} has no valued members")));
    }
    let mut comparisons = Vec::new();
    for a in 0..clusters.k {
        for b in (a + 1)..clusters.k {
            let test = mann_whitney_u(&samples[a], &samples[b])?;
            comparisons.push(ClusterComparison {
                cluster_a: a,
                cluster_b: b,
                n_a: samples[a].len(),
                n_b: samples[b].len(),
                u: test.u,
                p: test.p_two_sided,
            });
        }
    }
    Ok(comparisons)
}
