//! Analysis of similarities (ANOSIM) with a seeded permutation test.
//!
//! Given a dissimilarity matrix and a two-group assignment over its accounts,
//! the R statistic compares the mean rank of between-group dissimilarities
//! against the mean rank of within-group dissimilarities:
//!
//! `R = (mean_rank_between - mean_rank_within) / (N * (N - 1) / 4)`
//!
//! where ranks are average ranks over all `N * (N - 1) / 2` account pairs.
//! Positive R means groups differ more than their internal variation.
//! Significance comes from shuffling group labels over accounts (group sizes
//! preserved); the p-value uses the add-one estimator so it is never zero.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data_model::{AuditAccount, Group};
use crate::error::{Error, Result};
use crate::rank_metrics::DissimilarityMatrix;
use crate::seed::derive_rng;
use crate::stats::average_ranks;

const PERMUTATION_TAG: u64 = 0x414e_4f53; // "ANOS"

/// Two-group label assignment over accounts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    labels: BTreeMap<String, String>,
    label_a: String,
    label_b: String,
}

impl GroupAssignment {
    /// Build from an account-to-label map. Requires exactly two distinct
    /// labels with at least two members each.
    pub fn new(labels: BTreeMap<String, String>) -> Result<GroupAssignment> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for label in labels.values() {
            *counts.entry(label.as_str()).or_default() += 1;
        }
        if counts.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "group assignment needs exactly 2 labels, found {}",
                counts.len()
            )));
        }
        for (label, count) in &counts {
            if *count < 2 {
                return Err(Error::GroupTooSmall(format!("group {label} has {count} member(s)")));
            }
        }
        let mut names = counts.keys().map(|s| s.to_string());
        let label_a = names.next().unwrap();
        let label_b = names.next().unwrap();
        Ok(GroupAssignment { labels, label_a, label_b })
    }

    /// Restrict an account roster to two audit groups.
    pub fn from_groups(accounts: &[AuditAccount], a: Group, b: Group) -> Result<GroupAssignment> {
        let labels: BTreeMap<String, String> = accounts
            .iter()
            .filter(|acc| acc.group == a || acc.group == b)
            .map(|acc| (acc.account_id.clone(), acc.group.to_string()))
            .collect();
        Self::new(labels)
    }

    /// Number of accounts under comparison.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> (&str, &str) {
        (&self.label_a, &self.label_b)
    }

    pub fn accounts(&self) -> impl Iterator<Item = &str> {
        self.labels.keys().map(String::as_str)
    }
}

/// Summary of the permutation null distribution of R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullSummary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Result of an ANOSIM permutation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnosimResult {
    pub r: f64,
    pub mean_rank_between: f64,
    pub mean_rank_within: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub null: NullSummary,
}

impl AnosimResult {
    /// Flat JSON form used by reports.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "r": self.r,
            "mean_rank_between": self.mean_rank_between,
            "mean_rank_within": self.mean_rank_within,
            "p_value": self.p_value,
            "n_permutations": self.n_permutations,
            "null_mean": self.null.mean,
            "null_sd": self.null.sd,
        })
    }
}

struct Prepared {
    /// Pair list as (i, j) indices into the member array.
    pairs: Vec<(usize, usize)>,
    /// Average ranks of the pair dissimilarities.
    ranks: Vec<f64>,
    /// mask[i] is true when member i belongs to the first label.
    mask: Vec<bool>,
    n: usize,
}

fn prepare(matrix: &DissimilarityMatrix, groups: &GroupAssignment) -> Result<Prepared> {
    let n = groups.len();
    if n < 4 {
        return Err(Error::InvalidInput(format!("ANOSIM needs at least 4 accounts, found {n}")));
    }
    let mut indices = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    for (account, label) in &groups.labels {
        let idx = matrix
            .index_of(account)
            .ok_or_else(|| Error::MissingAccount(account.clone()))?;
        indices.push(idx);
        mask.push(label == &groups.label_a);
    }

    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut dissimilarities = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
            dissimilarities.push(matrix.get(indices[i], indices[j]));
        }
    }
    let ranks = average_ranks(&dissimilarities);
    Ok(Prepared { pairs, ranks, mask, n })
}

fn r_for_mask(prepared: &Prepared, mask: &[bool]) -> (f64, f64, f64) {
    let mut sum_between = 0.0;
    let mut n_between = 0usize;
    let mut sum_within = 0.0;
    let mut n_within = 0usize;
    for (pair_idx, &(i, j)) in prepared.pairs.iter().enumerate() {
        if mask[i] != mask[j] {
            sum_between += prepared.ranks[pair_idx];
            n_between += 1;
        } else {
            sum_within += prepared.ranks[pair_idx];
            n_within += 1;
        }
    }
    let mean_between = sum_between / n_between as f64;
    let mean_within = sum_within / n_within as f64;
    let denominator = (prepared.n * (prepared.n - 1)) as f64 / 4.0;
    ((mean_between - mean_within) / denominator, mean_between, mean_within)
}

/// The ANOSIM R statistic for one matrix and one two-group assignment.
pub fn anosim_r(matrix: &DissimilarityMatrix, groups: &GroupAssignment) -> Result<f64> {
    let prepared = prepare(matrix, groups)?;
    Ok(r_for_mask(&prepared, &prepared.mask).0)
}

/// ANOSIM R plus a permutation test with `n_perm` label shuffles.
///
/// `p = (1 + #{R_perm >= R_observed}) / (1 + n_perm)`. Each permutation uses
/// its own substream derived from `seed` and the permutation index.
pub fn anosim_permutation_test(
    matrix: &DissimilarityMatrix,
    groups: &GroupAssignment,
    n_perm: usize,
    seed: u64,
) -> Result<AnosimResult> {
    if n_perm < 1 {
        return Err(Error::InvalidInput("n_perm must be at least 1".into()));
    }
    let prepared = prepare(matrix, groups)?;
    let (r_obs, mean_between, mean_within) = r_for_mask(&prepared, &prepared.mask);

    let mut null_r = Vec::with_capacity(n_perm);
    let mut shuffled = prepared.mask.clone();
    for perm in 0..n_perm {
        let mut rng = derive_rng(seed, &[PERMUTATION_TAG, perm as u64]);
        shuffled.copy_from_slice(&prepared.mask);
        shuffled.shuffle(&mut rng);
        null_r.push(r_for_mask(&prepared, &shuffled).0);
    }

    let exceed = null_r.iter().filter(|&&r| r >= r_obs).count();
    let p_value = (1 + exceed) as f64 / (1 + n_perm) as f64;

    Ok(AnosimResult {
        r: r_obs,
        mean_rank_between: mean_between,
        mean_rank_within: mean_within,
        p_value,
        n_permutations: n_perm,
        null: summarize(&null_r),
    })
}

fn summarize(values: &[f64]) -> NullSummary {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite R values"));
    let quantile = |q: f64| sorted[((n - 1) as f64 * q).round() as usize];
    NullSummary {
        mean,
        sd,
        min: sorted[0],
        q25: quantile(0.25),
        median: quantile(0.5),
        q75: quantile(0.75),
        max: sorted[n - 1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank_metrics::Metric;

    fn matrix_from(values: Vec<Vec<f64>>, ids: &[&str]) -> DissimilarityMatrix {
        DissimilarityMatrix {
            account_ids: ids.iter().map(|s| s.to_string()).collect(),
            values,
            metric: Metric::Ndld,
            k: 10,
        }
    }

    fn two_groups(ids: &[&str], first_group_size: usize) -> GroupAssignment {
        let labels: BTreeMap<String, String> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let label = if i < first_group_size { "left" } else { "right" };
                (id.to_string(), label.to_string())
            })
            .collect();
        GroupAssignment::new(labels).unwrap()
    }

    #[test]
    fn all_equal_dissimilarities_give_exactly_zero() {
        let ids = ["a1", "a2", "b1", "b2"];
        let mut values = vec![vec![0.5; 4]; 4];
        for (i, row) in values.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        let matrix = matrix_from(values, &ids);
        let r = anosim_r(&matrix, &two_groups(&ids, 2)).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn perfect_separation_gives_one() {
        // Within-group distances 0.1 and 0.2; all between-group distances
        // strictly larger. Hand-ranked: within ranks {1, 2}, between ranks
        // {3, 4, 5, 6}; R = (4.5 - 1.5) / (4 * 3 / 4) = 1.
        let ids = ["a1", "a2", "b1", "b2"];
        let values = vec![
            vec![0.0, 0.1, 0.5, 0.6],
            vec![0.1, 0.0, 0.7, 0.8],
            vec![0.5, 0.7, 0.0, 0.2],
            vec![0.6, 0.8, 0.2, 0.0],
        ];
        let matrix = matrix_from(values, &ids);
        let r = anosim_r(&matrix, &two_groups(&ids, 2)).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverted_structure_gives_negative_r() {
        // Within-group distances larger than between-group distances.
        let ids = ["a1", "a2", "b1", "b2"];
        let values = vec![
            vec![0.0, 0.9, 0.1, 0.2],
            vec![0.9, 0.0, 0.3, 0.4],
            vec![0.1, 0.3, 0.0, 0.8],
            vec![0.2, 0.4, 0.8, 0.0],
        ];
        let matrix = matrix_from(values, &ids);
        let r = anosim_r(&matrix, &two_groups(&ids, 2)).unwrap();
        assert!(r < 0.0);
    }

    #[test]
    fn r_is_invariant_under_monotone_transform() {
        let ids = ["a1", "a2", "a3", "b1", "b2"];
        let base = vec![
            vec![0.0, 0.11, 0.23, 0.58, 0.61],
            vec![0.11, 0.0, 0.19, 0.44, 0.52],
            vec![0.23, 0.19, 0.0, 0.37, 0.41],
            vec![0.58, 0.44, 0.37, 0.0, 0.13],
            vec![0.61, 0.52, 0.41, 0.13, 0.0],
        ];
        let transformed: Vec<Vec<f64>> = base
            .iter()
            .map(|row| row.iter().map(|v| (v * 3.0).exp() - 1.0).collect())
            .collect();
        let groups = two_groups(&ids, 3);
        let r1 = anosim_r(&matrix_from(base, &ids), &groups).unwrap();
        let r2 = anosim_r(&matrix_from(transformed, &ids), &groups).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn missing_account_and_small_group_are_errors() {
        let ids = ["a1", "a2", "b1", "b2"];
        let mut values = vec![vec![0.3; 4]; 4];
        for (i, row) in values.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        let matrix = matrix_from(values, &ids);

        let mut labels = BTreeMap::new();
        labels.insert("ghost".to_string(), "left".to_string());
        labels.insert("a2".to_string(), "left".to_string());
        labels.insert("b1".to_string(), "right".to_string());
        labels.insert("b2".to_string(), "right".to_string());
        let groups = GroupAssignment::new(labels).unwrap();
        assert!(matches!(anosim_r(&matrix, &groups), Err(Error::MissingAccount(_))));

        let mut labels = BTreeMap::new();
        labels.insert("a1".to_string(), "left".to_string());
        labels.insert("b1".to_string(), "right".to_string());
        labels.insert("b2".to_string(), "right".to_string());
        assert!(matches!(GroupAssignment::new(labels), Err(Error::GroupTooSmall(_))));
    }

    #[test]
    fn permutation_test_is_deterministic_and_p_bounded() {
        let ids = ["a1", "a2", "b1", "b2"];
        let values = vec![
            vec![0.0, 0.1, 0.5, 0.6],
            vec![0.1, 0.0, 0.7, 0.8],
            vec![0.5, 0.7, 0.0, 0.2],
            vec![0.6, 0.8, 0.2, 0.0],
        ];
        let matrix = matrix_from(values, &ids);
        let groups = two_groups(&ids, 2);
        let a = anosim_permutation_test(&matrix, &groups, 999, 7).unwrap();
        let b = anosim_permutation_test(&matrix, &groups, 999, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.p_value >= 1.0 / 1000.0);
        // Formula identity.
        let n = groups.len() as f64;
        let identity = (a.mean_rank_between - a.mean_rank_within) / (n * (n - 1.0) / 4.0);
        assert!((a.r - identity).abs() < 1e-12);
    }

    #[test]
    fn null_mean_is_near_zero() {
        // Arbitrary fixed matrix, 3+3 accounts; over many permutations the
        // null distribution of R is centered at zero.
        let ids = ["a1", "a2", "a3", "b1", "b2", "b3"];
        let n = ids.len();
        let mut values = vec![vec![0.0; n]; n];
        let mut v = 0.01;
        for i in 0..n {
            for j in (i + 1)..n {
                values[i][j] = v;
                values[j][i] = v;
                v += 0.031;
            }
        }
        let matrix = matrix_from(values, &ids);
        let result = anosim_permutation_test(&matrix, &two_groups(&ids, 3), 2000, 3).unwrap();
        assert!(result.null.mean.abs() < 0.02, "null mean {}", result.null.mean);
    }

    #[test]
    fn json_shape() {
        let ids = ["a1", "a2", "b1", "b2"];
        let mut values = vec![vec![0.4; 4]; 4];
        for (i, row) in values.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        let matrix = matrix_from(values, &ids);
        let result = anosim_permutation_test(&matrix, &two_groups(&ids, 2), 10, 1).unwrap();
        let json = result.to_json();
        for key in ["r", "mean_rank_between", "mean_rank_within", "p_value", "n_permutations", "null_mean", "null_sd"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }
}
