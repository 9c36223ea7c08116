//! Pairwise dissimilarity between exposures and per-video distance matrices.
//!
//! Two metrics: Jaccard distance over the *sets* of comments shown, and a
//! normalized Damerau–Levenshtein distance over the *ordered* lists. The
//! edit distance is the optimal-string-alignment variant (insertions,
//! deletions, substitutions, adjacent transpositions; no substring edited
//! twice), computed by dynamic programming over comment-ID equality and
//! normalized by the longer list's length.

use std::collections::HashMap;
use std::collections::HashSet;
use std::hash::Hash;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data_model::VideoRecord;
use crate::error::{Error, Result};

/// Dissimilarity metric identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Jd,
    Ndld,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Jd => write!(f, "jd"),
            Metric::Ndld => write!(f, "ndld"),
        }
    }
}

/// Jaccard distance between two duplicate-free item sets: one minus
/// intersection over union. Zero iff equal, one iff disjoint.
pub fn jaccard_distance<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::UndefinedJaccard);
    }
    let set_a: HashSet<&T> = a.iter().collect();
    let set_b: HashSet<&T> = b.iter().collect();
    let intersection = set_a.intersection(&set_b).count();
    let union = set_a.len() + set_b.len() - intersection;
    Ok(1.0 - intersection as f64 / union as f64)
}

/// Normalized Damerau–Levenshtein distance between two ranked lists:
/// `osa_distance(a, b) / max(|a|, |b|)`. Zero iff identical; one when every
/// position must be rewritten (for example equal-length lists with no shared
/// items).
pub fn ndld<T: PartialEq>(a: &[T], b: &[T]) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::UndefinedNdld);
    }
    let denom = a.len().max(b.len()) as f64;
    Ok(osa_distance(a, b) as f64 / denom)
}

/// Optimal-string-alignment edit distance: minimum number of insertions,
/// deletions, substitutions, and adjacent transpositions, where no substring
/// is edited more than once.
pub fn osa_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (m, n) = (a.len(), b.len());
    if m == 0 {
        return n;
    }
    if n == 0 {
        return m;
    }
    // Three rolling rows: i-2, i-1, i.
    let mut prev2 = vec![0usize; n + 1];
    let mut prev: Vec<usize> = (0..=n).collect();
    let mut cur = vec![0usize; n + 1];
    for i in 1..=m {
        cur[0] = i;
        for j in 1..=n {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut best = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                best = best.min(prev2[j - 2] + 1);
            }
            cur[j] = best;
        }
        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

/// Symmetric account-by-account dissimilarity matrix for one video under one
/// metric at depth `k`. Row/column order is the sorted account-id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMatrix {
    pub account_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub metric: Metric,
    pub k: usize,
}

impl DissimilarityMatrix {
    pub fn n(&self) -> usize {
        self.account_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn index_of(&self, account_id: &str) -> Option<usize> {
        self.account_ids.iter().position(|a| a == account_id)
    }

    /// Mean of the upper off-diagonal entries.
    pub fn mean_off_diagonal(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let mut sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                sum += self.values[i][j];
            }
        }
        sum / (n * (n - 1) / 2) as f64
    }

    /// Check symmetry, zero diagonal, and unit-interval entries.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.values.len() != n || self.values.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("matrix shape mismatch".into()));
        }
        for i in 0..n {
            if self.values[i][i] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = self.values[i][j];
                if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) out of [0,1]: {v}")));
                }
                if self.values[i][j] != self.values[j][i] {
                    return Err(Error::InvalidInput(format!("asymmetry at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    /// CSV export: header row of account ids, then the square numeric block
    /// at nine significant digits.
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.account_ids.join(","))?;
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Build the dissimilarity matrix over all accounts with an exposure on this
/// video, after truncating every exposure to its top `k` items.
pub fn dissimilarity_matrix(video: &VideoRecord, metric: Metric, k: usize) -> Result<DissimilarityMatrix> {
    assert!(k >= 1, "depth must be at least 1");
    if video.exposures.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "video {} has {} exposure(s); need at least 2",
            video.video_id,
            video.exposures.len()
        )));
    }
    let mut exposures: Vec<_> = video.exposures.iter().collect();
    exposures.sort_by(|a, b| a.account_id.cmp(&b.account_id));

    // Intern comment ids so pairwise comparisons are integer equality.
    // Taking the first k items is the top-k truncation.
    let mut interner: HashMap<&str, u32> = HashMap::new();
    let lists: Vec<Vec<u32>> = exposures
        .iter()
        .map(|e| {
            e.items
                .iter()
                .take(k)
                .map(|item| {
                    let next = interner.len() as u32;
                    *interner.entry(item.as_str()).or_insert(next)
                })
                .collect()
        })
        .collect();

    let n = lists.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = match metric {
                Metric::Jd => jaccard_distance(&lists[i], &lists[j])?,
                Metric::Ndld => ndld(&lists[i], &lists[j])?,
            };
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    Ok(DissimilarityMatrix {
        account_ids: exposures.iter().map(|e| e.account_id.clone()).collect(),
        values,
        metric,
        k,
    })
}
