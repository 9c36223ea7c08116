//! Cohen's kappa: chance-corrected agreement between two raters.

use std::collections::BTreeMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Cohen's kappa over two aligned label sequences.
///
/// `kappa = (p_o - p_e) / (1 - p_e)` where `p_o` is observed agreement and
/// `p_e` the expected agreement from the raters' marginal distributions.
/// Errors when `p_e = 1` (both raters constant and identical), where kappa
/// is undefined.
pub fn cohens_kappa<T: Eq + Hash + Ord>(labels_a: &[T], labels_b: &[T]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::LengthMismatch { left: labels_a.len(), right: labels_b.len() });
    }
    if labels_a.is_empty() {
        return Err(Error::EmptySample);
    }
    // Index the shared label universe.
    let mut universe: BTreeMap<&T, usize> = BTreeMap::new();
    for label in labels_a.iter().chain(labels_b.iter()) {
        let next = universe.len();
        universe.entry(label).or_insert(next);
    }
    let k = universe.len();
    let mut confusion = vec![vec![0u64; k]; k];
    for (a, b) in labels_a.iter().zip(labels_b.iter()) {
        confusion[universe[a]][universe[b]] += 1;
    }
    kappa_from_confusion(&confusion)
}

/// Kappa from a square confusion matrix (rows: rater A, columns: rater B).
pub fn kappa_from_confusion(confusion: &[Vec<u64>]) -> Result<f64> {
    let k = confusion.len();
    if k == 0 || confusion.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidInput("confusion matrix must be square".into()));
    }
    let n: u64 = confusion.iter().flatten().sum();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let n = n as f64;
    let mut diagonal = 0u64;
    let mut row_sums = vec![0u64; k];
    let mut col_sums = vec![0u64; k];
    for (i, row) in confusion.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            row_sums[i] += count;
            col_sums[j] += count;
            if i == j {
                diagonal += count;
            }
        }
    }
    let p_o = diagonal as f64 / n;
    let p_e: f64 = row_sums
        .iter()
        .zip(col_sums.iter())
        .map(|(&r, &c)| (r as f64 / n) * (c as f64 / n))
        .sum();
    if (1.0 - p_e).abs() < 1e-12 {
        return Err(Error::UndefinedKappa);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
