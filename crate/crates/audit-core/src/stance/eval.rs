//! Agreement evaluation of predicted stance labels against a gold standard.

use serde::{Deserialize, Serialize};

use super::StanceLabel5;
use crate::error::{Error, Result};
use crate::stats::kappa_from_confusion;

/// Accuracy, kappa, and the full confusion matrix of one evaluation.
/// Confusion rows follow the gold labels, columns the predictions, both in
/// [`StanceLabel5::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub accuracy: f64,
    pub kappa: f64,
    pub confusion: Vec<Vec<u64>>,
    pub n: usize,
}

/// Compare predictions to gold labels position by position.
pub fn evaluate_classifier(predicted: &[StanceLabel5], gold: &[StanceLabel5]) -> Result<AgreementReport> {
    if predicted.len() != gold.len() {
        return Err(Error::LengthMismatch { left: predicted.len(), right: gold.len() });
    }
    if predicted.is_empty() {
        return Err(Error::EmptySample);
    }
    let index = |label: StanceLabel5| StanceLabel5::ALL.iter().position(|&l| l == label).unwrap();
    let mut confusion = vec![vec![0u64; 5]; 5];
    for (&p, &g) in predicted.iter().zip(gold.iter()) {
        confusion[index(g)][index(p)] += 1;
    }
    let n = predicted.len();
    let trace: u64 = (0..5).map(|i| confusion[i][i]).sum();
    let accuracy = trace as f64 / n as f64;
    let kappa = kappa_from_confusion(&confusion)?;
    Ok(AgreementReport { accuracy, kappa, confusion, n })
}
