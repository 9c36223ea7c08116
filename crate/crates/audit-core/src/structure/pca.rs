//! Column standardization and principal component analysis.

use serde::{Deserialize, Serialize};

use super::eigen::jacobi_eigen;
use super::FeatureTable;
use crate::error::{Error, Result};

/// Standardize every column to mean 0 and *sample* standard deviation 1,
/// computed over present cells; missing cells stay missing. Constant columns
/// are an error.
pub fn standardize(table: &FeatureTable) -> Result<FeatureTable> {
    let n_cols = table.n_cols();
    let mut means = vec![0.0; n_cols];
    let mut sds = vec![0.0; n_cols];
    for col in 0..n_cols {
        let values: Vec<f64> = (0..table.n_rows()).filter_map(|row| table.get(row, col)).collect();
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "column {} has {} present value(s); need at least 2",
                table.column_names[col],
                values.len()
            )));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
        if var == 0.0 {
            return Err(Error::ConstantInput(format!("column {}", table.column_names[col])));
        }
        means[col] = mean;
        sds[col] = var.sqrt();
    }
    let values = (0..table.n_rows())
        .map(|row| {
            (0..n_cols)
                .map(|col| table.get(row, col).map(|v| (v - means[col]) / sds[col]))
                .collect()
        })
        .collect();
    FeatureTable::new(table.video_ids.clone(), table.column_names.clone(), values)
}

/// Principal component analysis result. `loadings[column][component]` holds
/// the loading of one input column on one component; `scores[row][component]`
/// are the projected observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub column_names: Vec<String>,
    pub loadings: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub scores: Vec<Vec<f64>>,
    /// Smallest component count whose cumulative explained variance reaches
    /// the requested target.
    pub n_components_retained: usize,
}

impl PcaResult {
    /// Scores restricted to the retained components.
    pub fn retained_scores(&self) -> Vec<Vec<f64>> {
        self.scores
            .iter()
            .map(|row| row[..self.n_components_retained].to_vec())
            .collect()
    }
}

/// PCA via eigendecomposition of the sample covariance matrix of `table`
/// (the correlation matrix when the table was standardized first). The table
/// must have no missing cells: drop incomplete rows beforehand. Components
/// are sorted by explained variance; each component's sign is fixed so its
/// largest-magnitude loading is positive.
pub fn pca(table: &FeatureTable, variance_target: f64) -> Result<PcaResult> {
    if !(0.0..=1.0).contains(&variance_target) {
        return Err(Error::InvalidInput("variance target must be in [0,1]".into()));
    }
    let data = table.to_dense()?;
    let n = data.len();
    let d = table.n_cols();
    if d < 2 {
        return Err(Error::InvalidInput(format!("PCA needs at least 2 columns, found {d}")));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("PCA needs at least 2 complete rows, found {n}")));
    }

    // Center (a no-op on standardized input) and form the sample covariance.
    let means: Vec<f64> = (0..d)
        .map(|j| data.iter().map(|row| row[j]).sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = data
        .iter()
        .map(|row| row.iter().zip(&means).map(|(v, m)| v - m).collect())
        .collect();
    let mut covariance = vec![vec![0.0; d]; d];
    for row in &centered {
        for i in 0..d {
            for j in i..d {
                covariance[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            covariance[i][j] /= (n - 1) as f64;
            covariance[j][i] = covariance[i][j];
        }
    }

    let (raw_values, mut vectors) = jacobi_eigen(covariance);
    let eigenvalues: Vec<f64> = raw_values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();
    if total <= 1e-12 {
        return Err(Error::InvalidInput("degenerate covariance: zero total variance".into()));
    }

    // Sign convention: largest-magnitude loading positive.
    for vector in &mut vectors {
        let extreme = vector
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).expect("finite loading"))
            .expect("nonempty eigenvector");
        if extreme < 0.0 {
            for x in vector.iter_mut() {
                *x = -*x;
            }
        }
    }

    let explained_variance_ratio: Vec<f64> = eigenvalues.iter().map(|v| v / total).collect();
    let mut cumulative = 0.0;
    let mut n_components_retained = eigenvalues.len();
    for (idx, ratio) in explained_variance_ratio.iter().enumerate() {
        cumulative += ratio;
        if cumulative >= variance_target - 1e-12 {
            n_components_retained = idx + 1;
            break;
        }
    }

    let scores: Vec<Vec<f64>> = centered
        .iter()
        .map(|row| {
            vectors
                .iter()
                .map(|vector| row.iter().zip(vector).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();

    // loadings[column][component]
    let loadings: Vec<Vec<f64>> = (0..d)
        .map(|col| vectors.iter().map(|vector| vector[col]).collect())
        .collect();

    Ok(PcaResult {
        column_names: table.column_names.clone(),
        loadings,
        explained_variance_ratio,
        eigenvalues,
        scores,
        n_components_retained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn table(cols: &[&str], rows: Vec<Vec<f64>>) -> FeatureTable {
        let ids = (0..rows.len()).map(|i| format!("v{i}")).collect();
        FeatureTable::from_dense(ids, cols.iter().map(|s| s.to_string()).collect(), rows)
    }

    #[test]
    fn standardize_hand_example() {
        let t = table(&["x"], vec![vec![1.0], vec![2.0], vec![3.0]]);
        let s = standardize(&t).unwrap();
        // Sample sd of {1,2,3} is exactly 1.
        assert_eq!(s.get(0, 0), Some(-1.0));
        assert_eq!(s.get(1, 0), Some(0.0));
        assert_eq!(s.get(2, 0), Some(1.0));
    }

    #[test]
    fn standardize_is_idempotent() {
        let t = table(&["x", "y"], vec![vec![1.0, 0.5], vec![4.0, 0.25], vec![7.5, 0.125], vec![2.0, 0.75]]);
        let once = standardize(&t).unwrap();
        let twice = standardize(&once).unwrap();
        for row in 0..once.n_rows() {
            for col in 0..once.n_cols() {
                let a = once.get(row, col).unwrap();
                let b = twice.get(row, col).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let t = table(&["x"], vec![vec![3.0], vec![3.0], vec![3.0]]);
        assert!(matches!(standardize(&t), Err(Error::ConstantInput(_))));
    }

    #[test]
    fn perfectly_correlated_pair() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, i as f64]).collect();
        let t = standardize(&table(&["a", "b"], rows)).unwrap();
        let result = pca(&t, 0.9).unwrap();
        assert!((result.explained_variance_ratio[0] - 1.0).abs() < 1e-9);
        assert_eq!(result.n_components_retained, 1);
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        assert!((result.loadings[0][0] - inv_sqrt2).abs() < 1e-9);
        assert!((result.loadings[1][0] - inv_sqrt2).abs() < 1e-9);
    }

    #[test]
    fn ratios_sum_to_one_and_loadings_orthonormal() {
        let mut rng = crate::seed::derive_rng(11, &[7]);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                let y: f64 = StandardNormal.sample(&mut rng);
                let z: f64 = StandardNormal.sample(&mut rng);
                vec![x, 0.6 * x + y, z, 0.2 * z - y]
            })
            .collect();
        let t = standardize(&table(&["a", "b", "c", "d"], rows)).unwrap();
        let result = pca(&t, 0.9).unwrap();

        let ratio_sum: f64 = result.explained_variance_ratio.iter().sum();
        assert!((ratio_sum - 1.0).abs() < 1e-9);

        // Correlation-matrix trace equals the column count.
        let eigen_sum: f64 = result.eigenvalues.iter().sum();
        assert!((eigen_sum - 4.0).abs() < 1e-9);
        assert!(result.eigenvalues.iter().all(|&v| v >= 0.0));

        let d = 4;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|col| result.loadings[col][i] * result.loadings[col][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-9, "loading dot ({i},{j}) = {dot}");
            }
        }

        // Ratios are non-increasing.
        for pair in result.explained_variance_ratio.windows(2) {
            assert!(pair[0] >= pair[1] - 1e-12);
        }
    }

    #[test]
    fn full_reconstruction() {
        let mut rng = crate::seed::derive_rng(13, &[3]);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..5).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let t = standardize(&table(&["a", "b", "c", "d", "e"], rows)).unwrap();
        let dense = t.to_dense().unwrap();
        let result = pca(&t, 0.9).unwrap();
        // scores x loadings^T reconstructs the (already centered) input.
        for (row_idx, row) in dense.iter().enumerate() {
            for (col_idx, &expected) in row.iter().enumerate() {
                let reconstructed: f64 = (0..5)
                    .map(|comp| result.scores[row_idx][comp] * result.loadings[col_idx][comp])
                    .sum();
                assert!((reconstructed - expected).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn single_column_rejected() {
        let t = table(&["x"], vec![vec![1.0], vec![2.0]]);
        assert!(pca(&t, 0.9).is_err());
    }
}
