//! Structural analysis over video-level features: correlation tables, PCA,
//! and k-means clustering.

mod correlate;
mod eigen;
mod kmeans;
mod pca;

pub use correlate::{
    cluster_compare, correlation_heatmap, correlation_heatmap_lenient, ClusterComparison, CorrCell,
};
pub use kmeans::{kmeans, ClusterResult};
pub use pca::{pca, standardize, PcaResult};

use crate::error::{Error, Result};

/// Dense feature table with optional missing cells. Rows align with
/// `video_ids`, columns with `column_names`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub video_ids: Vec<String>,
    pub column_names: Vec<String>,
    values: Vec<Vec<Option<f64>>>,
}

impl FeatureTable {
    pub fn new(
        video_ids: Vec<String>,
        column_names: Vec<String>,
        values: Vec<Vec<Option<f64>>>,
    ) -> Result<FeatureTable> {
        if values.len() != video_ids.len() {
            return Err(Error::InvalidInput(format!(
                "{} rows of values for {} video ids",
                values.len(),
                video_ids.len()
            )));
        }
        if let Some(row) = values.iter().find(|row| row.len() != column_names.len()) {
            return Err(Error::InvalidInput(format!(
                "row has {} cells for {} columns",
                row.len(),
                column_names.len()
            )));
        }
        if values.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite table cell".into()));
        }
        Ok(FeatureTable { video_ids, column_names, values })
    }

    pub fn n_rows(&self) -> usize {
        self.video_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row][col]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Rows without any missing cell.
    pub fn drop_incomplete_rows(&self) -> FeatureTable {
        let mut video_ids = Vec::new();
        let mut values = Vec::new();
        for (id, row) in self.video_ids.iter().zip(self.values.iter()) {
            if row.iter().all(Option::is_some) {
                video_ids.push(id.clone());
                values.push(row.clone());
            }
        }
        FeatureTable { video_ids, column_names: self.column_names.clone(), values }
    }

    /// Dense matrix view; errors if any cell is missing.
    pub fn to_dense(&self) -> Result<Vec<Vec<f64>>> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, cell)| {
                        cell.ok_or_else(|| {
                            Error::InvalidInput(format!(
                                "missing cell at row {} ({}), column {}",
                                i, self.video_ids[i], self.column_names[j]
                            ))
                        })
                    })
                    .collect()
            })
            .collect()
    }

    pub(crate) fn from_dense(
        video_ids: Vec<String>,
        column_names: Vec<String>,
        dense: Vec<Vec<f64>>,
    ) -> FeatureTable {
        let values = dense
            .into_iter()
            .map(|row| row.into_iter().map(Some).collect())
            .collect();
        FeatureTable { video_ids, column_names, values }
    }

    /// Paired complete observations of two columns.
    pub(crate) fn complete_pairs(&self, col_a: usize, col_b: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for row in &self.values {
            if let (Some(x), Some(y)) = (row[col_a], row[col_b]) {
                xs.push(x);
                ys.push(y);
            }
        }
        (xs, ys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_validation() {
        assert!(FeatureTable::new(vec!["v1".into()], vec!["a".into()], vec![]).is_err());
        assert!(FeatureTable::new(
            vec!["v1".into()],
            vec!["a".into()],
            vec![vec![Some(1.0), Some(2.0)]]
        )
        .is_err());
        assert!(FeatureTable::new(
            vec!["v1".into()],
            vec!["a".into()],
            vec![vec![Some(f64::NAN)]]
        )
        .is_err());
    }

    #[test]
    fn drop_incomplete_rows_keeps_complete_ones() {
        let table = FeatureTable::new(
            vec!["v1".into(), "v2".into(), "v3".into()],
            vec!["a".into(), "b".into()],
            vec![
                vec![Some(1.0), Some(2.0)],
                vec![Some(3.0), None],
                vec![Some(5.0), Some(6.0)],
            ],
        )
        .unwrap();
        let complete = table.drop_incomplete_rows();
        assert_eq!(complete.video_ids, vec!["v1", "v3"]);
        assert!(complete.to_dense().is_ok());
        assert!(table.to_dense().is_err());
    }
}
