//! Gini coefficient of a nonnegative engagement distribution.

use crate::error::{Error, Result};

/// Gini coefficient: the mean absolute difference between all value pairs,
/// normalized by twice the mean. Zero for an all-equal (or all-zero) vector,
/// approaching one as the total concentrates in a single entry.
///
/// Computed via the sorted-weights identity, which equals the pairwise
/// double sum `sum |x_i - x_j| / (2 n^2 mean)`.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "gini needs at least 2 values, found {}",
            values.len()
        )));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidInput(format!("gini requires nonnegative finite values, found {bad}")));
    }
    let n = values.len();
    let total: f64 = values.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i as f64 + 1.0) - n as f64 - 1.0) * x)
        .sum();
    let mean = total / n as f64;
    Ok(weighted / ((n * n) as f64 * mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gini_pairwise(values: &[f64]) -> f64 {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        if mean == 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        for &a in values {
            for &b in values {
                sum += (a - b).abs();
            }
        }
        sum / (2.0 * (n * n) as f64 * mean)
    }

    #[test]
    fn all_equal_is_zero() {
        assert_eq!(gini(&[4.0, 4.0, 4.0, 4.0]).unwrap(), 0.0);
    }

    #[test]
    fn all_zero_is_zero_by_convention() {
        assert_eq!(gini(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn single_nonzero_entry() {
        for n in [2usize, 5, 10, 50] {
            let mut values = vec![0.0; n];
            values[n / 2] = 1.0;
            let expected = (n as f64 - 1.0) / n as f64;
            let actual = gini(&values).unwrap();
            assert!((actual - expected).abs() < 1e-12, "n={n}: {actual} vs {expected}");
            assert!((actual - gini_pairwise(&values)).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_values_are_rejected() {
        assert!(gini(&[1.0, -0.5]).is_err());
    }

    #[test]
    fn too_few_values_rejected() {
        assert!(gini(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn matches_pairwise_double_loop(
            values in proptest::collection::vec(0.0f64..1000.0, 2..60),
        ) {
            let fast = gini(&values).unwrap();
            let slow = gini_pairwise(&values);
            prop_assert!((fast - slow).abs() < 1e-12);
        }

        #[test]
        fn invariant_under_positive_rescaling(
            values in proptest::collection::vec(0.0f64..100.0, 2..30),
            scale in 0.01f64..50.0,
        ) {
            prop_assume!(values.iter().sum::<f64>() > 0.0);
            let base = gini(&values).unwrap();
            let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
            let rescaled = gini(&scaled).unwrap();
            prop_assert!((base - rescaled).abs() < 1e-9);
        }

        #[test]
        fn order_does_not_matter(
            mut values in proptest::collection::vec(0.0f64..100.0, 2..30),
        ) {
            let forward = gini(&values).unwrap();
            values.reverse();
            let reversed = gini(&values).unwrap();
            prop_assert_eq!(forward, reversed);
        }
    }
}
