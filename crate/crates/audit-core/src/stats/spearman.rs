//! Spearman rank correlation with a t-distribution p-value.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::stats::average_ranks;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult {
    pub rho: f64,
    pub p: f64,
}

/// Spearman's rank correlation: Pearson correlation of average-tie ranks,
/// with a two-sided p-value from the t approximation on n - 2 degrees of
/// freedom. Constant inputs are an error (rho undefined).
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<SpearmanResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 pairs, found {n}")));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);

    let mean = (n as f64 + 1.0) / 2.0; // ranks always average to (n+1)/2
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for i in 0..n {
        let dx = rx[i] - mean;
        let dy = ry[i] - mean;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::ConstantInput("spearman input column".into()));
    }
    let rho = (cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0);

    let df = (n - 2) as f64;
    let p = if (1.0 - rho * rho) <= f64::EPSILON {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("valid dof");
        (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
    };
    Ok(SpearmanResult { rho, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn monotone_relabeling_gives_one() {
        let x = [3.0, 1.0, 4.0, 1.5, 5.0, 9.0];
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let result = spearman_rho(&x, &y).unwrap();
        assert_eq!(result.rho, 1.0);
        assert_eq!(result.p, 0.0);
    }

    #[test]
    fn reversed_order_gives_minus_one() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [10.0, 8.0, 6.0, 4.0, 2.0];
        let result = spearman_rho(&x, &y).unwrap();
        assert_eq!(result.rho, -1.0);
    }

    #[test]
    fn constant_input_is_an_error() {
        let x = [1.0, 1.0, 1.0, 1.0];
        let y = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(spearman_rho(&x, &y), Err(Error::ConstantInput(_))));
        assert!(matches!(spearman_rho(&y, &x), Err(Error::ConstantInput(_))));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            spearman_rho(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn symmetric_in_arguments() {
        let x = [3.0, 7.0, 1.0, 9.0, 4.0, 4.0, 8.0];
        let y = [2.0, 5.0, 6.0, 1.0, 9.0, 3.0, 3.0];
        let xy = spearman_rho(&x, &y).unwrap();
        let yx = spearman_rho(&y, &x).unwrap();
        assert_eq!(xy, yx);
    }

    #[test]
    fn invariant_under_increasing_transform() {
        let x = [3.0, 7.0, 1.0, 9.0, 4.0, 6.0, 8.0];
        let y = [2.0, 5.0, 6.0, 1.0, 9.0, 3.0, 7.5];
        let tx: Vec<f64> = x.iter().map(|v| v * v * v + 2.0).collect();
        let base = spearman_rho(&x, &y).unwrap();
        let transformed = spearman_rho(&tx, &y).unwrap();
        assert_eq!(base, transformed);
    }

    #[test]
    fn shuffled_pairs_are_uncorrelated_on_average() {
        // 65-row analogue of a null correlation study: over many random
        // pairings rho stays small and p stays large on average.
        let mut rng = crate::seed::derive_rng(99, &[1]);
        let n = 65;
        let mut mean_abs_rho = 0.0;
        let mut mean_p = 0.0;
        let runs = 200;
        for _ in 0..runs {
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let mut y: Vec<f64> = (0..n).map(|i| i as f64).collect();
            y.shuffle(&mut rng);
            let result = spearman_rho(&x, &y).unwrap();
            mean_abs_rho += result.rho.abs();
            mean_p += result.p;
        }
        mean_abs_rho /= runs as f64;
        mean_p /= runs as f64;
        assert!(mean_abs_rho < 0.2, "mean |rho| {mean_abs_rho}");
        assert!(mean_p > 0.3, "mean p {mean_p}");
    }
}
