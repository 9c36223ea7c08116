//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! The matrices here are tiny (feature-count square), so Jacobi's quadratic
//! convergence and machine-precision orthogonality are worth more than speed.

/// Eigenvalues and eigenvectors of a symmetric matrix, sorted by descending
/// eigenvalue. `vectors[j]` is the unit eigenvector for `values[j]`.
pub(crate) fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    // v[i][j]: component i of eigenvector j.
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| (a[j][j], (0..n).map(|i| v[i][j]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite eigenvalues"));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    #[test]
    fn known_two_by_two() {
        // Eigenvalues of [[2,1],[1,2]] are 3 and 1.
        let (values, vectors) = jacobi_eigen(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((values[0] - 3.0).abs() < 1e-12);
        assert!((values[1] - 1.0).abs() < 1e-12);
        let ratio = vectors[0][0] / vectors[0][1];
        assert!((ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reproduces_eigen_equation_and_orthogonality() {
        let m = vec![
            vec![4.0, 1.0, 0.5, -0.3],
            vec![1.0, 3.0, -0.2, 0.8],
            vec![0.5, -0.2, 2.0, 0.1],
            vec![-0.3, 0.8, 0.1, 1.5],
        ];
        let (values, vectors) = jacobi_eigen(m.clone());
        for (value, vector) in values.iter().zip(vectors.iter()) {
            let mv = matvec(&m, vector);
            for (a, b) in mv.iter().zip(vector.iter()) {
                assert!((a - value * b).abs() < 1e-9, "A v != lambda v");
            }
        }
        for i in 0..vectors.len() {
            for j in 0..vectors.len() {
                let dot: f64 = vectors[i].iter().zip(vectors[j].iter()).map(|(a, b)| a * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-9);
            }
        }
        let trace: f64 = values.iter().sum();
        assert!((trace - (4.0 + 3.0 + 2.0 + 1.5)).abs() < 1e-9);
    }
}
