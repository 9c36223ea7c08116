/// Ranks of `values` (1-based), with tied values sharing the average of the
/// positions they span. Inputs must be finite.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    debug_assert!(values.iter().all(|v| v.is_finite()));
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));

    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average of ranks i+1..=j+1.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_values_get_integer_ranks() {
        assert_eq!(average_ranks(&[10.0, 30.0, 20.0]), vec![1.0, 3.0, 2.0]);
    }

    #[test]
    fn ties_share_average_rank() {
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0, 5.0]), vec![1.0, 2.5, 2.5, 4.0, 5.0]);
        assert_eq!(average_ranks(&[7.0, 7.0, 7.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn ranks_sum_is_invariant() {
        let values = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0];
        let n = values.len() as f64;
        let sum: f64 = average_ranks(&values).iter().sum();
        assert!((sum - n * (n + 1.0) / 2.0).abs() < 1e-12);
    }
}
