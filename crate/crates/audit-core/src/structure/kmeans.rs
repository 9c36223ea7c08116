//! Seeded k-means with k-means++ initialization and restarts.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::derive_rng;

const KMEANS_TAG: u64 = 0x4b4d_4e53; // "KMNS"
const MAX_ITERATIONS: usize = 300;
const SHIFT_TOLERANCE: f64 = 1e-8;

/// Result of one clustering run. Cluster indices are canonicalized by sorting
/// centroids lexicographically (first coordinate first), so labels are stable
/// across runs with identical input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub assignments: BTreeMap<String, usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub k: usize,
    pub seed: u64,
}

/// Lloyd's algorithm over `points`, best inertia over `restarts` k-means++
/// initializations (ties keep the earliest restart). Deterministic given
/// `seed`.
pub fn kmeans(ids: &[String], points: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<ClusterResult> {
    if ids.len() != points.len() {
        return Err(Error::LengthMismatch { left: ids.len(), right: points.len() });
    }
    if k < 1 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if points.is_empty() || k > points.len() {
        return Err(Error::InvalidInput(format!(
            "k = {k} exceeds the number of points ({})",
            points.len()
        )));
    }
    let dims = points[0].len();
    if points.iter().any(|p| p.len() != dims) {
        return Err(Error::InvalidInput("points have mixed dimensionality".into()));
    }
    let restarts = restarts.max(1);

    let mut best: Option<(f64, Vec<usize>, Vec<Vec<f64>>)> = None;
    for restart in 0..restarts {
        let mut rng = derive_rng(seed, &[KMEANS_TAG, restart as u64]);
        let centroids = plus_plus_init(points, k, &mut rng);
        let (assignments, centroids, inertia) = lloyd(points, centroids);
        let better = match &best {
            None => true,
            Some((best_inertia, _, _)) => inertia < *best_inertia,
        };
        if better {
            best = Some((inertia, assignments, centroids));
        }
    }
    let (inertia, assignments, centroids) = best.expect("at least one restart");
    let (assignments, centroids) = canonicalize(assignments, centroids);

    Ok(ClusterResult {
        assignments: ids.iter().cloned().zip(assignments).collect(),
        centroids,
        inertia,
        k,
        seed,
    })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())].clone());
    let mut distances: Vec<f64> = points.iter().map(|p| squared_distance(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = distances.iter().sum();
        let next = if total > 0.0 {
            let weighted = WeightedIndex::new(&distances).expect("nonnegative weights");
            weighted.sample(rng)
        } else {
            // All remaining distance mass is zero (duplicate points); any
            // choice yields the same clustering.
            rng.gen_range(0..points.len())
        };
        centroids.push(points[next].clone());
        for (distance, point) in distances.iter_mut().zip(points) {
            let d = squared_distance(point, centroids.last().unwrap());
            if d < *distance {
                *distance = d;
            }
        }
    }
    centroids
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut assignments = Vec::with_capacity(points.len());
    let mut inertia = 0.0;
    for point in points {
        let mut best = 0usize;
        let mut best_distance = f64::INFINITY;
        for (idx, centroid) in centroids.iter().enumerate() {
            let d = squared_distance(point, centroid);
            if d < best_distance {
                best_distance = d;
                best = idx;
            }
        }
        assignments.push(best);
        inertia += best_distance;
    }
    (assignments, inertia)
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let dims = points[0].len();
    let k = centroids.len();
    let (mut assignments, mut inertia) = assign(points, &centroids);

    for _ in 0..MAX_ITERATIONS {
        // Recompute centroids as cluster means.
        let mut sums = vec![vec![0.0; dims]; k];
        let mut counts = vec![0usize; k];
        for (point, &cluster) in points.iter().zip(&assignments) {
            counts[cluster] += 1;
            for (s, v) in sums[cluster].iter_mut().zip(point) {
                *s += v;
            }
        }
        let mut new_centroids = Vec::with_capacity(k);
        for (cluster, (sum, &count)) in sums.iter().zip(&counts).enumerate() {
            if count == 0 {
                // Re-seed an empty cluster with the point farthest from its
                // centroid (deterministic: max distance, lowest index wins).
                let farthest = points
                    .iter()
                    .enumerate()
                    .map(|(idx, p)| (squared_distance(p, &centroids[assignments[idx]]), idx))
                    .max_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distance").then(b.1.cmp(&a.1)))
                    .map(|(_, idx)| idx)
                    .expect("nonempty points");
                new_centroids.push(points[farthest].clone());
                let _ = cluster;
            } else {
                new_centroids.push(sum.iter().map(|s| s / count as f64).collect());
            }
        }

        let shift = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(old, new)| squared_distance(old, new).sqrt())
            .fold(0.0f64, f64::max);
        centroids = new_centroids;
        let (new_assignments, new_inertia) = assign(points, &centroids);
        debug_assert!(
            new_inertia <= inertia + 1e-9,
            "inertia increased: {inertia} -> {new_inertia}"
        );
        assignments = new_assignments;
        inertia = new_inertia;
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }
    (assignments, centroids, inertia)
}

fn canonicalize(assignments: Vec<usize>, centroids: Vec<Vec<f64>>) -> (Vec<usize>, Vec<Vec<f64>>) {
    let k = centroids.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        centroids[a]
            .iter()
            .zip(&centroids[b])
            .find_map(|(x, y)| match x.partial_cmp(y).expect("finite centroid") {
                std::cmp::Ordering::Equal => None,
                other => Some(other),
            })
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut relabel = vec![0usize; k];
    for (new_idx, &old_idx) in order.iter().enumerate() {
        relabel[old_idx] = new_idx;
    }
    let relabeled_assignments = assignments.into_iter().map(|c| relabel[c]).collect();
    let reordered_centroids = order.into_iter().map(|idx| centroids[idx].clone()).collect();
    (relabeled_assignments, reordered_centroids)
}
