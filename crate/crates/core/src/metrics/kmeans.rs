//! Seeded Lloyd's k-means with deterministic tie-breaking.

use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct KmeansResult<T> {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<T>>,
    /// Within-cluster sum of squares after each assignment step.
    pub wcss_trace: Vec<T>,
}

fn distance_sq<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        s += d * d;
    }
    s
}

/// Lloyd's iterations from `k` distinct seeded points. Assignment ties break
/// toward the lower centroid index; empty clusters are re-seeded from the
/// point farthest from its assigned centroid.
pub fn kmeans<T: Scalar>(
    points: &[Vec<T>],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<KmeansResult<T>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "kmeans: k {k} outside 1..={n}"
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::DimMismatch("kmeans: ragged points".into()));
    }

    let mut rng = RngStream::new(seed).derive("kmeans_init");
    let mut centroids: Vec<Vec<T>> = rng
        .sample_indices(n, k)
        .into_iter()
        .map(|i| points[i].clone())
        .collect();
    let mut assignments = vec![0usize; n];
    let mut wcss_trace = Vec::new();

    for _ in 0..max_iters.max(1) {
        // Assignment step.
        let mut changed = false;
        let mut wcss = T::zero();
        for (i, p) in points.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = distance_sq(p, &centroids[0]);
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let d = distance_sq(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
            wcss += best_d;
        }
        wcss_trace.push(wcss);
        if !changed && wcss_trace.len() > 1 {
            break;
        }

        // Update step.
        let mut sums = vec![vec![T::zero(); dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += *v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Re-seed from the farthest point.
                let far = points
                    .iter()
                    .enumerate()
                    .max_by(|(i, p), (j, q)| {
                        let di = distance_sq(p, &centroids[assignments[*i]]);
                        let dj = distance_sq(q, &centroids[assignments[*j]]);
                        di.partial_cmp(&dj).unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .map(|(i, _)| i)
                    .unwrap();
                centroids[c] = points[far].clone();
            } else {
                let inv = T::one() / T::from_f64(counts[c] as f64);
                for (cv, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *cv = *s * inv;
                }
            }
        }
    }

    Ok(KmeansResult { assignments, centroids, wcss_trace })
}
