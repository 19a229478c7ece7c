//! Minimal dense numeric kernel: matrices, vector helpers, the sigmoid
//! activation, the Adam optimizer, a seeded counter-based RNG, and a
//! central-difference gradient oracle for checking analytic backprop.

mod adam;
mod matrix;
mod rng;

pub use adam::{AdamConfig, AdamState};
pub use matrix::{
    dot, euclidean_distance, l1_norm, l2_norm, l2_norm_sq, solve_spd, Matrix,
};
pub use rng::RngStream;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Logistic function `1 / (1 + e^-x)`.
#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Elementwise sigmoid.
pub fn sigmoid_vec<T: Scalar>(xs: &[T]) -> Vec<T> {
    xs.iter().map(|&x| sigmoid(x)).collect()
}

/// Central-difference gradient of `loss` at `params`.
///
/// This is the independent oracle the gradient tests compare analytic
/// backprop against; it never shares code with the backprop path.
pub fn numerical_gradient<T, F>(mut loss: F, params: &[T], eps: T) -> Result<Vec<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    if eps <= T::zero() {
        return Err(Error::InvalidConfig("numerical_gradient: eps must be > 0".into()));
    }
    let mut theta = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    let two = T::from_f64(2.0);
    for j in 0..params.len() {
        let orig = theta[j];
        theta[j] = orig + eps;
        let up = loss(&theta);
        theta[j] = orig - eps;
        let down = loss(&theta);
        theta[j] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite(format!(
                "loss at coordinate {j} during finite differencing"
            )));
        }
        grad.push((up - down) / (two * eps));
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_at_zero_is_half() {
        assert_eq!(sigmoid_vec(&[0.0, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn sigmoid_at_one_matches_reference_value() {
        assert!((sigmoid(1.0_f64) - 0.7310585786).abs() < 1e-9);
    }

    #[test]
    fn sigmoid_symmetry_sums_to_one() {
        let mut rng = RngStream::new(2);
        for _ in 0..200 {
            let x = rng.uniform(-8.0, 8.0);
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sigmoid_is_strictly_monotone() {
        let mut rng = RngStream::new(4);
        for _ in 0..200 {
            let a = rng.uniform(-10.0, 10.0);
            let b = a + rng.uniform(1e-6, 1.0);
            assert!(sigmoid(b) > sigmoid(a));
        }
    }

    #[test]
    fn numerical_gradient_of_square() {
        let g = numerical_gradient(|t: &[f64]| t[0] * t[0], &[3.0], 1e-5).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn numerical_gradient_of_constant_is_zero() {
        let g = numerical_gradient(|_| 1.25, &[0.3, -0.7, 2.0], 1e-5).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn numerical_gradient_of_sum_is_ones() {
        let g = numerical_gradient(|t| t.iter().sum::<f64>(), &[0.1, 0.2, 0.3], 1e-5).unwrap();
        assert!(g.iter().all(|&v| (v - 1.0).abs() < 1e-8));
    }

    #[test]
    fn numerical_gradient_matches_analytic_on_quadratics() {
        // f(x) = sum_i (i+1) * x_i^2, analytic gradient 2(i+1)x_i.
        let mut rng = RngStream::new(9);
        for _ in 0..20 {
            let x: Vec<f64> = (0..5).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let f = |t: &[f64]| {
                t.iter()
                    .enumerate()
                    .map(|(i, v)| (i + 1) as f64 * v * v)
                    .sum::<f64>()
            };
            let g = numerical_gradient(f, &x, 1e-5).unwrap();
            for (i, (gi, xi)) in g.iter().zip(&x).enumerate() {
                let analytic = 2.0 * (i + 1) as f64 * xi;
                assert!((gi - analytic).abs() <= 1e-8 * (1.0 + analytic.abs()));
            }
        }
    }

    #[test]
    fn numerical_gradient_rejects_nonfinite_loss() {
        let r = numerical_gradient(|t: &[f64]| (1.0 / t[0]).ln(), &[0.0], 1e-5);
        assert!(r.is_err());
    }
}
