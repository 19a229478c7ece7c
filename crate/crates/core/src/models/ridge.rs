//! Linear transfer by ridge regression: an explicit matrix mapping one
//! platform's representation onto the other's, fit in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{solve_spd, Matrix};
use crate::scalar::Scalar;

/// `W` minimizing `||W U_src - U_dst||_F^2 + lambda ||W||_F^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeTransfer<T> {
    pub weights: Matrix<T>,
    pub lambda: T,
}

/// Closed-form fit via the normal equations:
/// `W = U_dst U_src^T (U_src U_src^T + lambda I)^{-1}`.
///
/// Users are columns: `U_src` is `n_src x N` and `U_dst` is `n_dst x N`.
pub fn ridge_fit<T: Scalar>(
    u_src: &Matrix<T>,
    u_dst: &Matrix<T>,
    lambda: T,
) -> Result<RidgeTransfer<T>> {
    if u_src.cols() != u_dst.cols() {
        return Err(Error::DimMismatch(format!(
            "ridge_fit: {} source users vs {} target users",
            u_src.cols(),
            u_dst.cols()
        )));
    }
    if lambda < T::zero() {
        return Err(Error::InvalidConfig("ridge lambda must be >= 0".into()));
    }

    let n = u_src.rows();
    let mut gram = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = T::zero();
            for k in 0..u_src.cols() {
                s += u_src.get(i, k) * u_src.get(j, k);
            }
            gram.set(i, j, s);
        }
    }
    for i in 0..n {
        gram.set(i, i, gram.get(i, i) + lambda);
    }

    // rhs = U_src U_dst^T, one column per target dimension.
    let rhs = u_src.matmul(&u_dst.transpose())?;
    let solved = solve_spd(&gram, &rhs).map_err(|e| match e {
        Error::Singular(msg) => Error::Singular(format!("ridge normal equations: {msg}")),
        other => other,
    })?;
    Ok(RidgeTransfer {
        weights: solved.transpose(),
        lambda,
    })
}

impl<T: Scalar> RidgeTransfer<T> {
    pub fn predict(&self, u_src: &[T]) -> Result<Vec<T>> {
        self.weights.matvec(u_src)
    }

    /// Frobenius residual of `W (Gram + lambda I) - U_dst U_src^T`; zero for
    /// an exact solve.
    pub fn normal_equation_residual(&self, u_src: &Matrix<T>, u_dst: &Matrix<T>) -> Result<T> {
        let n = u_src.rows();
        let mut gram = u_src.matmul(&u_src.transpose())?;
        for i in 0..n {
            gram.set(i, i, gram.get(i, i) + self.lambda);
        }
        let lhs = self.weights.matmul(&gram)?;
        let rhs = u_dst.matmul(&u_src.transpose())?;
        Ok(lhs.sub(&rhs)?.frobenius_norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    #[test]
    fn one_dimensional_hand_case() {
        let u_src = Matrix::from_vec(1, 1, vec![1.0f64]).unwrap();
        let u_dst = Matrix::from_vec(1, 1, vec![2.0]).unwrap();
        let model = ridge_fit(&u_src, &u_dst, 0.0).unwrap();
        assert!((model.weights.get(0, 0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identity_target_recovers_identity() {
        let mut rng = RngStream::new(17);
        let u = Matrix::from_fn(4, 30, |_, _| rng.uniform(-1.0, 1.0));
        let model = ridge_fit(&u, &u, 0.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((model.weights.get(i, j) - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn huge_lambda_shrinks_weights_to_zero() {
        let mut rng = RngStream::new(18);
        let u_src = Matrix::from_fn(3, 20, |_, _| rng.uniform(-1.0, 1.0));
        let u_dst = Matrix::from_fn(5, 20, |_, _| rng.uniform(-1.0, 1.0));
        let model = ridge_fit(&u_src, &u_dst, 1e9).unwrap();
        assert!(model.weights.frobenius_norm() < 1e-6);
    }

    #[test]
    fn singular_system_without_lambda_is_an_error() {
        // Two identical rows make the Gram matrix rank deficient.
        let u_src = Matrix::from_vec(2, 3, vec![1.0f64, 2.0, 3.0, 1.0, 2.0, 3.0]).unwrap();
        let u_dst = Matrix::from_vec(1, 3, vec![1.0, 1.0, 1.0]).unwrap();
        let err = ridge_fit(&u_src, &u_dst, 0.0).unwrap_err();
        assert!(err.to_string().contains("lambda > 0"));
        assert!(ridge_fit(&u_src, &u_dst, 0.1).is_ok());
    }

    #[test]
    fn predict_hand_cases() {
        let w = Matrix::from_vec(2, 2, vec![1.0f64, 0.0, 1.0, 1.0]).unwrap();
        let model = RidgeTransfer { weights: w, lambda: 0.0 };
        let out = model.predict(&[0.3, 0.7]).unwrap();
        assert!((out[0] - 0.3).abs() < 1e-15);
        assert!((out[1] - 1.0).abs() < 1e-15);

        let zero = RidgeTransfer { weights: Matrix::<f64>::zeros(2, 2), lambda: 0.0 };
        assert_eq!(zero.predict(&[0.5, 0.5]).unwrap(), vec![0.0, 0.0]);

        let id = RidgeTransfer { weights: Matrix::diag(2, 1.0), lambda: 0.0 };
        assert_eq!(id.predict(&[0.4, 0.6]).unwrap(), vec![0.4, 0.6]);

        assert!(model.predict(&[1.0]).is_err());
    }

    #[test]
    fn solution_satisfies_normal_equations() {
        let mut rng = RngStream::new(19);
        for trial in 0..5 {
            let dim = 3 + trial;
            let u_src = Matrix::from_fn(dim, 25, |_, _| rng.uniform(-1.0, 1.0));
            let u_dst = Matrix::from_fn(4, 25, |_, _| rng.uniform(-1.0, 1.0));
            let model = ridge_fit(&u_src, &u_dst, 0.3).unwrap();
            let residual = model.normal_equation_residual(&u_src, &u_dst).unwrap();
            assert!(residual < 1e-8, "residual {residual}");
        }
    }
}
