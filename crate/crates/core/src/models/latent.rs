//! Latent-attribute association by paired sparse coding: both platforms'
//! user matrices are factored through one shared code matrix, with an L1
//! penalty on the codes and unit-ball constraints on dictionary columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{l2_norm, Matrix, RngStream};
use crate::repr::Platform;
use crate::scalar::Scalar;

/// Paired dictionaries sharing one code space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentAttribute<T> {
    pub d_t: Matrix<T>,
    pub d_y: Matrix<T>,
    pub lambda: T,
    pub m: usize,
    /// Objective value at init and after every half-step (codes, then
    /// dictionaries) of each alternation.
    pub objective_trace: Vec<T>,
}

const CODE_PASSES: usize = 60;
const CODE_TOL: f64 = 1e-12;
const DICT_STEPS: usize = 40;

/// Soft-thresholding operator.
fn soft<T: Scalar>(v: T, threshold: T) -> T {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        T::zero()
    }
}

/// Solves `min_s ||x - D s||^2 + lambda ||s||_1` by cyclic coordinate
/// descent. Each coordinate update is an exact one-dimensional minimizer, so
/// the objective never increases.
pub fn lasso_coordinate_descent<T: Scalar>(
    dictionary: &Matrix<T>,
    x: &[T],
    lambda: T,
    warm_start: Option<&[T]>,
) -> Result<Vec<T>> {
    let dim = dictionary.rows();
    let atoms = dictionary.cols();
    if x.len() != dim {
        return Err(Error::DimMismatch(format!(
            "lasso: signal of len {} vs dictionary rows {}",
            x.len(),
            dim
        )));
    }
    let col_sq: Vec<T> = (0..atoms)
        .map(|j| (0..dim).map(|i| dictionary.get(i, j).powi(2)).sum())
        .collect();
    let half_lambda = lambda / T::from_f64(2.0);

    let mut s = match warm_start {
        Some(w) if w.len() == atoms => w.to_vec(),
        _ => vec![T::zero(); atoms],
    };

    for _ in 0..CODE_PASSES {
        // Fresh residual each pass keeps incremental drift bounded.
        let mut residual = x.to_vec();
        for i in 0..dim {
            let mut acc = T::zero();
            for j in 0..atoms {
                acc += dictionary.get(i, j) * s[j];
            }
            residual[i] -= acc;
        }

        let mut max_change = T::zero();
        for j in 0..atoms {
            if col_sq[j] == T::zero() {
                continue;
            }
            let mut corr = T::zero();
            for i in 0..dim {
                corr += dictionary.get(i, j) * residual[i];
            }
            corr += col_sq[j] * s[j];
            let updated = soft(corr, half_lambda) / col_sq[j];
            let delta = s[j] - updated;
            if delta != T::zero() {
                for i in 0..dim {
                    residual[i] += dictionary.get(i, j) * delta;
                }
                s[j] = updated;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < T::from_f64(CODE_TOL) {
            break;
        }
    }
    Ok(s)
}

fn stack_columns<T: Scalar>(top: &Matrix<T>, bottom: &Matrix<T>) -> Matrix<T> {
    debug_assert_eq!(top.cols(), bottom.cols());
    Matrix::from_fn(top.rows() + bottom.rows(), top.cols(), |r, c| {
        if r < top.rows() {
            top.get(r, c)
        } else {
            bottom.get(r - top.rows(), c)
        }
    })
}

fn objective<T: Scalar>(
    u_t: &Matrix<T>,
    u_y: &Matrix<T>,
    d_t: &Matrix<T>,
    d_y: &Matrix<T>,
    codes: &Matrix<T>,
) -> Result<T> {
    let fit_t = u_t.sub(&d_t.matmul(codes)?)?.frobenius_norm_sq();
    let fit_y = u_y.sub(&d_y.matmul(codes)?)?.frobenius_norm_sq();
    Ok(fit_t + fit_y)
}

fn project_columns<T: Scalar>(d: &mut Matrix<T>) {
    for j in 0..d.cols() {
        let norm = l2_norm(&d.column(j));
        if norm > T::one() {
            for i in 0..d.rows() {
                d.set(i, j, d.get(i, j) / norm);
            }
        }
    }
}

/// Projected-gradient dictionary update for `min_D ||U - D S||^2` with unit
/// column-norm balls. Step size `1 / (2 tr(S S^T))` bounds the Lipschitz
/// constant, so every step is a descent step.
fn dictionary_step<T: Scalar>(d: &mut Matrix<T>, u: &Matrix<T>, codes: &Matrix<T>) -> Result<()> {
    let trace: T = codes.frobenius_norm_sq();
    if trace == T::zero() {
        return Ok(());
    }
    let step = T::one() / (T::from_f64(2.0) * trace);
    let two = T::from_f64(2.0);
    for _ in 0..DICT_STEPS {
        // grad = 2 (D S - U) S^T
        let residual = d.matmul(codes)?.sub(u)?;
        let grad = residual.matmul(&codes.transpose())?.scaled(two);
        for (dv, gv) in d.data_mut().iter_mut().zip(grad.data()) {
            *dv = *dv - step * *gv;
        }
        project_columns(d);
    }
    Ok(())
}

/// Alternating minimization: exact-coordinate lasso over the codes, then a
/// projected-gradient dictionary update, repeated `iters` times. Fails if
/// the recorded objective ever rises by more than `1e-10`.
pub fn la_fit<T: Scalar>(
    u_t: &Matrix<T>,
    u_y: &Matrix<T>,
    m: usize,
    lambda: T,
    iters: usize,
    seed: u64,
) -> Result<LatentAttribute<T>> {
    if u_t.cols() != u_y.cols() {
        return Err(Error::DimMismatch(format!(
            "la_fit: {} vs {} users",
            u_t.cols(),
            u_y.cols()
        )));
    }
    if m == 0 {
        return Err(Error::InvalidConfig("la_fit: m must be >= 1".into()));
    }
    let n_users = u_t.cols();

    let mut rng = RngStream::new(seed).derive("la_init");
    let mut init_dict = |rows: usize| {
        let mut d = Matrix::from_fn(rows, m, |_, _| T::from_f64(rng.normal()));
        for j in 0..m {
            let norm = l2_norm(&d.column(j));
            if norm > T::zero() {
                for i in 0..rows {
                    d.set(i, j, d.get(i, j) / norm);
                }
            }
        }
        d
    };
    let mut d_t = init_dict(u_t.rows());
    let mut d_y = init_dict(u_y.rows());
    let mut codes: Matrix<T> = Matrix::zeros(m, n_users);

    let l1 = |codes: &Matrix<T>| -> T { codes.data().iter().map(|v| v.abs()).sum() };
    let slack = T::from_f64(1e-10);
    let mut trace = Vec::with_capacity(1 + 2 * iters);
    trace.push(objective(u_t, u_y, &d_t, &d_y, &codes)? + lambda * l1(&codes));

    let stacked_x = stack_columns(u_t, u_y);
    for it in 0..iters {
        // Code step: per-user lasso against the stacked dictionary.
        let stacked_d = stack_columns(&d_t, &d_y);
        for user in 0..n_users {
            let x = stacked_x.column(user);
            let warm = codes.column(user);
            let s = lasso_coordinate_descent(&stacked_d, &x, lambda, Some(&warm))?;
            for (j, v) in s.into_iter().enumerate() {
                codes.set(j, user, v);
            }
        }
        trace.push(objective(u_t, u_y, &d_t, &d_y, &codes)? + lambda * l1(&codes));

        // Dictionary step per platform.
        dictionary_step(&mut d_t, u_t, &codes)?;
        dictionary_step(&mut d_y, u_y, &codes)?;
        trace.push(objective(u_t, u_y, &d_t, &d_y, &codes)? + lambda * l1(&codes));

        let len = trace.len();
        for k in len - 2..len {
            if trace[k] > trace[k - 1] + slack {
                return Err(Error::Diverged {
                    step: it,
                    msg: format!(
                        "objective rose from {} to {} (trace tail {:?})",
                        trace[k - 1],
                        trace[k],
                        &trace[len.saturating_sub(4)..]
                    ),
                });
            }
        }
    }

    Ok(LatentAttribute {
        d_t,
        d_y,
        lambda,
        m,
        objective_trace: trace,
    })
}

impl<T: Scalar> LatentAttribute<T> {
    fn dictionaries(&self, src: Platform) -> (&Matrix<T>, &Matrix<T>) {
        match src {
            Platform::Twitter => (&self.d_t, &self.d_y),
            Platform::Youtube => (&self.d_y, &self.d_t),
        }
    }

    /// Codes `u_src` against the source dictionary, then decodes through the
    /// destination dictionary.
    pub fn predict(&self, u_src: &[T], src_platform: Platform) -> Result<Vec<T>> {
        let (d_src, d_dst) = self.dictionaries(src_platform);
        let code = lasso_coordinate_descent(d_src, u_src, self.lambda, None)?;
        d_dst.matvec(&code)
    }

    /// Largest dictionary column norm, for constraint checks.
    pub fn max_column_norm(&self) -> T {
        let mut best = T::zero();
        for d in [&self.d_t, &self.d_y] {
            for j in 0..d.cols() {
                best = best.max(l2_norm(&d.column(j)));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix<f64> {
        let mut rng = RngStream::new(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.uniform(0.0, 1.0))
    }

    /// Proximal-gradient (ISTA) lasso used as an independent oracle.
    fn ista_lasso(d: &Matrix<f64>, x: &[f64], lambda: f64, iters: usize) -> Vec<f64> {
        let atoms = d.cols();
        let lipschitz: f64 = 2.0 * d.frobenius_norm_sq();
        let step = 1.0 / lipschitz;
        let mut s = vec![0.0; atoms];
        for _ in 0..iters {
            let residual: Vec<f64> = {
                let ds = d.matvec(&s).unwrap();
                x.iter().zip(ds).map(|(xi, di)| xi - di).collect()
            };
            let grad = d.matvec_transpose(&residual).unwrap();
            for j in 0..atoms {
                let cand = s[j] + 2.0 * step * grad[j];
                s[j] = soft(cand, step * lambda);
            }
        }
        s
    }

    #[test]
    fn huge_lambda_zeroes_all_codes() {
        let u_t = random_matrix(4, 8, 1);
        let u_y = random_matrix(3, 8, 2);
        let max_norm = (0..8)
            .map(|c| {
                let mut v = u_t.column(c);
                v.extend(u_y.column(c));
                l2_norm(&v)
            })
            .fold(0.0f64, f64::max);
        let lambda = 10.0 * max_norm;
        let model = la_fit(&u_t, &u_y, 3, lambda, 5, 7).unwrap();
        let expect = u_t.frobenius_norm_sq() + u_y.frobenius_norm_sq();
        let last = *model.objective_trace.last().unwrap();
        assert!((last - expect).abs() < 1e-12, "objective {last} vs {expect}");
    }

    #[test]
    fn objective_trace_is_non_increasing_and_columns_feasible() {
        for seed in 0..5 {
            let u_t = random_matrix(5, 12, 100 + seed);
            let u_y = random_matrix(4, 12, 200 + seed);
            let model = la_fit(&u_t, &u_y, 4, 0.1, 15, seed).unwrap();
            for w in model.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-10, "trace rose: {} -> {}", w[0], w[1]);
            }
            assert!(model.max_column_norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn fit_beats_random_feasible_draws() {
        let u_t = random_matrix(4, 10, 31);
        let u_y = random_matrix(4, 10, 32);
        let lambda = 0.05;
        let model = la_fit(&u_t, &u_y, 3, lambda, 20, 5).unwrap();
        let fitted = *model.objective_trace.last().unwrap();

        let mut rng = RngStream::new(77);
        let mut best = f64::INFINITY;
        for _ in 0..100 {
            let mut d_t = Matrix::from_fn(4, 3, |_, _| rng.normal());
            let mut d_y = Matrix::from_fn(4, 3, |_, _| rng.normal());
            project_columns(&mut d_t);
            project_columns(&mut d_y);
            let codes = Matrix::from_fn(3, 10, |_, _| rng.normal() * 0.3);
            let l1: f64 = codes.data().iter().map(|v| v.abs()).sum();
            let obj = objective(&u_t, &u_y, &d_t, &d_y, &codes).unwrap() + lambda * l1;
            best = best.min(obj);
        }
        assert!(fitted <= best, "fitted {fitted} vs best random {best}");
    }

    #[test]
    fn coordinate_descent_matches_ista_oracle() {
        // 3-atom toy; the coordinate solution must agree with a long ISTA run.
        let d = Matrix::from_vec(
            4,
            3,
            vec![
                0.8, 0.1, 0.0, //
                0.1, 0.7, 0.2, //
                0.0, 0.2, 0.9, //
                0.3, 0.0, 0.1,
            ],
        )
        .unwrap();
        let x = vec![0.5f64, 0.4, 0.2, 0.15];
        let lambda = 1e-3;
        let cd = lasso_coordinate_descent(&d, &x, lambda, None).unwrap();
        let ista = ista_lasso(&d, &x, lambda, 200_000);
        for (a, b) in cd.iter().zip(&ista) {
            assert!((a - b).abs() < 1e-6, "cd {a} vs ista {b}");
        }
    }

    #[test]
    fn coding_a_dictionary_column_selects_that_atom() {
        // Atoms are nearly orthogonal unit vectors; coding atom 1 with a tiny
        // lambda must return (approximately) the unit code e_1.
        let d = Matrix::from_vec(
            3,
            3,
            vec![
                1.0f64, 0.0, 0.0, //
                0.0, 1.0, 0.0, //
                0.0, 0.0, 1.0,
            ],
        )
        .unwrap();
        let target = d.column(1);
        let model = LatentAttribute {
            d_t: d.clone(),
            d_y: d.scaled(0.5),
            lambda: 1e-6,
            m: 3,
            objective_trace: vec![],
        };
        let code = lasso_coordinate_descent(&model.d_t, &target, model.lambda, None).unwrap();
        assert!((code[1] - 1.0).abs() < 1e-5);
        assert!(code[0].abs() < 1e-6 && code[2].abs() < 1e-6);

        let out = model.predict(&target, Platform::Twitter).unwrap();
        let expect = model.d_y.column(1);
        for (o, e) in out.iter().zip(&expect) {
            assert!((o - e).abs() < 1e-5);
        }
    }

    #[test]
    fn huge_lambda_prediction_is_zero_and_deterministic() {
        let u_t = random_matrix(4, 10, 41);
        let u_y = random_matrix(3, 10, 42);
        let model = la_fit(&u_t, &u_y, 3, 1e6, 3, 9).unwrap();
        let out = model.predict(&u_t.column(0), Platform::Twitter).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));

        let small = la_fit(&u_t, &u_y, 3, 0.05, 10, 9).unwrap();
        let a = small.predict(&u_t.column(2), Platform::Twitter).unwrap();
        let b = small.predict(&u_t.column(2), Platform::Twitter).unwrap();
        assert_eq!(a, b);
    }
}
