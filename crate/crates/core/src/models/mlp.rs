//! One-hidden-layer MLP mapping one platform's representation onto the
//! other's: sigmoid hidden units, linear output, squared-error objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sigmoid, AdamState, Matrix, RngStream};
use crate::scalar::Scalar;

use super::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpMapper<T> {
    pub w1: Matrix<T>,
    pub b1: Vec<T>,
    pub w2: Matrix<T>,
    pub b2: Vec<T>,
    /// Mean per-example training loss after each epoch.
    pub loss_trace: Vec<T>,
}

impl<T: Scalar> MlpMapper<T> {
    pub fn from_parts(w1: Matrix<T>, b1: Vec<T>, w2: Matrix<T>, b2: Vec<T>) -> Result<Self> {
        if w1.rows() != b1.len() || w2.cols() != w1.rows() || w2.rows() != b2.len() {
            return Err(Error::DimMismatch("mlp layer shapes disagree".into()));
        }
        Ok(Self { w1, b1, w2, b2, loss_trace: Vec::new() })
    }

    pub fn input_dim(&self) -> usize {
        self.w1.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.w2.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.rows()
    }

    fn hidden(&self, x: &[T]) -> Result<Vec<T>> {
        let mut pre = self.w1.matvec(x)?;
        for (p, b) in pre.iter_mut().zip(&self.b1) {
            *p += *b;
        }
        Ok(pre.into_iter().map(sigmoid).collect())
    }

    pub fn predict(&self, x: &[T]) -> Result<Vec<T>> {
        let h = self.hidden(x)?;
        let mut out = self.w2.matvec(&h)?;
        for (o, b) in out.iter_mut().zip(&self.b2) {
            *o += *b;
        }
        Ok(out)
    }

    /// Summed squared error over `(input, target)` pairs.
    pub fn loss(&self, pairs: &[(Vec<T>, Vec<T>)]) -> Result<T> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("mlp loss over empty batch".into()));
        }
        let mut total = T::zero();
        for (x, y) in pairs {
            let out = self.predict(x)?;
            if out.len() != y.len() {
                return Err(Error::DimMismatch("mlp target length".into()));
            }
            for (o, t) in out.iter().zip(y) {
                let d = *o - *t;
                total += d * d;
            }
        }
        Ok(total)
    }

    /// Analytic gradient of [`loss`](Self::loss), flattened in parameter
    /// order `w1, b1, w2, b2`. Also returns the batch loss.
    pub fn loss_and_grad(&self, pairs: &[(Vec<T>, Vec<T>)]) -> Result<(T, Vec<T>)> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("mlp gradient over empty batch".into()));
        }
        let one = T::one();
        let two = T::from_f64(2.0);
        let mut g_w1 = Matrix::zeros(self.w1.rows(), self.w1.cols());
        let mut g_b1 = vec![T::zero(); self.b1.len()];
        let mut g_w2 = Matrix::zeros(self.w2.rows(), self.w2.cols());
        let mut g_b2 = vec![T::zero(); self.b2.len()];
        let mut total = T::zero();

        for (x, y) in pairs {
            let h = self.hidden(x)?;
            let mut out = self.w2.matvec(&h)?;
            for (o, b) in out.iter_mut().zip(&self.b2) {
                *o += *b;
            }
            let delta_out: Vec<T> = out
                .iter()
                .zip(y)
                .map(|(&o, &t)| {
                    let d = o - t;
                    total += d * d;
                    two * d
                })
                .collect();

            g_w2.add_outer(&delta_out, &h, one);
            for (b, d) in g_b2.iter_mut().zip(&delta_out) {
                *b += *d;
            }
            let back = self.w2.matvec_transpose(&delta_out)?;
            let delta_h: Vec<T> = h
                .iter()
                .zip(&back)
                .map(|(&hv, &bv)| bv * hv * (one - hv))
                .collect();
            g_w1.add_outer(&delta_h, x, one);
            for (b, d) in g_b1.iter_mut().zip(&delta_h) {
                *b += *d;
            }
        }

        let mut flat = Vec::with_capacity(self.param_count());
        flat.extend_from_slice(g_w1.data());
        flat.extend_from_slice(&g_b1);
        flat.extend_from_slice(g_w2.data());
        flat.extend_from_slice(&g_b2);
        Ok((total, flat))
    }

    pub fn param_count(&self) -> usize {
        self.w1.data().len() + self.b1.len() + self.w2.data().len() + self.b2.len()
    }

    pub fn params_flat(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend_from_slice(self.w1.data());
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(self.w2.data());
        out.extend_from_slice(&self.b2);
        out
    }

    pub fn set_params_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::DimMismatch("mlp flat parameter length".into()));
        }
        let mut offset = 0;
        let mut take = |dst: &mut [T]| {
            dst.copy_from_slice(&flat[offset..offset + dst.len()]);
            offset += dst.len();
        };
        take(self.w1.data_mut());
        take(&mut self.b1);
        take(self.w2.data_mut());
        take(&mut self.b2);
        Ok(())
    }
}

/// Fits the mapper by minibatch Adam on summed squared error. `u_src` and
/// `u_dst` hold users as columns; deterministic per config seed.
pub fn mlp_fit<T: Scalar>(
    u_src: &Matrix<T>,
    u_dst: &Matrix<T>,
    hidden: usize,
    cfg: &TrainConfig<T>,
) -> Result<MlpMapper<T>> {
    if u_src.cols() != u_dst.cols() {
        return Err(Error::DimMismatch(format!(
            "mlp_fit: {} vs {} users",
            u_src.cols(),
            u_dst.cols()
        )));
    }
    if u_src.cols() == 0 {
        return Err(Error::EmptyInput("mlp_fit without users".into()));
    }
    if hidden == 0 {
        return Err(Error::InvalidConfig("mlp hidden size must be >= 1".into()));
    }

    let n = u_src.cols();
    let pairs: Vec<(Vec<T>, Vec<T>)> = (0..n).map(|c| (u_src.column(c), u_dst.column(c))).collect();

    let root = RngStream::new(cfg.seed);
    let mut init_rng = root.derive("mlp_init");
    let s = cfg.init_scale.to_f64();
    let mut draw =
        |rows: usize, cols: usize| Matrix::from_fn(rows, cols, |_, _| T::from_f64(init_rng.uniform(-s, s)));
    let mut model = MlpMapper {
        w1: draw(hidden, u_src.rows()),
        b1: vec![T::zero(); hidden],
        w2: draw(u_dst.rows(), hidden),
        b2: vec![T::zero(); u_dst.rows()],
        loss_trace: Vec::new(),
    };

    let mut adam = AdamState::new(model.param_count(), cfg.adam);
    let mut shuffle_rng = root.derive("mlp_shuffle");
    let mut order: Vec<usize> = (0..n).collect();
    let mut batch: Vec<(Vec<T>, Vec<T>)> = Vec::with_capacity(cfg.batch_size);

    for epoch in 0..cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut epoch_loss = T::zero();
        for chunk in order.chunks(cfg.batch_size.max(1)) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| pairs[i].clone()));
            let (loss, grad) = model.loss_and_grad(&batch)?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    step: epoch,
                    msg: format!("mlp batch loss became {loss}"),
                });
            }
            epoch_loss += loss;
            let mut flat = model.params_flat();
            adam.update(&mut flat, &grad)?;
            model.set_params_flat(&flat)?;
        }
        model.loss_trace.push(epoch_loss / T::from_f64(n as f64));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::numerical_gradient;

    #[test]
    fn zero_final_layer_means_constant_predictions() {
        let mut rng = RngStream::new(2);
        let w1 = Matrix::from_fn(4, 3, |_, _| rng.uniform(-0.5, 0.5));
        let model = MlpMapper::from_parts(
            w1,
            vec![0.1, -0.2, 0.3, 0.0],
            Matrix::<f64>::zeros(2, 4),
            vec![0.7, -0.4],
        )
        .unwrap();
        let a = model.predict(&[0.1, 0.2, 0.7]).unwrap();
        let b = model.predict(&[0.9, 0.05, 0.05]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, vec![0.7, -0.4]);
    }

    #[test]
    fn single_hidden_unit_hand_case() {
        // one input, one hidden sigmoid, one linear output
        let model = MlpMapper::from_parts(
            Matrix::from_vec(1, 1, vec![2.0]).unwrap(),
            vec![-0.5],
            Matrix::from_vec(1, 1, vec![3.0]).unwrap(),
            vec![0.25],
        )
        .unwrap();
        let x = 0.4f64;
        let h = 1.0 / (1.0 + (-(2.0 * x - 0.5)).exp());
        let expect = 3.0 * h + 0.25;
        let got = model.predict(&[x]).unwrap()[0];
        assert!((got - expect).abs() < 1e-12);

        let again = model.predict(&[x]).unwrap()[0];
        assert_eq!(got.to_bits(), again.to_bits());
    }

    #[test]
    fn gradient_matches_finite_differences_on_small_toy() {
        let mut rng = RngStream::new(14);
        let w1 = Matrix::from_fn(3, 4, |_, _| rng.uniform(-0.6, 0.6));
        let w2 = Matrix::from_fn(2, 3, |_, _| rng.uniform(-0.6, 0.6));
        let model = MlpMapper::from_parts(
            w1,
            vec![0.1, -0.1, 0.2],
            w2,
            vec![0.0, 0.3],
        )
        .unwrap();
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..5)
            .map(|_| {
                (
                    (0..4).map(|_| rng.uniform(0.0, 1.0)).collect(),
                    (0..2).map(|_| rng.uniform(0.0, 1.0)).collect(),
                )
            })
            .collect();

        let (_, analytic) = model.loss_and_grad(&pairs).unwrap();
        let numeric = numerical_gradient(
            |flat| {
                let mut probe = model.clone();
                probe.set_params_flat(flat).unwrap();
                probe.loss(&pairs).unwrap()
            },
            &model.params_flat(),
            1e-5,
        )
        .unwrap();
        let max_num = numeric.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let max_diff = analytic
            .iter()
            .zip(&numeric)
            .fold(0.0f64, |a, (&x, &y)| a.max((x - y).abs()));
        assert!(max_diff / max_num.max(1e-12) < 1e-6);
    }

    #[test]
    fn fitting_identity_reduces_mse_by_ninety_percent() {
        let mut rng = RngStream::new(55);
        let dim = 4;
        let u = Matrix::from_fn(dim, 50, |_, _| rng.uniform(0.0, 1.0));
        let cfg = TrainConfig {
            epochs: 300,
            batch_size: 10,
            adam: crate::numerics::AdamConfig {
                learning_rate: 0.01,
                ..Default::default()
            },
            seed: 3,
            ..TrainConfig::default()
        };
        let model = mlp_fit(&u, &u, 16, &cfg).unwrap();
        let first = model.loss_trace[0];
        let last = *model.loss_trace.last().unwrap();
        assert!(
            last < 0.1 * first,
            "train loss went {first} -> {last}, less than 10x reduction"
        );
    }

    #[test]
    fn fit_is_seed_deterministic() {
        let mut rng = RngStream::new(66);
        let u_src = Matrix::from_fn(3, 20, |_, _| rng.uniform(0.0, 1.0));
        let u_dst = Matrix::from_fn(2, 20, |_, _| rng.uniform(0.0, 1.0));
        let cfg = TrainConfig { epochs: 10, batch_size: 8, ..TrainConfig::default() };
        let a = mlp_fit(&u_src, &u_dst, 5, &cfg).unwrap();
        let b = mlp_fit(&u_src, &u_dst, 5, &cfg).unwrap();
        let bits = |m: &MlpMapper<f64>| m.params_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
