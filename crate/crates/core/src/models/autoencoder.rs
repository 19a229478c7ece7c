//! Partially-connected multi-modal autoencoder.
//!
//! Both platform inputs feed one hidden layer split into `[h_t | h_c | h_y]`.
//! Binary masks cut the links from the first platform's input into `h_y`,
//! from the second platform's input into `h_t`, and symmetrically from each
//! platform-specific block into the other platform's reconstruction. The
//! platform-specific blocks absorb interests that do not transfer, leaving
//! the shared block to carry the cross-platform association. With
//! `m_t = m_y = 0` the masks are all ones and the model reduces to the plain
//! fully-connected variant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{l1_norm, sigmoid, AdamState, Matrix, RngStream};
use crate::repr::AugmentedExample;
use crate::scalar::Scalar;

use super::{Direction, TrainConfig};

/// Input dimensions and the three-way hidden split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutoencoderLayout {
    pub n_t: usize,
    pub n_y: usize,
    pub m_t: usize,
    pub m_c: usize,
    pub m_y: usize,
}

impl AutoencoderLayout {
    pub fn hidden(&self) -> usize {
        self.m_t + self.m_c + self.m_y
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_y == 0 {
            return Err(Error::InvalidConfig("input dims must be > 0".into()));
        }
        if self.hidden() == 0 {
            return Err(Error::InvalidConfig("hidden layer must be non-empty".into()));
        }
        Ok(())
    }

    /// Hidden indices reserved for the first platform.
    pub fn h_t_range(&self) -> std::ops::Range<usize> {
        0..self.m_t
    }

    /// Hidden indices of the shared block.
    pub fn h_c_range(&self) -> std::ops::Range<usize> {
        self.m_t..self.m_t + self.m_c
    }

    /// Hidden indices reserved for the second platform.
    pub fn h_y_range(&self) -> std::ops::Range<usize> {
        self.m_t + self.m_c..self.hidden()
    }
}

/// Binary masks, one per weight matrix. Entries are exactly 0 or 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSet<T> {
    pub w1_t: Matrix<T>,
    pub w1_y: Matrix<T>,
    pub w2_t: Matrix<T>,
    pub w2_y: Matrix<T>,
}

/// Masks implementing the link cutting: no path from either input into the
/// other platform's hidden block, and none from a platform-specific block
/// into the other platform's reconstruction. Biases stay unmasked.
pub fn build_mask<T: Scalar>(layout: &AutoencoderLayout) -> MaskSet<T> {
    let m = layout.hidden();
    let one = T::one();
    let zero = T::zero();
    let h_t = layout.h_t_range();
    let h_y = layout.h_y_range();

    MaskSet {
        // Encoder rows indexed by hidden unit.
        w1_t: Matrix::from_fn(m, layout.n_t, |r, _| if h_y.contains(&r) { zero } else { one }),
        w1_y: Matrix::from_fn(m, layout.n_y, |r, _| if h_t.contains(&r) { zero } else { one }),
        // Decoder columns indexed by hidden unit.
        w2_t: Matrix::from_fn(layout.n_t, m, |_, c| if h_y.contains(&c) { zero } else { one }),
        w2_y: Matrix::from_fn(layout.n_y, m, |_, c| if h_t.contains(&c) { zero } else { one }),
    }
}

fn apply_mask<T: Scalar>(w: &mut Matrix<T>, mask: &Matrix<T>) {
    for (v, m) in w.data_mut().iter_mut().zip(mask.data()) {
        if *m == T::zero() {
            *v = T::zero();
        }
    }
}

/// Hidden activations and both reconstructions for one example.
#[derive(Debug, Clone)]
pub struct ForwardPass<T> {
    pub hidden: Vec<T>,
    pub recon_t: Vec<T>,
    pub recon_y: Vec<T>,
}

/// Gradients with the same shapes as the parameters.
#[derive(Debug, Clone)]
pub struct AeGradients<T> {
    pub w1_t: Matrix<T>,
    pub w1_y: Matrix<T>,
    pub w2_t: Matrix<T>,
    pub w2_y: Matrix<T>,
    pub b1: Vec<T>,
    pub b2_t: Vec<T>,
    pub b2_y: Vec<T>,
}

impl<T: Scalar> AeGradients<T> {
    fn zeros(layout: &AutoencoderLayout) -> Self {
        let m = layout.hidden();
        Self {
            w1_t: Matrix::zeros(m, layout.n_t),
            w1_y: Matrix::zeros(m, layout.n_y),
            w2_t: Matrix::zeros(layout.n_t, m),
            w2_y: Matrix::zeros(layout.n_y, m),
            b1: vec![T::zero(); m],
            b2_t: vec![T::zero(); layout.n_t],
            b2_y: vec![T::zero(); layout.n_y],
        }
    }

    /// Flattens in the same order as [`MaskedAutoencoder::params_flat`].
    pub fn to_flat(&self) -> Vec<T> {
        let mut out = Vec::new();
        out.extend_from_slice(self.w1_t.data());
        out.extend_from_slice(self.w1_y.data());
        out.extend_from_slice(self.w2_t.data());
        out.extend_from_slice(self.w2_y.data());
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.b2_t);
        out.extend_from_slice(&self.b2_y);
        out
    }
}

/// The masked multi-modal autoencoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskedAutoencoder<T> {
    pub layout: AutoencoderLayout,
    pub w1_t: Matrix<T>,
    pub w1_y: Matrix<T>,
    pub w2_t: Matrix<T>,
    pub w2_y: Matrix<T>,
    pub b1: Vec<T>,
    pub b2_t: Vec<T>,
    pub b2_y: Vec<T>,
    pub masks: MaskSet<T>,
    pub lambda: T,
    pub mu: T,
    /// Mean per-example training loss after each epoch.
    pub loss_trace: Vec<T>,
}

impl<T: Scalar> MaskedAutoencoder<T> {
    /// Fresh model with uniform `[-init_scale, init_scale]` weights, zero
    /// biases, and masks applied.
    pub fn init(
        layout: AutoencoderLayout,
        lambda: T,
        mu: T,
        init_scale: T,
        rng: &mut RngStream,
    ) -> Result<Self> {
        layout.validate()?;
        let m = layout.hidden();
        let s = init_scale.to_f64();
        let mut draw = |rows: usize, cols: usize| {
            Matrix::from_fn(rows, cols, |_, _| T::from_f64(rng.uniform(-s, s)))
        };
        let mut model = Self {
            w1_t: draw(m, layout.n_t),
            w1_y: draw(m, layout.n_y),
            w2_t: draw(layout.n_t, m),
            w2_y: draw(layout.n_y, m),
            b1: vec![T::zero(); m],
            b2_t: vec![T::zero(); layout.n_t],
            b2_y: vec![T::zero(); layout.n_y],
            masks: build_mask(&layout),
            layout,
            lambda,
            mu,
            loss_trace: Vec::new(),
        };
        model.enforce_masks();
        Ok(model)
    }

    /// Zeroes every parameter at a mask-zero position.
    pub fn enforce_masks(&mut self) {
        apply_mask(&mut self.w1_t, &self.masks.w1_t);
        apply_mask(&mut self.w1_y, &self.masks.w1_y);
        apply_mask(&mut self.w2_t, &self.masks.w2_t);
        apply_mask(&mut self.w2_y, &self.masks.w2_y);
    }

    /// True when every mask-zero parameter is exactly zero.
    pub fn masks_hold(&self) -> bool {
        let ok = |w: &Matrix<T>, m: &Matrix<T>| {
            w.data()
                .iter()
                .zip(m.data())
                .all(|(v, mk)| *mk != T::zero() || *v == T::zero())
        };
        ok(&self.w1_t, &self.masks.w1_t)
            && ok(&self.w1_y, &self.masks.w1_y)
            && ok(&self.w2_t, &self.masks.w2_t)
            && ok(&self.w2_y, &self.masks.w2_y)
    }

    fn check_input_dims(&self, x_t: &[T], x_y: &[T]) -> Result<()> {
        if x_t.len() != self.layout.n_t || x_y.len() != self.layout.n_y {
            return Err(Error::DimMismatch(format!(
                "autoencoder inputs ({}, {}) vs layout ({}, {})",
                x_t.len(),
                x_y.len(),
                self.layout.n_t,
                self.layout.n_y
            )));
        }
        Ok(())
    }

    /// Encoder + decoder pass. Masked weights are stored as exact zeros, so
    /// the plain matrix products respect the cut links.
    pub fn forward(&self, x_t: &[T], x_y: &[T]) -> Result<ForwardPass<T>> {
        self.check_input_dims(x_t, x_y)?;
        let mut pre = self.w1_t.matvec(x_t)?;
        let from_y = self.w1_y.matvec(x_y)?;
        for ((p, q), b) in pre.iter_mut().zip(from_y).zip(&self.b1) {
            *p = *p + q + *b;
        }
        let hidden: Vec<T> = pre.into_iter().map(sigmoid).collect();
        let (recon_t, recon_y) = self.decode(&hidden)?;
        Ok(ForwardPass { hidden, recon_t, recon_y })
    }

    /// Decodes reconstructions for both platforms from a hidden vector.
    pub fn decode(&self, hidden: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        if hidden.len() != self.layout.hidden() {
            return Err(Error::DimMismatch("hidden vector length".into()));
        }
        let mut a_t = self.w2_t.matvec(hidden)?;
        for (a, b) in a_t.iter_mut().zip(&self.b2_t) {
            *a += *b;
        }
        let mut a_y = self.w2_y.matvec(hidden)?;
        for (a, b) in a_y.iter_mut().zip(&self.b2_y) {
            *a += *b;
        }
        Ok((
            a_t.into_iter().map(sigmoid).collect(),
            a_y.into_iter().map(sigmoid).collect(),
        ))
    }

    fn weight_decay_term(&self) -> T {
        self.w1_t.frobenius_norm_sq()
            + self.w1_y.frobenius_norm_sq()
            + self.w2_t.frobenius_norm_sq()
            + self.w2_y.frobenius_norm_sq()
    }

    /// Batch loss: squared reconstruction error against the real targets for
    /// both platforms plus the hidden L1 penalty, summed over examples, plus
    /// one weight-decay term over the four weight matrices.
    pub fn loss(&self, batch: &[AugmentedExample<T>]) -> Result<T> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("loss over empty batch".into()));
        }
        let mut total = T::zero();
        for ex in batch {
            let pass = self.forward(&ex.input_t, &ex.input_y)?;
            total += sq_err(&pass.recon_t, &ex.target_t)?;
            total += sq_err(&pass.recon_y, &ex.target_y)?;
            total += self.mu * l1_norm(&pass.hidden);
        }
        Ok(total + self.lambda * self.weight_decay_term())
    }

    /// Fused forward + backward for one example, accumulating into `grads`.
    /// Returns the example's loss terms (reconstruction + hidden L1).
    fn accumulate_example(
        &self,
        ex: &AugmentedExample<T>,
        grads: &mut AeGradients<T>,
        scratch: &mut TrainScratch<T>,
    ) -> T {
        let one = T::one();
        let two = T::from_f64(2.0);

        // Encoder.
        self.w1_t.matvec_into(&ex.input_t, &mut scratch.hidden);
        self.w1_y.matvec_transpose_acc_dummy(); // keeps clippy quiet about unused imports
        self.w1_y_matvec_add(&ex.input_y, &mut scratch.hidden);
        for (h, b) in scratch.hidden.iter_mut().zip(&self.b1) {
            *h = sigmoid(*h + *b);
        }

        // Decoder and output deltas.
        let mut loss = T::zero();
        self.w2_t.matvec_into(&scratch.hidden, &mut scratch.delta_t);
        for ((d, b), t) in scratch.delta_t.iter_mut().zip(&self.b2_t).zip(&ex.target_t) {
            let r = sigmoid(*d + *b);
            let err = r - *t;
            loss += err * err;
            *d = two * err * r * (one - r);
        }
        self.w2_y.matvec_into(&scratch.hidden, &mut scratch.delta_y);
        for ((d, b), t) in scratch.delta_y.iter_mut().zip(&self.b2_y).zip(&ex.target_y) {
            let r = sigmoid(*d + *b);
            let err = r - *t;
            loss += err * err;
            *d = two * err * r * (one - r);
        }
        loss += self.mu * l1_norm(&scratch.hidden);

        grads.w2_t.add_outer(&scratch.delta_t, &scratch.hidden, one);
        grads.w2_y.add_outer(&scratch.delta_y, &scratch.hidden, one);
        for (b, d) in grads.b2_t.iter_mut().zip(&scratch.delta_t) {
            *b += *d;
        }
        for (b, d) in grads.b2_y.iter_mut().zip(&scratch.delta_y) {
            *b += *d;
        }

        // Backprop into the hidden layer, including the L1 subgradient
        // (taken as 0 at exactly 0).
        scratch.back.iter_mut().for_each(|v| *v = T::zero());
        self.w2_t.matvec_transpose_acc(&scratch.delta_t, &mut scratch.back);
        self.w2_y.matvec_transpose_acc(&scratch.delta_y, &mut scratch.back);
        for (bk, &h) in scratch.back.iter_mut().zip(scratch.hidden.iter()) {
            let l1 = if h > T::zero() {
                self.mu
            } else if h < T::zero() {
                -self.mu
            } else {
                T::zero()
            };
            *bk = (*bk + l1) * h * (one - h);
        }

        grads.w1_t.add_outer(&scratch.back, &ex.input_t, one);
        grads.w1_y.add_outer(&scratch.back, &ex.input_y, one);
        for (b, d) in grads.b1.iter_mut().zip(&scratch.back) {
            *b += *d;
        }
        loss
    }

    /// Weight-decay gradient and masking applied once per batch.
    fn finalize_batch_grads(&self, g: &mut AeGradients<T>) {
        let decay = T::from_f64(2.0) * self.lambda;
        for (gw, w) in [
            (&mut g.w1_t, &self.w1_t),
            (&mut g.w1_y, &self.w1_y),
            (&mut g.w2_t, &self.w2_t),
            (&mut g.w2_y, &self.w2_y),
        ] {
            for (gv, wv) in gw.data_mut().iter_mut().zip(w.data()) {
                *gv += decay * *wv;
            }
        }
        apply_mask(&mut g.w1_t, &self.masks.w1_t);
        apply_mask(&mut g.w1_y, &self.masks.w1_y);
        apply_mask(&mut g.w2_t, &self.masks.w2_t);
        apply_mask(&mut g.w2_y, &self.masks.w2_y);
    }

    /// Analytic gradient of [`loss`](Self::loss); entries at mask-zero
    /// positions are forced to exactly zero. Also returns the batch loss.
    pub fn loss_and_grad(&self, batch: &[AugmentedExample<T>]) -> Result<(T, AeGradients<T>)> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("gradient over empty batch".into()));
        }
        for ex in batch {
            if ex.input_t.len() != self.layout.n_t || ex.input_y.len() != self.layout.n_y {
                return Err(Error::DimMismatch("example dims vs layout".into()));
            }
        }
        let mut g = AeGradients::zeros(&self.layout);
        let mut scratch = TrainScratch::new(&self.layout);
        let mut total = T::zero();
        for ex in batch {
            total += self.accumulate_example(ex, &mut g, &mut scratch);
        }
        self.finalize_batch_grads(&mut g);
        Ok((total + self.lambda * self.weight_decay_term(), g))
    }

    /// Gradient of the batch loss, masked.
    pub fn grad(&self, batch: &[AugmentedExample<T>]) -> Result<AeGradients<T>> {
        Ok(self.loss_and_grad(batch)?.1)
    }

    pub fn param_count(&self) -> usize {
        let l = &self.layout;
        let m = l.hidden();
        m * l.n_t + m * l.n_y + l.n_t * m + l.n_y * m + m + l.n_t + l.n_y
    }

    /// Parameters flattened as `w1_t, w1_y, w2_t, w2_y, b1, b2_t, b2_y`.
    pub fn params_flat(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend_from_slice(self.w1_t.data());
        out.extend_from_slice(self.w1_y.data());
        out.extend_from_slice(self.w2_t.data());
        out.extend_from_slice(self.w2_y.data());
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.b2_t);
        out.extend_from_slice(&self.b2_y);
        out
    }

    /// Writes back a flat parameter vector and re-applies the masks, so
    /// mask-zero positions stay exactly zero whatever the input held.
    pub fn set_params_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::DimMismatch(format!(
                "flat parameter vector of len {}, expected {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        let mut take = |dst: &mut [T]| {
            dst.copy_from_slice(&flat[offset..offset + dst.len()]);
            offset += dst.len();
        };
        take(self.w1_t.data_mut());
        take(self.w1_y.data_mut());
        take(self.w2_t.data_mut());
        take(self.w2_y.data_mut());
        take(&mut self.b1);
        take(&mut self.b2_t);
        take(&mut self.b2_y);
        self.enforce_masks();
        Ok(())
    }

    /// Minibatch Adam training; deterministic per config seed.
    pub fn train(
        examples: &[AugmentedExample<T>],
        layout: AutoencoderLayout,
        cfg: &TrainConfig<T>,
    ) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::EmptyInput("training without examples".into()));
        }
        if cfg.epochs == 0 || cfg.batch_size == 0 {
            return Err(Error::InvalidConfig("epochs and batch_size must be >= 1".into()));
        }
        for ex in examples {
            if ex.input_t.len() != layout.n_t || ex.input_y.len() != layout.n_y {
                return Err(Error::DimMismatch("example dims vs layout".into()));
            }
        }

        let root = RngStream::new(cfg.seed);
        let mut init_rng = root.derive("ae_init");
        let mut model =
            Self::init(layout, cfg.lambda, cfg.mu, cfg.init_scale, &mut init_rng)?;
        let mut adam = AdamState::new(model.param_count(), cfg.adam);
        let mut shuffle_rng = root.derive("ae_shuffle");
        let n = examples.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut batch: Vec<AugmentedExample<T>> = Vec::with_capacity(cfg.batch_size);

        for epoch in 0..cfg.epochs {
            shuffle_rng.shuffle(&mut order);
            let mut epoch_loss = T::zero();
            for chunk in order.chunks(cfg.batch_size) {
                batch.clear();
                batch.extend(chunk.iter().map(|&i| examples[i].clone()));
                let (loss, grads) = model.loss_and_grad(&batch)?;
                if !loss.is_finite() {
                    return Err(Error::Diverged {
                        step: epoch,
                        msg: format!("batch loss became {loss}"),
                    });
                }
                epoch_loss += loss;
                let mut flat = model.params_flat();
                adam.update(&mut flat, &grads.to_flat())?;
                model.set_params_flat(&flat)?;
            }
            let mean = epoch_loss / T::from_f64(n as f64);
            if !mean.is_finite() {
                return Err(Error::Diverged {
                    step: epoch,
                    msg: format!("epoch mean loss became {mean}"),
                });
            }
            model.loss_trace.push(mean);
        }
        debug_assert!(model.masks_hold());
        Ok(model)
    }

    /// Cross-platform prediction: forward with the unknown platform's input
    /// replaced by `substitute`, returning the unknown platform's
    /// reconstruction.
    pub fn predict_cross(
        &self,
        known: &[T],
        direction: Direction,
        substitute: &[T],
    ) -> Result<Vec<T>> {
        match direction {
            Direction::TwitterToYoutube => {
                Ok(self.forward(known, substitute)?.recon_y)
            }
            Direction::YoutubeToTwitter => {
                Ok(self.forward(substitute, known)?.recon_t)
            }
        }
    }
}

fn sq_err<T: Scalar>(pred: &[T], target: &[T]) -> Result<T> {
    if pred.len() != target.len() {
        return Err(Error::DimMismatch("reconstruction vs target length".into()));
    }
    let mut s = T::zero();
    for (p, t) in pred.iter().zip(target) {
        let d = *p - *t;
        s += d * d;
    }
    Ok(s)
}
