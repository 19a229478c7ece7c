use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdamConfig<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Scalar> Default for AdamConfig<T> {
    fn default() -> Self {
        Self {
            learning_rate: T::from_f64(0.001),
            beta1: T::from_f64(0.9),
            beta2: T::from_f64(0.999),
            epsilon: T::from_f64(1e-8),
        }
    }
}

/// Per-parameter moment estimates plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    config: AdamConfig<T>,
    first_moment: Vec<T>,
    second_moment: Vec<T>,
    step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(param_count: usize, config: AdamConfig<T>) -> Self {
        Self {
            config,
            first_moment: vec![T::zero(); param_count],
            second_moment: vec![T::zero(); param_count],
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// One Adam update with bias correction, in place on `params`.
    ///
    /// A zero gradient coordinate with zero moments produces an exactly-zero
    /// step, so frozen (masked) parameters stay bit-identical.
    pub fn update(&mut self, params: &mut [T], grads: &[T]) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.first_moment.len() {
            return Err(Error::DimMismatch(format!(
                "adam update: params {}, grads {}, state {}",
                params.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        self.step += 1;
        let c = &self.config;
        let one = T::one();
        let bc1 = one - c.beta1.powi(self.step as i32);
        let bc2 = one - c.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            let m = c.beta1 * self.first_moment[i] + (one - c.beta1) * g;
            let v = c.beta2 * self.second_moment[i] + (one - c.beta2) * g * g;
            self.first_moment[i] = m;
            self.second_moment[i] = v;
            let m_hat = m / bc1;
            let v_hat = v / bc2;
            params[i] = params[i] - c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
        }
        Ok(())
    }
}
