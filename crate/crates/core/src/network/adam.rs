use super::params::{Gradients, Parameters, Tensor};
use crate::error::{Error, Result};

/// Bias-corrected Adam with moments kept in `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl AdamState {
    /// Default hyper-parameters (β₁ 0.9, β₂ 0.999, ε 1e-8) with the given
    /// learning rate.
    pub fn new(tensors: &[Tensor], lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first: tensors.iter().map(|t| vec![0.0; t.len()]).collect(),
            second: tensors.iter().map(|t| vec![0.0; t.len()]).collect(),
        }
    }

    pub fn for_parameters(params: &Parameters, lr: f64) -> Self {
        Self::new(params.tensors(), lr)
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// One update of `tensors` in place.
    pub fn update(&mut self, tensors: &mut [Tensor], grads: &[Vec<f64>]) -> Result<()> {
        if tensors.len() != grads.len()
            || tensors.len() != self.first.len()
            || tensors.iter().zip(grads).zip(&self.first).any(|((t, g), m)| t.len() != g.len() || t.len() != m.len())
        {
            return Err(Error::ShapeMismatch("gradients, parameters and moments disagree".into()));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for ((tensor, g), (m, v)) in tensors
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
        {
            for i in 0..g.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                let w = tensor.data[i] as f64 - self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
                tensor.data[i] = w as f32;
            }
        }
        Ok(())
    }
}

pub fn adam_step(params: &mut Parameters, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    state.update(params.tensors_mut(), &grads.tensors)
}
