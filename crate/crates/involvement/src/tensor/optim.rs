//! AdamW with decoupled weight decay, and the step learning-rate schedule.

use std::collections::BTreeMap;

use super::array::Tensor;
use super::params::ParamStore;
use super::TensorError;

/// AdamW: bias-corrected first/second moments with weight decay applied to
/// the parameter directly rather than folded into the gradient.
pub struct AdamW {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    step: u64,
    moments: BTreeMap<String, (Tensor, Tensor)>,
}

impl AdamW {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            step: 0,
            moments: BTreeMap::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Apply one update to every trainable parameter. Errors if a trainable
    /// parameter has no gradient.
    pub fn step(&mut self, store: &mut ParamStore) -> Result<(), TensorError> {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (path, param) in store.iter_mut() {
            if !param.trainable {
                continue;
            }
            let grad = param
                .grad
                .clone()
                .ok_or_else(|| TensorError::MissingGrad(path.to_string()))?;
            let (rows, cols) = param.value.shape();
            let (m, v) = self
                .moments
                .entry(path.to_string())
                .or_insert_with(|| (Tensor::zeros(rows, cols), Tensor::zeros(rows, cols)));
            debug_assert_eq!(m.shape(), param.value.shape());
            for i in 0..param.value.data.len() {
                let g = grad.data[i];
                m.data[i] = self.beta1 * m.data[i] + (1.0 - self.beta1) * g;
                v.data[i] = self.beta2 * v.data[i] + (1.0 - self.beta2) * g * g;
                let m_hat = m.data[i] / bc1;
                let v_hat = v.data[i] / bc2;
                // Decoupled decay acts on the parameter itself.
                param.value.data[i] -= self.lr * self.weight_decay * param.value.data[i];
                param.value.data[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

/// Step decay schedule: `base_lr * gamma^floor(epoch / step_size)`.
pub fn steplr(epoch: u32, base_lr: f64, step_size: u32, gamma: f64) -> f64 {
    base_lr * gamma.powi((epoch / step_size) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store_with(value: f64, grad: Option<f64>) -> ParamStore {
        let mut store = ParamStore::new();
        store.insert("w", Tensor::scalar(value), true);
        if let Some(g) = grad {
            store.get_mut("w").unwrap().grad = Some(Tensor::scalar(g));
        }
        store
    }

    #[test]
    fn first_step_hand_trace() {
        // w=1, g=1, lr=0.1, wd=0: m_hat = v_hat = 1, update = lr * 1/(1+eps).
        let mut store = store_with(1.0, Some(1.0));
        let mut opt = AdamW::new(0.1, 0.0);
        opt.step(&mut store).unwrap();
        let w = store.value("w").unwrap().data[0];
        let expected = 1.0 - 0.1 * (1.0 / (1.0 + 1e-8));
        assert!((w - expected).abs() < 1e-12, "w = {w}");
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn zero_grad_zero_decay_is_identity() {
        let mut store = store_with(0.7, Some(0.0));
        let mut opt = AdamW::new(0.1, 0.0);
        opt.step(&mut store).unwrap();
        assert_eq!(store.value("w").unwrap().data[0], 0.7);
    }

    #[test]
    fn decoupled_decay_shrinks_param() {
        let mut store = store_with(2.0, Some(0.0));
        let mut opt = AdamW::new(0.1, 0.01);
        opt.step(&mut store).unwrap();
        let w = store.value("w").unwrap().data[0];
        assert!((w - (2.0 - 0.1 * 0.01 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn lr_zero_is_identity() {
        let mut store = store_with(1.5, Some(3.0));
        let mut opt = AdamW::new(0.0, 0.1);
        opt.step(&mut store).unwrap();
        assert_eq!(store.value("w").unwrap().data[0], 1.5);
    }

    #[test]
    fn missing_grad_is_error() {
        let mut store = store_with(1.0, None);
        let mut opt = AdamW::new(0.1, 0.0);
        assert!(matches!(
            opt.step(&mut store),
            Err(TensorError::MissingGrad(_))
        ));
    }

    #[test]
    fn frozen_params_untouched() {
        let mut store = ParamStore::new();
        store.insert("w", Tensor::scalar(1.0), false);
        let mut opt = AdamW::new(0.1, 0.1);
        opt.step(&mut store).unwrap();
        assert_eq!(store.value("w").unwrap().data[0], 1.0);
    }

    #[test]
    fn steplr_schedule() {
        assert_eq!(steplr(0, 1e-3, 5, 0.5), 1e-3);
        assert_eq!(steplr(4, 1e-3, 5, 0.5), 1e-3);
        assert_eq!(steplr(5, 1e-3, 5, 0.5), 5e-4);
        assert!((steplr(29, 1e-3, 5, 0.5) - 3.125e-5).abs() < 1e-18);
    }
}
