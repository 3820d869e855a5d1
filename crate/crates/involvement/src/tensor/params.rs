//! Named parameter storage and tape binding.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::array::Tensor;
use super::tape::{Gradients, NodeId, Tape};
use super::TensorError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Param {
    pub value: Tensor,
    #[serde(skip)]
    pub grad: Option<Tensor>,
    pub trainable: bool,
}

/// All learnable weights, keyed by a path like `"stack.head0.wq"`.
/// Iteration order is the lexicographic path order, which keeps
/// serialization and optimizer updates deterministic.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParamStore {
    params: BTreeMap<String, Param>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: impl Into<String>, value: Tensor, trainable: bool) {
        self.params.insert(
            path.into(),
            Param {
                value,
                grad: None,
                trainable,
            },
        );
    }

    /// Register a linear-layer weight initialized uniform in
    /// `(-1/sqrt(fan_in), 1/sqrt(fan_in))` from the given seed.
    pub fn insert_linear_init(
        &mut self,
        path: impl Into<String>,
        rows: usize,
        cols: usize,
        fan_in: usize,
        seed: u64,
    ) {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect();
        self.insert(path, Tensor::from_vec(rows, cols, data), true);
    }

    pub fn get(&self, path: &str) -> Result<&Param, TensorError> {
        self.params
            .get(path)
            .ok_or_else(|| TensorError::UnknownParam(path.to_string()))
    }

    pub fn get_mut(&mut self, path: &str) -> Result<&mut Param, TensorError> {
        self.params
            .get_mut(path)
            .ok_or_else(|| TensorError::UnknownParam(path.to_string()))
    }

    pub fn value(&self, path: &str) -> Result<&Tensor, TensorError> {
        Ok(&self.get(path)?.value)
    }

    pub fn contains(&self, path: &str) -> bool {
        self.params.contains_key(path)
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Param)> {
        self.params.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn zero_grad(&mut self) {
        for p in self.params.values_mut() {
            p.grad = None;
        }
    }

    /// Add a gradient contribution; repeated calls accumulate.
    pub fn accumulate_grad(&mut self, path: &str, grad: &Tensor) -> Result<(), TensorError> {
        let param = self.get_mut(path)?;
        match &mut param.grad {
            Some(existing) => *existing = existing.add(grad)?,
            slot @ None => *slot = Some(grad.clone()),
        }
        Ok(())
    }

    /// Mark every parameter under a path prefix as frozen or trainable.
    pub fn set_trainable_prefix(&mut self, prefix: &str, trainable: bool) {
        for (path, p) in self.params.iter_mut() {
            if path.starts_with(prefix) {
                p.trainable = trainable;
            }
        }
    }
}

/// Tracks which tape node each bound parameter occupies so gradients can be
/// harvested back into the store after `backward`.
#[derive(Default)]
pub struct Binding {
    bound: BTreeMap<String, NodeId>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert the parameter's current value as a tape input (memoized per path).
    pub fn bind(
        &mut self,
        tape: &mut Tape,
        store: &ParamStore,
        path: &str,
    ) -> Result<NodeId, TensorError> {
        if let Some(&id) = self.bound.get(path) {
            return Ok(id);
        }
        let id = tape.input(store.value(path)?.clone());
        self.bound.insert(path.to_string(), id);
        Ok(id)
    }

    /// Accumulate tape gradients for every bound parameter into the store.
    pub fn harvest(&self, grads: &Gradients, store: &mut ParamStore) -> Result<(), TensorError> {
        for (path, &id) in &self.bound {
            if let Some(g) = grads.get(id) {
                store.accumulate_grad(path, g)?;
            }
        }
        Ok(())
    }
}
