//! Dense 2-D tensors with reverse-mode automatic differentiation, plus the
//! AdamW optimizer and step learning-rate schedule used by the trainers.
//!
//! Values are 64-bit throughout. Scalars are `1x1` tensors, vectors are
//! `1xn` row vectors. A [`tape::Tape`] records one forward pass; gradients
//! flow back through [`tape::Tape::backward`] and are harvested into a
//! [`params::ParamStore`] via [`params::Binding`].

pub mod array;
pub mod optim;
pub mod params;
pub mod tape;

pub use array::Tensor;
pub use optim::{steplr, AdamW};
pub use params::{Binding, Param, ParamStore};
pub use tape::{NodeId, Tape};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch in {op}: lhs {lhs:?}, rhs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },
    #[error("backward requires a scalar loss, got shape {0:?}")]
    NotScalar((usize, usize)),
    #[error("parameter {0} has no gradient")]
    MissingGrad(String),
    #[error("unknown parameter path {0}")]
    UnknownParam(String),
}
