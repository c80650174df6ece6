//! Dense 2-D f64 tensors with shared storage and per-tensor gradient buffers.
//!
//! Every tensor is row-major `[rows, cols]`; scalars are `[1, 1]` and row
//! vectors `[1, n]`. Data is immutable during a forward/backward pass; the
//! only mutation doors are `set_data` (optimizer updates between tapes) and
//! the gradient buffer.

use std::cell::{Ref, RefCell};
use std::fmt;
use std::rc::Rc;

/// Errors raised by tensor construction and tape operations.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorError {
    /// Operand shapes are incompatible for the requested operation.
    ShapeMismatch { op: &'static str, lhs: Vec<usize>, rhs: Vec<usize> },
    /// An input value is outside the operation's domain (e.g. log of x <= 0).
    Domain(String),
    /// A caller broke an API contract (non-scalar loss, missing grad, reused tape).
    Contract(String),
}

impl fmt::Display for TensorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorError::ShapeMismatch { op, lhs, rhs } => {
                write!(f, "shape mismatch in {op}: {lhs:?} vs {rhs:?}")
            }
            TensorError::Domain(msg) => write!(f, "domain error: {msg}"),
            TensorError::Contract(msg) => write!(f, "contract violation: {msg}"),
        }
    }
}

impl std::error::Error for TensorError {}

pub(crate) struct Inner {
    shape: [usize; 2],
    data: RefCell<Vec<f64>>,
    requires_grad: bool,
    grad: RefCell<Option<Vec<f64>>>,
}

/// A shared handle to a 2-D tensor. Cloning is shallow.
#[derive(Clone)]
pub struct Tensor {
    inner: Rc<Inner>,
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("shape", &self.inner.shape)
            .field("requires_grad", &self.inner.requires_grad)
            .field("data", &*self.inner.data.borrow())
            .finish()
    }
}

impl Tensor {
    fn build(shape: [usize; 2], data: Vec<f64>, requires_grad: bool) -> Result<Self, TensorError> {
        if shape[0] * shape[1] != data.len() {
            return Err(TensorError::ShapeMismatch {
                op: "construct",
                lhs: shape.to_vec(),
                rhs: vec![data.len()],
            });
        }
        Ok(Tensor {
            inner: Rc::new(Inner {
                shape,
                data: RefCell::new(data),
                requires_grad,
                grad: RefCell::new(None),
            }),
        })
    }

    /// Constant tensor (not tracked by the tape).
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        Self::build([rows, cols], data, false)
    }

    /// Trainable leaf: participates in gradient accumulation.
    pub fn param(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        Self::build([rows, cols], data, true)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::build([rows, cols], vec![0.0; rows * cols], false).unwrap()
    }

    pub fn scalar(v: f64) -> Self {
        Self::build([1, 1], vec![v], false).unwrap()
    }

    /// Row vector `[1, n]`.
    pub fn row(data: Vec<f64>) -> Self {
        Self::build([1, data.len()], data, false).unwrap()
    }

    pub fn rows(&self) -> usize {
        self.inner.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.inner.shape[1]
    }

    pub fn shape(&self) -> [usize; 2] {
        self.inner.shape
    }

    pub fn numel(&self) -> usize {
        self.inner.shape[0] * self.inner.shape[1]
    }

    pub fn requires_grad(&self) -> bool {
        self.inner.requires_grad
    }

    pub fn data(&self) -> Ref<'_, Vec<f64>> {
        self.inner.data.borrow()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.inner.data.borrow().clone()
    }

    /// Scalar extraction; contract error unless shape is `[1, 1]`.
    pub fn item(&self) -> Result<f64, TensorError> {
        if self.numel() != 1 {
            return Err(TensorError::Contract(format!(
                "item() on tensor of shape {:?}",
                self.inner.shape
            )));
        }
        Ok(self.inner.data.borrow()[0])
    }

    pub fn is_finite(&self) -> bool {
        self.inner.data.borrow().iter().all(|v| v.is_finite())
    }

    /// Identity of the underlying storage; used to match leaves across a tape.
    pub fn id(&self) -> usize {
        Rc::as_ptr(&self.inner) as usize
    }

    /// Replace the stored values. Intended for optimizer steps between tapes;
    /// never call while a tape referencing this tensor is still alive.
    pub fn set_data(&self, data: Vec<f64>) -> Result<(), TensorError> {
        if data.len() != self.numel() {
            return Err(TensorError::ShapeMismatch {
                op: "set_data",
                lhs: self.inner.shape.to_vec(),
                rhs: vec![data.len()],
            });
        }
        *self.inner.data.borrow_mut() = data;
        Ok(())
    }

    pub fn grad(&self) -> Option<Vec<f64>> {
        self.inner.grad.borrow().clone()
    }

    pub fn zero_grad(&self) {
        *self.inner.grad.borrow_mut() = None;
    }

    /// Add a contribution into the gradient buffer, allocating it on first use.
    pub fn accumulate_grad(&self, contrib: &[f64]) {
        debug_assert_eq!(contrib.len(), self.numel());
        let mut slot = self.inner.grad.borrow_mut();
        match slot.as_mut() {
            Some(g) => {
                for (gi, ci) in g.iter_mut().zip(contrib) {
                    *gi += ci;
                }
            }
            None => *slot = Some(contrib.to_vec()),
        }
    }

    /// Deep copy with fresh storage (gradients are not copied).
    pub fn deep_clone(&self) -> Tensor {
        Tensor::build(self.inner.shape, self.to_vec(), self.inner.requires_grad).unwrap()
    }
}
