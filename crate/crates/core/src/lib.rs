//! Small dense-tensor autodiff core: f64 2-D tensors, a define-by-run tape
//! with reverse-mode differentiation, Adam, and finite-difference checking.
//!
//! Sized for two-layer graph convolutions and two-layer MLPs; no GPU, no
//! broadcasting beyond row-vector bias, no higher-order derivatives.

pub mod adam;
pub mod gradcheck;
pub mod tape;
pub mod tensor;

pub use adam::{zero_grads, AdamState};
pub use tape::Tape;
pub use tensor::{Tensor, TensorError};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let mut tape = Tape::new();
        let eye = Tensor::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let a = Tensor::from_vec(2, 2, vec![3.0, -1.0, 2.5, 7.0]).unwrap();
        let out = tape.matmul(&eye, &a).unwrap();
        assert_eq!(out.to_vec(), a.to_vec());
    }

    #[test]
    fn matmul_zero() {
        let mut tape = Tape::new();
        let z = Tensor::zeros(2, 2);
        let a = Tensor::from_vec(2, 2, vec![3.0, -1.0, 2.5, 7.0]).unwrap();
        let out = tape.matmul(&z, &a).unwrap();
        assert!(out.to_vec().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matmul_direct() {
        let mut tape = Tape::new();
        let a = Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::from_vec(2, 2, vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let out = tape.matmul(&a, &b).unwrap();
        assert_eq!(out.to_vec(), vec![19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn matmul_shape_error() {
        let mut tape = Tape::new();
        let a = Tensor::zeros(2, 3);
        let b = Tensor::zeros(2, 3);
        assert!(matches!(tape.matmul(&a, &b), Err(TensorError::ShapeMismatch { .. })));
    }

    #[test]
    fn elementwise_trivials() {
        let mut tape = Tape::new();
        let x = Tensor::row(vec![-1.5]);
        assert_eq!(tape.relu(&x).unwrap().item().unwrap(), 0.0);
        let z = Tensor::row(vec![0.0]);
        assert_eq!(tape.tanh(&z).unwrap().item().unwrap(), 0.0);
        let one = Tensor::row(vec![1.0]);
        let e = tape.exp(&one).unwrap().item().unwrap();
        assert!((e - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn log_domain_error() {
        let mut tape = Tape::new();
        let x = Tensor::row(vec![0.0]);
        assert!(matches!(tape.log(&x), Err(TensorError::Domain(_))));
    }
}
