//! Central finite-difference gradient checking.
//!
//! The numeric side perturbs raw parameter storage and re-runs the caller's
//! forward closure, so it is independent of the tape's gradient rules.

use crate::adam::zero_grads;
use crate::tape::Tape;
use crate::tensor::{Tensor, TensorError};

pub const DEFAULT_STEP: f64 = 1e-5;

/// Relative error between an analytic and a numeric derivative, guarded
/// against tiny denominators.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

/// Result of a gradient check: worst relative error and where it occurred.
#[derive(Debug, Clone)]
pub struct GradCheck {
    pub max_rel_err: f64,
    pub worst_param: usize,
    pub worst_coord: usize,
}

/// Compare tape gradients of `forward` against central finite differences on
/// every coordinate of every parameter. `forward` must rebuild the whole
/// computation from current parameter values and return the scalar loss.
pub fn check<E: From<TensorError>>(
    params: &[Tensor],
    step: f64,
    mut forward: impl FnMut(&mut Tape) -> Result<Tensor, E>,
) -> Result<GradCheck, E> {
    zero_grads(params);
    let mut tape = Tape::new();
    let loss = forward(&mut tape)?;
    tape.backward(&loss).map_err(E::from)?;
    let analytic: Vec<Vec<f64>> = params
        .iter()
        .map(|p| p.grad().unwrap_or_else(|| vec![0.0; p.numel()]))
        .collect();

    let mut report = GradCheck { max_rel_err: 0.0, worst_param: 0, worst_coord: 0 };
    for (pi, p) in params.iter().enumerate() {
        let base = p.to_vec();
        for ci in 0..base.len() {
            let mut bumped = base.clone();
            bumped[ci] = base[ci] + step;
            p.set_data(bumped.clone()).map_err(E::from)?;
            let hi = eval(&mut forward)?;
            bumped[ci] = base[ci] - step;
            p.set_data(bumped).map_err(E::from)?;
            let lo = eval(&mut forward)?;
            p.set_data(base.clone()).map_err(E::from)?;
            let numeric = (hi - lo) / (2.0 * step);
            let err = rel_err(analytic[pi][ci], numeric);
            if err > report.max_rel_err {
                report = GradCheck { max_rel_err: err, worst_param: pi, worst_coord: ci };
            }
        }
    }
    Ok(report)
}

fn eval<E: From<TensorError>>(
    forward: &mut impl FnMut(&mut Tape) -> Result<Tensor, E>,
) -> Result<f64, E> {
    let mut tape = Tape::new();
    let loss = forward(&mut tape)?;
    loss.item().map_err(E::from)
}

/// Plain central differences of a scalar function of a flat vector.
pub fn finite_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut buf = x.to_vec();
    for i in 0..x.len() {
        buf[i] = x[i] + step;
        let hi = f(&buf);
        buf[i] = x[i] - step;
        let lo = f(&buf);
        buf[i] = x[i];
        g[i] = (hi - lo) / (2.0 * step);
    }
    g
}
