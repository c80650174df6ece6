//! Gradient and optimizer contracts: closed-form backward cases, a
//! finite-difference oracle over a random 2-layer MLP, the tape-reuse
//! contract, and Adam against a hand-unrolled recursion.

use dgform_core::gradcheck;
use dgform_core::{zero_grads, AdamState, Tape, Tensor, TensorError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_tensor(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Tensor {
    let data: Vec<f64> = (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor::param(r, c, data).unwrap()
}

#[test]
fn backward_of_sum_is_ones() {
    let x = Tensor::param(2, 3, vec![1.0, -2.0, 3.0, 0.5, 4.0, -1.0]).unwrap();
    let mut tape = Tape::new();
    let loss = tape.sum(&x).unwrap();
    tape.backward(&loss).unwrap();
    assert_eq!(x.grad().unwrap(), vec![1.0; 6]);
}

#[test]
fn backward_of_half_squared_norm_is_x() {
    let vals = vec![1.0, -2.0, 3.0, 0.5];
    let x = Tensor::param(1, 4, vals.clone()).unwrap();
    let mut tape = Tape::new();
    let sq = tape.mul(&x, &x).unwrap();
    let s = tape.sum(&sq).unwrap();
    let loss = tape.scale(&s, 0.5).unwrap();
    tape.backward(&loss).unwrap();
    let g = x.grad().unwrap();
    for (gi, xi) in g.iter().zip(vals.iter()) {
        assert!((gi - xi).abs() < 1e-12);
    }
}

#[test]
fn non_scalar_loss_is_contract_error() {
    let x = Tensor::param(1, 2, vec![1.0, 2.0]).unwrap();
    let mut tape = Tape::new();
    let y = tape.relu(&x).unwrap();
    assert!(matches!(tape.backward(&y), Err(TensorError::Contract(_))));
}

#[test]
fn second_backward_on_same_tape_is_error() {
    let x = Tensor::param(1, 2, vec![1.0, 2.0]).unwrap();
    let mut tape = Tape::new();
    let loss = tape.sum(&x).unwrap();
    tape.backward(&loss).unwrap();
    assert!(matches!(tape.backward(&loss), Err(TensorError::Contract(_))));
}

/// Random 2-layer MLP: tape gradients vs central finite differences.
#[test]
fn mlp_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = Tensor::from_vec(3, 4, (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let target = Tensor::from_vec(3, 2, (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let w1 = rand_tensor(&mut rng, 4, 5);
    let b1 = rand_tensor(&mut rng, 1, 5);
    let w2 = rand_tensor(&mut rng, 5, 2);
    let b2 = rand_tensor(&mut rng, 1, 2);
    let params = [w1, b1, w2, b2];

    let report = gradcheck::check(&params, gradcheck::DEFAULT_STEP, |tape| {
        let h = tape.matmul(&x, &params[0])?;
        let h = tape.add_bias(&h, &params[1])?;
        let h = tape.tanh(&h)?;
        let y = tape.matmul(&h, &params[2])?;
        let y = tape.add_bias(&y, &params[3])?;
        let d = tape.sub(&y, &target)?;
        let sq = tape.mul(&d, &d)?;
        tape.mean(&sq)
    })
    .unwrap();
    assert!(
        report.max_rel_err < 1e-4,
        "finite-difference mismatch: {report:?}"
    );
}

#[test]
fn adam_first_step_is_signed_lr() {
    let p = Tensor::param(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
    let params = [p];
    let mut adam = AdamState::new(&params, 1e-3);
    params[0].accumulate_grad(&[0.4, -2.0, 0.001]);
    adam.step(&params).unwrap();
    let got = params[0].to_vec();
    // Bias-corrected first step is -lr * g / (|g| + eps') ~ -lr * sign(g).
    let expect = [1.0 - 1e-3, 2.0 + 1e-3, 3.0 - 1e-3];
    for (g, e) in got.iter().zip(expect.iter()) {
        assert!((g - e).abs() < 1e-5, "{got:?} vs {expect:?}");
    }
    assert_eq!(adam.step, 1);
}

#[test]
fn adam_zero_grad_leaves_params() {
    let p = Tensor::param(1, 2, vec![1.0, -1.0]).unwrap();
    let params = [p];
    let mut adam = AdamState::new(&params, 1e-2);
    params[0].accumulate_grad(&[0.0, 0.0]);
    adam.step(&params).unwrap();
    assert_eq!(params[0].to_vec(), vec![1.0, -1.0]);
}

#[test]
fn adam_missing_grad_is_contract_error() {
    let p = Tensor::param(1, 2, vec![1.0, -1.0]).unwrap();
    let params = [p];
    let mut adam = AdamState::new(&params, 1e-2);
    assert!(matches!(adam.step(&params), Err(TensorError::Contract(_))));
}

/// Two steps with constant gradient vs a hand-unrolled Adam recursion.
#[test]
fn adam_two_steps_match_hand_unrolled() {
    let (lr, b1, b2, eps): (f64, f64, f64, f64) = (3e-4, 0.9, 0.999, 1e-8);
    let g = [0.7, -0.3];
    let start = [0.25f64, -1.5];

    // Oracle: unroll the recursion by hand for two steps.
    let mut theta = start;
    let (mut m, mut v) = ([0.0; 2], [0.0; 2]);
    for t in 1..=2u32 {
        for i in 0..2 {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / (1.0 - b1.powi(t as i32));
            let v_hat = v[i] / (1.0 - b2.powi(t as i32));
            theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }

    let p = Tensor::param(1, 2, start.to_vec()).unwrap();
    let params = [p];
    let mut adam = AdamState::new(&params, lr);
    for _ in 0..2 {
        zero_grads(&params);
        params[0].accumulate_grad(&g);
        adam.step(&params).unwrap();
    }
    let got = params[0].to_vec();
    for (a, b) in got.iter().zip(theta.iter()) {
        assert!((a - b).abs() < 1e-15, "{got:?} vs {theta:?}");
    }
}
