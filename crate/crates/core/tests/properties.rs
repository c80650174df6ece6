//! Property tests: finite-difference agreement for every differentiable op
//! over random shapes up to 8x8, and matmul associativity on random 3-chains.

use dgform_core::gradcheck;
use dgform_core::{Tape, Tensor};
use proptest::prelude::*;

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0f64..2.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unary_ops_match_finite_differences(
        r in 1usize..=8, c in 1usize..=8,
        which in 0usize..5,
        seed_data in vec_of(64),
    ) {
        let data: Vec<f64> = seed_data.iter().take(r * c).cloned().collect();
        // Keep log's inputs strictly positive and relu away from the kink.
        let data: Vec<f64> = data
            .iter()
            .map(|v| match which {
                3 => v.abs() + 0.5,
                2 => v.clamp(-1.5, 1.5),
                0 => if v.abs() < 1e-2 { 0.1 } else { *v },
                _ => *v,
            })
            .collect();
        let x = Tensor::param(r, c, data).unwrap();
        let params = [x];
        let report = gradcheck::check(&params, gradcheck::DEFAULT_STEP, |tape| {
            let y = match which {
                0 => tape.relu(&params[0])?,
                1 => tape.tanh(&params[0])?,
                2 => tape.exp(&params[0])?,
                3 => tape.log(&params[0])?,
                _ => tape.clamp(&params[0], -1.0, 1.0)?,
            };
            let sq = tape.mul(&y, &y)?;
            tape.mean(&sq)
        }).unwrap();
        // clamp has kinks at the bounds: tolerate only interior points there.
        if which != 4 {
            prop_assert!(report.max_rel_err < 1e-4, "{report:?} op {which}");
        } else {
            let vals = params[0].to_vec();
            let near_kink = vals.iter().any(|v| (v.abs() - 1.0).abs() < 1e-3);
            if !near_kink {
                prop_assert!(report.max_rel_err < 1e-4, "{report:?} clamp");
            }
        }
    }

    #[test]
    fn binary_ops_match_finite_differences(
        r in 1usize..=8, c in 1usize..=8,
        which in 0usize..4,
        da in vec_of(64), db in vec_of(64),
    ) {
        let a = Tensor::param(r, c, da.iter().take(r * c).cloned().collect()).unwrap();
        let b = Tensor::param(r, c, db.iter().take(r * c).cloned().collect()).unwrap();
        // Ties in minimum are measure-zero for random reals but guard anyway.
        if which == 3 {
            let av = a.to_vec();
            let bv = b.to_vec();
            if av.iter().zip(bv.iter()).any(|(x, y)| (x - y).abs() < 1e-3) {
                return Ok(());
            }
        }
        let params = [a, b];
        let report = gradcheck::check(&params, gradcheck::DEFAULT_STEP, |tape| {
            let y = match which {
                0 => tape.add(&params[0], &params[1])?,
                1 => tape.sub(&params[0], &params[1])?,
                2 => tape.mul(&params[0], &params[1])?,
                _ => tape.minimum(&params[0], &params[1])?,
            };
            let sq = tape.mul(&y, &y)?;
            tape.mean(&sq)
        }).unwrap();
        prop_assert!(report.max_rel_err < 1e-4, "{report:?} op {which}");
    }

    #[test]
    fn matmul_grads_match_finite_differences(
        m in 1usize..=6, k in 1usize..=6, n in 1usize..=6,
        da in vec_of(36), db in vec_of(36),
    ) {
        let a = Tensor::param(m, k, da.iter().take(m * k).cloned().collect()).unwrap();
        let b = Tensor::param(k, n, db.iter().take(k * n).cloned().collect()).unwrap();
        let params = [a, b];
        let report = gradcheck::check(&params, gradcheck::DEFAULT_STEP, |tape| {
            let y = tape.matmul(&params[0], &params[1])?;
            let sq = tape.mul(&y, &y)?;
            tape.mean(&sq)
        }).unwrap();
        prop_assert!(report.max_rel_err < 1e-4, "{report:?}");
    }

    #[test]
    fn matmul_associativity(
        m in 1usize..=5, k in 1usize..=5, p in 1usize..=5, n in 1usize..=5,
        da in vec_of(25), db in vec_of(25), dc in vec_of(25),
    ) {
        let a = Tensor::from_vec(m, k, da.iter().take(m * k).cloned().collect()).unwrap();
        let b = Tensor::from_vec(k, p, db.iter().take(k * p).cloned().collect()).unwrap();
        let c = Tensor::from_vec(p, n, dc.iter().take(p * n).cloned().collect()).unwrap();
        let mut tape = Tape::new();
        let left = {
            let ab = tape.matmul(&a, &b).unwrap();
            tape.matmul(&ab, &c).unwrap()
        };
        let right = {
            let bc = tape.matmul(&b, &c).unwrap();
            tape.matmul(&a, &bc).unwrap()
        };
        for (l, r) in left.to_vec().iter().zip(right.to_vec().iter()) {
            prop_assert!((l - r).abs() < 1e-10);
        }
    }
}
