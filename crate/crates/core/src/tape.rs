//! Define-by-run tape for reverse-mode differentiation.
//!
//! Each primitive records its inputs and output; `backward` walks the records
//! in reverse and accumulates `d loss / d input` into every tensor that
//! requires a gradient. A tape is rebuilt per forward pass and may be run
//! backward exactly once; a second call is an error.

use crate::tensor::{Tensor, TensorError};

enum Record {
    Matmul { a: Tensor, b: Tensor, out: Tensor },
    Add { a: Tensor, b: Tensor, out: Tensor },
    /// `a + bias` with `bias: [1, c]` broadcast over the rows of `a`.
    AddBias { a: Tensor, bias: Tensor, out: Tensor },
    Sub { a: Tensor, b: Tensor, out: Tensor },
    Mul { a: Tensor, b: Tensor, out: Tensor },
    Scale { a: Tensor, c: f64, out: Tensor },
    AddScalar { a: Tensor, out: Tensor },
    Relu { a: Tensor, out: Tensor },
    Tanh { a: Tensor, out: Tensor },
    Exp { a: Tensor, out: Tensor },
    Log { a: Tensor, out: Tensor },
    Clamp { a: Tensor, lo: f64, hi: f64, out: Tensor },
    Minimum { a: Tensor, b: Tensor, out: Tensor },
    Sum { a: Tensor, out: Tensor },
    Mean { a: Tensor, out: Tensor },
    Reshape { a: Tensor, out: Tensor },
    ConcatCols { parts: Vec<Tensor>, out: Tensor },
}

/// Operation tape. Records are appended in execution order, which is a
/// topological order of the computation graph by construction.
#[derive(Default)]
pub struct Tape {
    records: Vec<Record>,
    consumed: bool,
}

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<(), TensorError> {
    if a.shape() != b.shape() {
        return Err(TensorError::ShapeMismatch {
            op,
            lhs: a.shape().to_vec(),
            rhs: b.shape().to_vec(),
        });
    }
    Ok(())
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn push(&mut self, rec: Record, tracked: bool) {
        if tracked {
            self.records.push(rec);
        }
    }

    /// Standard matrix product `[m,k] x [k,n] -> [m,n]`.
    pub fn matmul(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
        let (m, k) = (a.rows(), a.cols());
        let (k2, n) = (b.rows(), b.cols());
        if k != k2 {
            return Err(TensorError::ShapeMismatch {
                op: "matmul",
                lhs: a.shape().to_vec(),
                rhs: b.shape().to_vec(),
            });
        }
        let ad = a.data();
        let bd = b.data();
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for p in 0..k {
                let av = ad[i * k + p];
                if av == 0.0 {
                    continue;
                }
                let brow = &bd[p * n..(p + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for j in 0..n {
                    orow[j] += av * brow[j];
                }
            }
        }
        drop(ad);
        drop(bd);
        let tracked = a.requires_grad() || b.requires_grad();
        let out = self.fresh(m, n, out, tracked)?;
        self.push(Record::Matmul { a: a.clone(), b: b.clone(), out: out.clone() }, tracked);
        Ok(out)
    }

    fn binary(
        &mut self,
        op: &'static str,
        a: &Tensor,
        b: &Tensor,
        f: impl Fn(f64, f64) -> f64,
        make: impl Fn(Tensor, Tensor, Tensor) -> Record,
    ) -> Result<Tensor, TensorError> {
        same_shape(op, a, b)?;
        let data: Vec<f64> = a.data().iter().zip(b.data().iter()).map(|(x, y)| f(*x, *y)).collect();
        let tracked = a.requires_grad() || b.requires_grad();
        let out = self.fresh(a.rows(), a.cols(), data, tracked)?;
        self.push(make(a.clone(), b.clone(), out.clone()), tracked);
        Ok(out)
    }

    fn unary(
        &mut self,
        a: &Tensor,
        f: impl Fn(f64) -> f64,
        make: impl Fn(Tensor, Tensor) -> Record,
    ) -> Result<Tensor, TensorError> {
        let data: Vec<f64> = a.data().iter().map(|x| f(*x)).collect();
        let tracked = a.requires_grad();
        let out = self.fresh(a.rows(), a.cols(), data, tracked)?;
        self.push(make(a.clone(), out.clone()), tracked);
        Ok(out)
    }

    fn fresh(&self, rows: usize, cols: usize, data: Vec<f64>, tracked: bool) -> Result<Tensor, TensorError> {
        if tracked {
            Tensor::param(rows, cols, data)
        } else {
            Tensor::from_vec(rows, cols, data)
        }
    }

    pub fn add(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
        self.binary("add", a, b, |x, y| x + y, |a, b, out| Record::Add { a, b, out })
    }

    /// `a[r,c] + bias[1,c]`, bias broadcast over rows.
    pub fn add_bias(&mut self, a: &Tensor, bias: &Tensor) -> Result<Tensor, TensorError> {
        if bias.rows() != 1 || bias.cols() != a.cols() {
            return Err(TensorError::ShapeMismatch {
                op: "add_bias",
                lhs: a.shape().to_vec(),
                rhs: bias.shape().to_vec(),
            });
        }
        let (r, c) = (a.rows(), a.cols());
        let bd = bias.data();
        let data: Vec<f64> = a
            .data()
            .iter()
            .enumerate()
            .map(|(i, x)| x + bd[i % c])
            .collect();
        drop(bd);
        let tracked = a.requires_grad() || bias.requires_grad();
        let out = self.fresh(r, c, data, tracked)?;
        self.push(Record::AddBias { a: a.clone(), bias: bias.clone(), out: out.clone() }, tracked);
        Ok(out)
    }

    pub fn sub(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
        self.binary("sub", a, b, |x, y| x - y, |a, b, out| Record::Sub { a, b, out })
    }

    pub fn mul(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
        self.binary("mul", a, b, |x, y| x * y, |a, b, out| Record::Mul { a, b, out })
    }

    pub fn scale(&mut self, a: &Tensor, c: f64) -> Result<Tensor, TensorError> {
        let data: Vec<f64> = a.data().iter().map(|x| x * c).collect();
        let tracked = a.requires_grad();
        let out = self.fresh(a.rows(), a.cols(), data, tracked)?;
        self.push(Record::Scale { a: a.clone(), c, out: out.clone() }, tracked);
        Ok(out)
    }

    pub fn add_scalar(&mut self, a: &Tensor, c: f64) -> Result<Tensor, TensorError> {
        let data: Vec<f64> = a.data().iter().map(|x| x + c).collect();
        let tracked = a.requires_grad();
        let out = self.fresh(a.rows(), a.cols(), data, tracked)?;
        self.push(Record::AddScalar { a: a.clone(), out: out.clone() }, tracked);
        Ok(out)
    }

    pub fn relu(&mut self, a: &Tensor) -> Result<Tensor, TensorError> {
        self.unary(a, |x| x.max(0.0), |a, out| Record::Relu { a, out })
    }

    pub fn tanh(&mut self, a: &Tensor) -> Result<Tensor, TensorError> {
        self.unary(a, f64::tanh, |a, out| Record::Tanh { a, out })
    }

    pub fn exp(&mut self, a: &Tensor) -> Result<Tensor, TensorError> {
        self.unary(a, f64::exp, |a, out| Record::Exp { a, out })
    }

    pub fn log(&mut self, a: &Tensor) -> Result<Tensor, TensorError> {
        if a.data().iter().any(|&x| x <= 0.0) {
            return Err(TensorError::Domain("log of non-positive value".into()));
        }
        self.unary(a, f64::ln, |a, out| Record::Log { a, out })
    }

    /// Elementwise clamp to `[lo, hi]`; gradient passes through the interior.
    pub fn clamp(&mut self, a: &Tensor, lo: f64, hi: f64) -> Result<Tensor, TensorError> {
        let data: Vec<f64> = a.data().iter().map(|x| x.clamp(lo, hi)).collect();
        let tracked = a.requires_grad();
        let out = self.fresh(a.rows(), a.cols(), data, tracked)?;
        self.push(Record::Clamp { a: a.clone(), lo, hi, out: out.clone() }, tracked);
        Ok(out)
    }

    /// Elementwise minimum; on ties the gradient goes to the first operand.
    pub fn minimum(&mut self, a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
        self.binary("minimum", a, b, f64::min, |a, b, out| Record::Minimum { a, b, out })
    }

    pub fn sum(&mut self, a: &Tensor) -> Result<Tensor, TensorError> {
        let s: f64 = a.data().iter().sum();
        let tracked = a.requires_grad();
        let out = self.fresh(1, 1, vec![s], tracked)?;
        self.push(Record::Sum { a: a.clone(), out: out.clone() }, tracked);
        Ok(out)
    }

    pub fn mean(&mut self, a: &Tensor) -> Result<Tensor, TensorError> {
        let n = a.numel() as f64;
        let s: f64 = a.data().iter().sum();
        let tracked = a.requires_grad();
        let out = self.fresh(1, 1, vec![s / n], tracked)?;
        self.push(Record::Mean { a: a.clone(), out: out.clone() }, tracked);
        Ok(out)
    }

    pub fn reshape(&mut self, a: &Tensor, rows: usize, cols: usize) -> Result<Tensor, TensorError> {
        if rows * cols != a.numel() {
            return Err(TensorError::ShapeMismatch {
                op: "reshape",
                lhs: a.shape().to_vec(),
                rhs: vec![rows, cols],
            });
        }
        let tracked = a.requires_grad();
        let out = self.fresh(rows, cols, a.to_vec(), tracked)?;
        self.push(Record::Reshape { a: a.clone(), out: out.clone() }, tracked);
        Ok(out)
    }

    /// Concatenate along columns; all parts must share the row count.
    pub fn concat_cols(&mut self, parts: &[Tensor]) -> Result<Tensor, TensorError> {
        if parts.is_empty() {
            return Err(TensorError::Contract("concat_cols of zero tensors".into()));
        }
        let r = parts[0].rows();
        let mut total = 0;
        for p in parts {
            if p.rows() != r {
                return Err(TensorError::ShapeMismatch {
                    op: "concat_cols",
                    lhs: parts[0].shape().to_vec(),
                    rhs: p.shape().to_vec(),
                });
            }
            total += p.cols();
        }
        let mut data = vec![0.0; r * total];
        let mut offset = 0;
        for p in parts {
            let pd = p.data();
            let c = p.cols();
            for i in 0..r {
                data[i * total + offset..i * total + offset + c]
                    .copy_from_slice(&pd[i * c..(i + 1) * c]);
            }
            offset += c;
        }
        let tracked = parts.iter().any(Tensor::requires_grad);
        let out = self.fresh(r, total, data, tracked)?;
        self.push(Record::ConcatCols { parts: parts.to_vec(), out: out.clone() }, tracked);
        Ok(out)
    }

    /// Mean over rows: `[r,c] -> [1,c]`. Built from a constant matmul so it
    /// needs no dedicated gradient rule.
    pub fn mean_rows(&mut self, a: &Tensor) -> Result<Tensor, TensorError> {
        let r = a.rows();
        let w = Tensor::from_vec(1, r, vec![1.0 / r as f64; r])?;
        self.matmul(&w, a)
    }

    /// Run reverse accumulation from a scalar loss. Consumes the tape's
    /// records; a second call on the same tape is a contract error.
    pub fn backward(&mut self, loss: &Tensor) -> Result<(), TensorError> {
        if self.consumed {
            return Err(TensorError::Contract("tape already consumed by backward".into()));
        }
        if loss.numel() != 1 {
            return Err(TensorError::Contract(format!(
                "backward requires a scalar loss, got shape {:?}",
                loss.shape()
            )));
        }
        self.consumed = true;
        loss.accumulate_grad(&[1.0]);
        for rec in self.records.iter().rev() {
            apply_backward(rec);
        }
        self.records.clear();
        Ok(())
    }
}

fn grad_of(t: &Tensor) -> Option<Vec<f64>> {
    t.grad()
}

fn apply_backward(rec: &Record) {
    match rec {
        Record::Matmul { a, b, out } => {
            let Some(g) = grad_of(out) else { return };
            let (m, k) = (a.rows(), a.cols());
            let n = b.cols();
            if a.requires_grad() {
                let bd = b.data();
                let mut da = vec![0.0; m * k];
                for i in 0..m {
                    for j in 0..n {
                        let gv = g[i * n + j];
                        if gv == 0.0 {
                            continue;
                        }
                        for p in 0..k {
                            da[i * k + p] += gv * bd[p * n + j];
                        }
                    }
                }
                a.accumulate_grad(&da);
            }
            if b.requires_grad() {
                let ad = a.data();
                let mut db = vec![0.0; k * n];
                for i in 0..m {
                    for p in 0..k {
                        let av = ad[i * k + p];
                        if av == 0.0 {
                            continue;
                        }
                        for j in 0..n {
                            db[p * n + j] += av * g[i * n + j];
                        }
                    }
                }
                b.accumulate_grad(&db);
            }
        }
        Record::Add { a, b, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                a.accumulate_grad(&g);
            }
            if b.requires_grad() {
                b.accumulate_grad(&g);
            }
        }
        Record::AddBias { a, bias, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                a.accumulate_grad(&g);
            }
            if bias.requires_grad() {
                let c = bias.cols();
                let mut db = vec![0.0; c];
                for (i, gv) in g.iter().enumerate() {
                    db[i % c] += gv;
                }
                bias.accumulate_grad(&db);
            }
        }
        Record::Sub { a, b, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                a.accumulate_grad(&g);
            }
            if b.requires_grad() {
                let neg: Vec<f64> = g.iter().map(|x| -x).collect();
                b.accumulate_grad(&neg);
            }
        }
        Record::Mul { a, b, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                let bd = b.data();
                let da: Vec<f64> = g.iter().zip(bd.iter()).map(|(gv, bv)| gv * bv).collect();
                drop(bd);
                a.accumulate_grad(&da);
            }
            if b.requires_grad() {
                let ad = a.data();
                let db: Vec<f64> = g.iter().zip(ad.iter()).map(|(gv, av)| gv * av).collect();
                drop(ad);
                b.accumulate_grad(&db);
            }
        }
        Record::Scale { a, c, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                let da: Vec<f64> = g.iter().map(|gv| gv * c).collect();
                a.accumulate_grad(&da);
            }
        }
        Record::AddScalar { a, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                a.accumulate_grad(&g);
            }
        }
        Record::Relu { a, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                let ad = a.data();
                let da: Vec<f64> = g
                    .iter()
                    .zip(ad.iter())
                    .map(|(gv, av)| if *av > 0.0 { *gv } else { 0.0 })
                    .collect();
                drop(ad);
                a.accumulate_grad(&da);
            }
        }
        Record::Tanh { a, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                let od = out.data();
                let da: Vec<f64> = g.iter().zip(od.iter()).map(|(gv, y)| gv * (1.0 - y * y)).collect();
                drop(od);
                a.accumulate_grad(&da);
            }
        }
        Record::Exp { a, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                let od = out.data();
                let da: Vec<f64> = g.iter().zip(od.iter()).map(|(gv, y)| gv * y).collect();
                drop(od);
                a.accumulate_grad(&da);
            }
        }
        Record::Log { a, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                let ad = a.data();
                let da: Vec<f64> = g.iter().zip(ad.iter()).map(|(gv, x)| gv / x).collect();
                drop(ad);
                a.accumulate_grad(&da);
            }
        }
        Record::Clamp { a, lo, hi, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                let ad = a.data();
                let da: Vec<f64> = g
                    .iter()
                    .zip(ad.iter())
                    .map(|(gv, x)| if *x >= *lo && *x <= *hi { *gv } else { 0.0 })
                    .collect();
                drop(ad);
                a.accumulate_grad(&da);
            }
        }
        Record::Minimum { a, b, out } => {
            let Some(g) = grad_of(out) else { return };
            let ad = a.data();
            let bd = b.data();
            if a.requires_grad() {
                let da: Vec<f64> = g
                    .iter()
                    .zip(ad.iter().zip(bd.iter()))
                    .map(|(gv, (av, bv))| if av <= bv { *gv } else { 0.0 })
                    .collect();
                a.accumulate_grad(&da);
            }
            if b.requires_grad() {
                let db: Vec<f64> = g
                    .iter()
                    .zip(ad.iter().zip(bd.iter()))
                    .map(|(gv, (av, bv))| if bv < av { *gv } else { 0.0 })
                    .collect();
                b.accumulate_grad(&db);
            }
        }
        Record::Sum { a, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                a.accumulate_grad(&vec![g[0]; a.numel()]);
            }
        }
        Record::Mean { a, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                let n = a.numel() as f64;
                a.accumulate_grad(&vec![g[0] / n; a.numel()]);
            }
        }
        Record::Reshape { a, out } => {
            let Some(g) = grad_of(out) else { return };
            if a.requires_grad() {
                a.accumulate_grad(&g);
            }
        }
        Record::ConcatCols { parts, out } => {
            let Some(g) = grad_of(out) else { return };
            let r = parts[0].rows();
            let total = out.cols();
            let mut offset = 0;
            for p in parts {
                let c = p.cols();
                if p.requires_grad() {
                    let mut dp = vec![0.0; r * c];
                    for i in 0..r {
                        dp[i * c..(i + 1) * c]
                            .copy_from_slice(&g[i * total + offset..i * total + offset + c]);
                    }
                    p.accumulate_grad(&dp);
                }
                offset += c;
            }
        }
    }
}
