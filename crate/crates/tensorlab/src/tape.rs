//! Reverse-mode differentiation over a linear tape.
//!
//! Every op appends a node holding its forward value. [`Tape::backward`]
//! walks the tape from the loss towards the leaves, accumulates parameter
//! gradients into the [`ParamStore`] and clears the tape.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TensorError};
use crate::params::{ParamId, ParamStore};
use crate::sparse::SparseMatrix;
use crate::tensor::Tensor;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    Param(ParamId),
    MatMul(Var, Var),
    Transpose(Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Sigmoid(Var),
    Relu(Var),
    Log(Var),
    Exp(Var),
    Sqrt(Var),
    Square(Var),
    Clamp(Var, f64, f64),
    Sum(Var),
    Mean(Var),
    SumRows(Var),
    RowL2Norm(Var),
    RowDot(Var, Var),
    RowCosine(Var, Var),
    Dropout(Var, Vec<f64>),
    SpMatMul(Arc<SparseMatrix>, Var),
    PairDots(Var, Arc<Vec<(usize, usize)>>),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dim_err(op: &'static str, a: &Tensor, b: &Tensor) -> TensorError {
    TensorError::Dimension {
        op,
        lhs: a.shape(),
        rhs: b.shape(),
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, false)
    }

    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        self.push(store.value(id).clone(), Op::Param(id), true)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).matmul(self.value(b))?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(v, Op::MatMul(a, b), rg))
    }

    pub fn transpose(&mut self, a: Var) -> Var {
        let v = self.value(a).transpose();
        let rg = self.rg(a);
        self.push(v, Op::Transpose(a), rg)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).zip_map(self.value(b), "add", |x, y| x + y)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(v, Op::Add(a, b), rg))
    }

    /// `a + 1·row` with `row` of shape `1 x cols(a)` broadcast over rows.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (x, r) = (self.value(a), self.value(row));
        if r.rows() != 1 || r.cols() != x.cols() {
            return Err(dim_err("add_row", x, r));
        }
        let mut v = x.clone();
        for i in 0..v.rows() {
            for (d, s) in v.row_mut(i).iter_mut().zip(r.data()) {
                *d += s;
            }
        }
        let rg = self.rg(a) || self.rg(row);
        Ok(self.push(v, Op::AddRow(a, row), rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).zip_map(self.value(b), "sub", |x, y| x - y)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(v, Op::Sub(a, b), rg))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).zip_map(self.value(b), "mul", |x, y| x * y)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(v, Op::Mul(a, b), rg))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.value(a).zip_map(self.value(b), "div", |x, y| x / y)?;
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(v, Op::Div(a, b), rg))
    }

    pub fn scalar_mul(&mut self, a: Var, s: f64) -> Var {
        let v = self.value(a).map(|x| s * x);
        let rg = self.rg(a);
        self.push(v, Op::Scale(a, s), rg)
    }

    pub fn add_scalar(&mut self, a: Var, s: f64) -> Var {
        let v = self.value(a).map(|x| x + s);
        let rg = self.rg(a);
        self.push(v, Op::AddScalar(a), rg)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let v = self.value(a).map(sigmoid);
        let rg = self.rg(a);
        self.push(v, Op::Sigmoid(a), rg)
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let v = self.value(a).map(|x| x.max(0.0));
        let rg = self.rg(a);
        self.push(v, Op::Relu(a), rg)
    }

    pub fn log(&mut self, a: Var) -> Var {
        let v = self.value(a).map(f64::ln);
        let rg = self.rg(a);
        self.push(v, Op::Log(a), rg)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let v = self.value(a).map(f64::exp);
        let rg = self.rg(a);
        self.push(v, Op::Exp(a), rg)
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        let v = self.value(a).map(f64::sqrt);
        let rg = self.rg(a);
        self.push(v, Op::Sqrt(a), rg)
    }

    pub fn square(&mut self, a: Var) -> Var {
        let v = self.value(a).map(|x| x * x);
        let rg = self.rg(a);
        self.push(v, Op::Square(a), rg)
    }

    /// Elementwise clamp; the gradient is zero where the input lies outside
    /// `[lo, hi]`.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let v = self.value(a).map(|x| x.clamp(lo, hi));
        let rg = self.rg(a);
        self.push(v, Op::Clamp(a, lo, hi), rg)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let v = Tensor::scalar(self.value(a).sum());
        let rg = self.rg(a);
        self.push(v, Op::Sum(a), rg)
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        if x.is_empty() {
            return Err(TensorError::Contract("mean of an empty tensor".into()));
        }
        let v = Tensor::scalar(x.sum() / x.len() as f64);
        let rg = self.rg(a);
        Ok(self.push(v, Op::Mean(a), rg))
    }

    /// `n x c -> n x 1` row sums.
    pub fn sum_rows(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let v = Tensor::column((0..x.rows()).map(|i| x.row(i).iter().sum()).collect());
        let rg = self.rg(a);
        self.push(v, Op::SumRows(a), rg)
    }

    /// `n x c -> n x 1` Euclidean row norms. The gradient at a zero row is 0.
    pub fn row_l2_norm(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let v = Tensor::column((0..x.rows()).map(|i| norm(x.row(i))).collect());
        let rg = self.rg(a);
        self.push(v, Op::RowL2Norm(a), rg)
    }

    /// Row-wise inner products, `n x 1`.
    pub fn row_dot(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        x.same_shape(y, "row_dot")?;
        let v = Tensor::column((0..x.rows()).map(|i| dot(x.row(i), y.row(i))).collect());
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(v, Op::RowDot(a, b), rg))
    }

    /// Row-wise cosine similarity, `n x 1`. A row pair where either side
    /// has zero norm yields 0 with zero gradient.
    pub fn row_cosine(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        x.same_shape(y, "row_cosine")?;
        let v = Tensor::column((0..x.rows()).map(|i| cosine(x.row(i), y.row(i))).collect());
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(v, Op::RowCosine(a, b), rg))
    }

    /// Inverted dropout: entries are zeroed with probability `rate` and
    /// survivors scaled by `1/(1-rate)`.
    pub fn dropout(&mut self, a: Var, rate: f64, seed: u64) -> Result<Var> {
        if !(0.0..1.0).contains(&rate) {
            return Err(TensorError::Contract(format!("dropout rate {rate} outside [0,1)")));
        }
        let x = self.value(a);
        let keep = 1.0 / (1.0 - rate);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask: Vec<f64> = (0..x.len())
            .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
            .collect();
        let v = Tensor::from_vec(x.rows(), x.cols(), x.data().iter().zip(&mask).map(|(a, m)| a * m).collect())?;
        let rg = self.rg(a);
        Ok(self.push(v, Op::Dropout(a, mask), rg))
    }

    /// `S · a` for a constant sparse `S`.
    pub fn sparse_matmul(&mut self, s: Arc<SparseMatrix>, a: Var) -> Result<Var> {
        let v = s.matmul_dense(self.value(a))?;
        let rg = self.rg(a);
        Ok(self.push(v, Op::SpMatMul(s, a), rg))
    }

    /// `out[k] = z[i_k] · z[j_k]` for each listed row pair, `m x 1`.
    pub fn pair_dots(&mut self, z: Var, pairs: Arc<Vec<(usize, usize)>>) -> Result<Var> {
        let x = self.value(z);
        let mut out = Vec::with_capacity(pairs.len());
        for &(i, j) in pairs.iter() {
            if i >= x.rows() || j >= x.rows() {
                return Err(TensorError::Dimension {
                    op: "pair_dots",
                    lhs: x.shape(),
                    rhs: (i, j),
                });
            }
            out.push(dot(x.row(i), x.row(j)));
        }
        let rg = self.rg(z);
        Ok(self.push(Tensor::column(out), Op::PairDots(z, pairs), rg))
    }

    /// Accumulates d`loss`/d`param` into `store` and clears the tape.
    pub fn backward(&mut self, loss: Var, store: &mut ParamStore) -> Result<()> {
        let grads = self.gradients(loss)?;
        for (node, g) in self.nodes.iter().zip(grads) {
            if let (Op::Param(id), Some(g)) = (&node.op, g) {
                store.accumulate_grad(*id, &g)?;
            }
        }
        self.nodes.clear();
        Ok(())
    }

    /// Gradients of a scalar `loss` with respect to every node; `None` where
    /// the node does not influence the loss or does not require gradients.
    pub fn gradients(&self, loss: Var) -> Result<Vec<Option<Tensor>>> {
        let lv = self.value(loss);
        if lv.shape() != (1, 1) {
            return Err(TensorError::Contract(format!(
                "backward needs a scalar loss, got {}x{}",
                lv.rows(),
                lv.cols()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::scalar(1.0));
        for idx in (0..=loss.0).rev() {
            let node = &self.nodes[idx];
            if !node.requires_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(node, &g, &mut grads)?;
            grads[idx] = Some(g);
        }
        Ok(grads)
    }

    fn accum(&self, grads: &mut [Option<Tensor>], v: Var, g: Tensor) -> Result<()> {
        if !self.rg(v) {
            return Ok(());
        }
        match &mut grads[v.0] {
            Some(acc) => acc.axpy(1.0, &g)?,
            slot @ None => *slot = Some(g),
        }
        Ok(())
    }

    fn propagate(&self, node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) -> Result<()> {
        let out = &node.value;
        match &node.op {
            Op::Leaf | Op::Param(_) => {}
            Op::MatMul(a, b) => {
                if self.rg(*a) {
                    self.accum(grads, *a, g.matmul_nt(self.value(*b))?)?;
                }
                if self.rg(*b) {
                    self.accum(grads, *b, self.value(*a).matmul_tn(g)?)?;
                }
            }
            Op::Transpose(a) => self.accum(grads, *a, g.transpose())?,
            Op::Add(a, b) => {
                self.accum(grads, *a, g.clone())?;
                self.accum(grads, *b, g.clone())?;
            }
            Op::AddRow(a, r) => {
                self.accum(grads, *a, g.clone())?;
                if self.rg(*r) {
                    let mut col = Tensor::zeros(1, g.cols());
                    for i in 0..g.rows() {
                        for (d, s) in col.data_mut().iter_mut().zip(g.row(i)) {
                            *d += s;
                        }
                    }
                    self.accum(grads, *r, col)?;
                }
            }
            Op::Sub(a, b) => {
                self.accum(grads, *a, g.clone())?;
                self.accum(grads, *b, g.map(|x| -x))?;
            }
            Op::Mul(a, b) => {
                if self.rg(*a) {
                    self.accum(grads, *a, g.zip_map(self.value(*b), "mul_grad", |x, y| x * y)?)?;
                }
                if self.rg(*b) {
                    self.accum(grads, *b, g.zip_map(self.value(*a), "mul_grad", |x, y| x * y)?)?;
                }
            }
            Op::Div(a, b) => {
                let bv = self.value(*b);
                if self.rg(*a) {
                    self.accum(grads, *a, g.zip_map(bv, "div_grad", |x, y| x / y)?)?;
                }
                if self.rg(*b) {
                    // d(a/b)/db = -(a/b)/b
                    let t = out.zip_map(bv, "div_grad", |q, y| -q / y)?;
                    self.accum(grads, *b, g.zip_map(&t, "div_grad", |x, y| x * y)?)?;
                }
            }
            Op::Scale(a, s) => self.accum(grads, *a, g.map(|x| s * x))?,
            Op::AddScalar(a) => self.accum(grads, *a, g.clone())?,
            Op::Sigmoid(a) => self.accum(grads, *a, g.zip_map(out, "sigmoid_grad", |x, s| x * s * (1.0 - s))?)?,
            Op::Relu(a) => {
                let gi = g.zip_map(self.value(*a), "relu_grad", |x, i| if i > 0.0 { x } else { 0.0 })?;
                self.accum(grads, *a, gi)?
            }
            Op::Log(a) => self.accum(grads, *a, g.zip_map(self.value(*a), "log_grad", |x, i| x / i)?)?,
            Op::Exp(a) => self.accum(grads, *a, g.zip_map(out, "exp_grad", |x, e| x * e)?)?,
            Op::Sqrt(a) => self.accum(grads, *a, g.zip_map(out, "sqrt_grad", |x, r| 0.5 * x / r)?)?,
            Op::Square(a) => self.accum(grads, *a, g.zip_map(self.value(*a), "square_grad", |x, i| 2.0 * x * i)?)?,
            Op::Clamp(a, lo, hi) => {
                let gi = g.zip_map(self.value(*a), "clamp_grad", |x, i| if i >= *lo && i <= *hi { x } else { 0.0 })?;
                self.accum(grads, *a, gi)?
            }
            Op::Sum(a) => {
                let (r, c) = self.value(*a).shape();
                self.accum(grads, *a, Tensor::full(r, c, g.data()[0]))?
            }
            Op::Mean(a) => {
                let (r, c) = self.value(*a).shape();
                self.accum(grads, *a, Tensor::full(r, c, g.data()[0] / (r * c) as f64))?
            }
            Op::SumRows(a) => {
                let (r, c) = self.value(*a).shape();
                self.accum(grads, *a, Tensor::from_fn(r, c, |i, _| g.data()[i]))?
            }
            Op::RowL2Norm(a) => {
                let x = self.value(*a);
                let gi = Tensor::from_fn(x.rows(), x.cols(), |i, j| {
                    let n = out.data()[i];
                    if n > 0.0 {
                        g.data()[i] * x.get(i, j) / n
                    } else {
                        0.0
                    }
                });
                self.accum(grads, *a, gi)?
            }
            Op::RowDot(a, b) => {
                let (x, y) = (self.value(*a), self.value(*b));
                if self.rg(*a) {
                    self.accum(grads, *a, Tensor::from_fn(y.rows(), y.cols(), |i, j| g.data()[i] * y.get(i, j)))?;
                }
                if self.rg(*b) {
                    self.accum(grads, *b, Tensor::from_fn(x.rows(), x.cols(), |i, j| g.data()[i] * x.get(i, j)))?;
                }
            }
            Op::RowCosine(a, b) => {
                let (x, y) = (self.value(*a), self.value(*b));
                let (r, c) = x.shape();
                let mut gx = Tensor::zeros(r, c);
                let mut gy = Tensor::zeros(r, c);
                for i in 0..r {
                    let (xr, yr) = (x.row(i), y.row(i));
                    let (nx, ny) = (norm(xr), norm(yr));
                    if nx == 0.0 || ny == 0.0 {
                        continue;
                    }
                    let cos = out.data()[i];
                    let gi = g.data()[i];
                    for j in 0..c {
                        gx.set(i, j, gi * (yr[j] / (nx * ny) - cos * xr[j] / (nx * nx)));
                        gy.set(i, j, gi * (xr[j] / (nx * ny) - cos * yr[j] / (ny * ny)));
                    }
                }
                self.accum(grads, *a, gx)?;
                self.accum(grads, *b, gy)?;
            }
            Op::Dropout(a, mask) => {
                let gi = Tensor::from_vec(g.rows(), g.cols(), g.data().iter().zip(mask).map(|(x, m)| x * m).collect())?;
                self.accum(grads, *a, gi)?
            }
            Op::SpMatMul(s, a) => self.accum(grads, *a, s.transpose_matmul_dense(g)?)?,
            Op::PairDots(z, pairs) => {
                let x = self.value(*z);
                let mut gz = Tensor::zeros(x.rows(), x.cols());
                for (k, &(i, j)) in pairs.iter().enumerate() {
                    let gk = g.data()[k];
                    if gk == 0.0 {
                        continue;
                    }
                    for col in 0..x.cols() {
                        let zi = x.get(i, col);
                        let zj = x.get(j, col);
                        gz.set(i, col, gz.get(i, col) + gk * zj);
                        gz.set(j, col, gz.get(j, col) + gk * zi);
                    }
                }
                self.accum(grads, *z, gz)?
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}
