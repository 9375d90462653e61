//! Central finite-difference checks of tape gradients.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::Result;
use crate::params::{ParamId, ParamStore};
use crate::rng::seeded;
use crate::sparse::SparseMatrix;
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub probes: usize,
    pub max_rel_err: f64,
    pub max_abs_err: f64,
}

/// Denominator floor for the relative error, so that gradients that are
/// zero up to rounding are compared absolutely.
pub const REL_FLOOR: f64 = 1e-6;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Compares analytic gradients of `loss` against central differences with
/// step `h` on up to `max_probes` randomly chosen parameter entries.
///
/// `loss` must be deterministic in the store values.
pub fn check<F>(store: &mut ParamStore, mut loss: F, h: f64, max_probes: usize, seed: u64) -> Result<GradCheckReport>
where
    F: FnMut(&mut Tape, &ParamStore) -> Result<Var>,
{
    store.zero_grad();
    let mut tape = Tape::new();
    let l = loss(&mut tape, store)?;
    tape.backward(l, store)?;
    let analytic: Vec<Tensor> = store
        .ids()
        .map(|id| {
            let (r, c) = store.value(id).shape();
            store.grad(id).cloned().unwrap_or_else(|| Tensor::zeros(r, c))
        })
        .collect();
    store.zero_grad();

    let mut slots: Vec<(ParamId, usize)> = Vec::new();
    for id in store.ids() {
        for k in 0..store.value(id).len() {
            slots.push((id, k));
        }
    }
    let mut rng = seeded(seed);
    let chosen: Vec<usize> = if slots.len() <= max_probes {
        (0..slots.len()).collect()
    } else {
        sample(&mut rng, slots.len(), max_probes).into_vec()
    };

    let mut eval = |store: &ParamStore| -> Result<f64> {
        let mut t = Tape::new();
        let l = loss(&mut t, store)?;
        t.value(l).item()
    };
    let mut report = GradCheckReport {
        probes: chosen.len(),
        max_rel_err: 0.0,
        max_abs_err: 0.0,
    };
    for &s in &chosen {
        let (id, k) = slots[s];
        let orig = store.value(id).data()[k];
        store.value_mut(id).data_mut()[k] = orig + h;
        let up = eval(store)?;
        store.value_mut(id).data_mut()[k] = orig - h;
        let down = eval(store)?;
        store.value_mut(id).data_mut()[k] = orig;
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[id.index()].data()[k];
        report.max_rel_err = report.max_rel_err.max(rel_err(a, numeric));
        report.max_abs_err = report.max_abs_err.max((a - numeric).abs());
    }
    Ok(report)
}

/// A randomly composed differentiable program over its own parameters,
/// used to exercise every op's backward rule.
pub struct RandomProgram {
    pub store: ParamStore,
    pub steps: Vec<Step>,
    pub ops_used: Vec<&'static str>,
}

#[derive(Clone, Debug)]
pub enum Step {
    Dense { w: ParamId, b: ParamId },
    Sigmoid,
    MulParam(ParamId),
    ExpScaled,
    LogSquarePlusOne,
    Sparse(Arc<SparseMatrix>),
    Cosine(ParamId),
    PairDots(Arc<Vec<(usize, usize)>>),
    Transpose,
    Dropout(u64),
    DivParam(ParamId),
    SqrtSquarePlusOne,
    RowNorm,
    SubParam(ParamId),
    SumRows,
    RowDot(ParamId),
}

impl RandomProgram {
    pub fn generate(seed: u64) -> Self {
        let mut rng = seeded(seed);
        let mut store = ParamStore::new();
        let rows = rng.gen_range(3..7);
        let cols = rng.gen_range(2..6);
        let x0 = Tensor::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
        store.add("x0", x0).expect("fresh store");
        let mut shape = (rows, cols);
        let mut steps = Vec::new();
        let mut ops_used = Vec::new();
        let n_steps = rng.gen_range(3..8);
        let mut pcount = 0;
        let mut fresh = |store: &mut ParamStore, rng: &mut crate::rng::Rng, r: usize, c: usize, lo: f64, hi: f64| {
            pcount += 1;
            let t = Tensor::from_fn(r, c, |_, _| rng.gen_range(lo..hi));
            store.add(format!("p{pcount}"), t).expect("unique name")
        };
        for _ in 0..n_steps {
            let choice = rng.gen_range(0..16);
            let (r, c) = shape;
            let step = match choice {
                0 => {
                    let out = rng.gen_range(2..6);
                    let w = fresh(&mut store, &mut rng, c, out, -0.8, 0.8);
                    let b = fresh(&mut store, &mut rng, 1, out, -0.3, 0.3);
                    shape = (r, out);
                    Step::Dense { w, b }
                }
                1 => Step::Sigmoid,
                2 => Step::MulParam(fresh(&mut store, &mut rng, r, c, -1.0, 1.0)),
                3 => Step::ExpScaled,
                4 => Step::LogSquarePlusOne,
                5 => {
                    let m = rng.gen_range(2..6);
                    let mut trip = Vec::new();
                    for i in 0..m {
                        for j in 0..r {
                            if rng.gen_bool(0.5) {
                                trip.push((i, j, rng.gen_range(-1.0..1.0)));
                            }
                        }
                    }
                    shape = (m, c);
                    Step::Sparse(Arc::new(SparseMatrix::from_triplets(m, r, &trip).expect("in range")))
                }
                6 => {
                    shape = (r, 1);
                    Step::Cosine(fresh(&mut store, &mut rng, r, c, -1.0, 1.0))
                }
                7 => {
                    let m = rng.gen_range(2..8);
                    let pairs: Vec<(usize, usize)> = (0..m).map(|_| (rng.gen_range(0..r), rng.gen_range(0..r))).collect();
                    shape = (m, 1);
                    Step::PairDots(Arc::new(pairs))
                }
                8 => {
                    shape = (c, r);
                    Step::Transpose
                }
                9 => Step::Dropout(rng.gen()),
                10 => Step::DivParam(fresh(&mut store, &mut rng, r, c, 0.5, 2.0)),
                11 => Step::SqrtSquarePlusOne,
                12 => {
                    shape = (r, 1);
                    Step::RowNorm
                }
                13 => Step::SubParam(fresh(&mut store, &mut rng, r, c, -1.0, 1.0)),
                14 => {
                    shape = (r, 1);
                    Step::SumRows
                }
                _ => {
                    shape = (r, 1);
                    Step::RowDot(fresh(&mut store, &mut rng, r, c, -1.0, 1.0))
                }
            };
            ops_used.push(step.name());
            steps.push(step);
        }
        RandomProgram { store, steps, ops_used }
    }

    /// Forward pass; the loss is `mean(h²)` of the final node, which keeps
    /// every step on the gradient path.
    pub fn forward(&self, tape: &mut Tape, store: &ParamStore) -> Result<Var> {
        let x0 = store.id("x0").expect("generated");
        let mut h = tape.param(store, x0);
        for step in &self.steps {
            h = match step {
                Step::Dense { w, b } => {
                    let wv = tape.param(store, *w);
                    let bv = tape.param(store, *b);
                    let m = tape.matmul(h, wv)?;
                    let a = tape.add_row(m, bv)?;
                    let s = tape.scalar_mul(a, 0.9);
                    // softplus-like smooth path avoids relu kinks under FD
                    let e = tape.exp(s);
                    let p = tape.add_scalar(e, 1.0);
                    tape.log(p)
                }
                Step::Sigmoid => tape.sigmoid(h),
                Step::MulParam(p) => {
                    let v = tape.param(store, *p);
                    tape.mul(h, v)?
                }
                Step::ExpScaled => {
                    let s = tape.scalar_mul(h, 0.3);
                    tape.exp(s)
                }
                Step::LogSquarePlusOne => {
                    let s = tape.square(h);
                    let a = tape.add_scalar(s, 1.0);
                    tape.log(a)
                }
                Step::Sparse(s) => tape.sparse_matmul(s.clone(), h)?,
                Step::Cosine(p) => {
                    let v = tape.param(store, *p);
                    tape.row_cosine(h, v)?
                }
                Step::PairDots(pairs) => tape.pair_dots(h, pairs.clone())?,
                Step::Transpose => tape.transpose(h),
                Step::Dropout(seed) => tape.dropout(h, 0.3, *seed)?,
                Step::DivParam(p) => {
                    let v = tape.param(store, *p);
                    tape.div(h, v)?
                }
                Step::SqrtSquarePlusOne => {
                    let s = tape.square(h);
                    let a = tape.add_scalar(s, 1.0);
                    tape.sqrt(a)
                }
                Step::RowNorm => {
                    let s = tape.add_scalar(h, 0.1);
                    tape.row_l2_norm(s)
                }
                Step::SubParam(p) => {
                    let v = tape.param(store, *p);
                    tape.sub(h, v)?
                }
                Step::SumRows => tape.sum_rows(h),
                Step::RowDot(p) => {
                    let v = tape.param(store, *p);
                    tape.row_dot(h, v)?
                }
            };
        }
        let sq = tape.square(h);
        tape.mean(sq)
    }
}

impl Step {
    pub fn name(&self) -> &'static str {
        match self {
            Step::Dense { .. } => "dense_softplus",
            Step::Sigmoid => "sigmoid",
            Step::MulParam(_) => "mul",
            Step::ExpScaled => "exp",
            Step::LogSquarePlusOne => "log",
            Step::Sparse(_) => "sparse_matmul",
            Step::Cosine(_) => "row_cosine",
            Step::PairDots(_) => "pair_dots",
            Step::Transpose => "transpose",
            Step::Dropout(_) => "dropout",
            Step::DivParam(_) => "div",
            Step::SqrtSquarePlusOne => "sqrt",
            Step::RowNorm => "row_l2_norm",
            Step::SubParam(_) => "sub",
            Step::SumRows => "sum_rows",
            Step::RowDot(_) => "row_dot",
        }
    }
}
