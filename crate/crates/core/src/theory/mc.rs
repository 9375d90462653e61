//! Monte-Carlo estimates over sampled two-block graphs. Work is split into
//! fixed-size shards with their own derived seeds and reduced in shard
//! order, so results do not depend on the thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use tensorlab::rng::{derive_seed, seeded};
use tensorlab::Tensor;

use super::{gradient_coeffs, Relation, TheoryPoint};
use crate::error::{MuseError, Result};

const SHARD: usize = 2000;

/// Sample mean with its standard error (sample standard deviation over
/// `sqrt(samples)`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub samples: usize,
}

impl Estimate {
    /// `|value - mean|` in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (value - self.mean).abs();
        if self.se == 0.0 {
            if d <= 1e-12 * value.abs().max(1.0) {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.se
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Acc {
    n: usize,
    sum: f64,
    sumsq: f64,
}

impl Acc {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sumsq += v * v;
    }

    fn merge(&mut self, o: &Acc) {
        self.n += o.n;
        self.sum += o.sum;
        self.sumsq += o.sumsq;
    }

    fn estimate(&self) -> Estimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 {
            ((self.sumsq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            se: (var / n).sqrt(),
            samples: self.n,
        }
    }
}

/// Dense square matrix for the small sampled graphs.
#[derive(Clone, Debug, PartialEq)]
struct Sq {
    m: usize,
    v: Vec<f64>,
}

impl Sq {
    fn zeros(m: usize) -> Self {
        Sq { m, v: vec![0.0; m * m] }
    }

    fn from_fn(m: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut s = Sq::zeros(m);
        for i in 0..m {
            for j in 0..m {
                s.v[i * m + j] = f(i, j);
            }
        }
        s
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.v[i * self.m + j]
    }

    fn mul(&self, o: &Sq) -> Sq {
        let m = self.m;
        let mut out = Sq::zeros(m);
        for i in 0..m {
            for k in 0..m {
                let a = self.v[i * m + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..m {
                    out.v[i * m + j] += a * o.v[k * m + j];
                }
            }
        }
        out
    }
}

/// Symmetric adjacency of `2N` nodes; pairs `i < j` are drawn in row order.
pub fn sample_adjacency<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Tensor {
    let a = sample_sq(n, p, rng);
    Tensor::from_vec(a.m, a.m, a.v).expect("square")
}

fn sample_sq<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Sq {
    let m = 2 * n;
    let mut a = Sq::zeros(m);
    for i in 0..m {
        for j in i + 1..m {
            let q = if (i < n) == (j < n) { p } else { 1.0 - p };
            if rng.gen::<f64>() < q {
                a.v[i * m + j] = 1.0;
                a.v[j * m + i] = 1.0;
            }
        }
    }
    a
}

fn run_shards<T, F>(samples: usize, seed: u64, tag: u64, init: T, per_shard: F) -> Vec<T>
where
    T: Clone + Send + Sync,
    F: Fn(&mut T, usize, &mut tensorlab::rng::Rng) + Sync,
{
    let shards = samples.div_ceil(SHARD);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded(derive_seed(seed, &[tag, s as u64]));
            let count = SHARD.min(samples - s * SHARD);
            let mut acc = init.clone();
            per_shard(&mut acc, count, &mut rng);
            acc
        })
        .collect()
}

/// Estimates of every closed-form quantity. Each per-graph value is the
/// average over all entries of a relation, which is unbiased for the
/// per-entry expectation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimates {
    pub point: TheoryPoint,
    /// `[relation][power - 1]`.
    pub powers: [[Estimate; 4]; 3],
    /// `[relation][pair moment]` in [`super::PairMoment::ALL`] order.
    pub pairs: [[Estimate; 6]; 3],
    /// `[relation][direction]`, matching [`super::LossDeltaCoeffs::d`].
    pub deltas: [[Estimate; 3]; 3],
    /// `a`, `b`, `c` of the `E[A⁴ - A³]` decomposition.
    pub coeffs: [Estimate; 3],
}

#[derive(Clone, Default)]
struct MomentAcc {
    powers: [[Acc; 4]; 3],
    pairs: [[Acc; 6]; 3],
    deltas: [[Acc; 3]; 3],
    coeffs: [Acc; 3],
}

pub fn mc_moments(pt: TheoryPoint, samples: usize, seed: u64) -> Result<MomentEstimates> {
    if samples < 2 {
        return Err(MuseError::Precondition("need at least 2 samples".into()));
    }
    let n = pt.n;
    let m = 2 * n;
    let (p_mat, u_mat) = block_sq(n);
    let rel: Vec<usize> = (0..m * m).map(|k| Relation::of(k / m, k % m, n).index()).collect();
    let counts = [m as f64, (m * (n - 1)) as f64, (m * n) as f64];
    let shards = run_shards(samples, seed, 0x11, MomentAcc::default(), |acc, count, rng| {
        for _ in 0..count {
            let a = sample_sq(n, pt.p, rng);
            let a2 = a.mul(&a);
            let a3 = a2.mul(&a);
            let a4 = a3.mul(&a);
            let z = a.mul(&p_mat).mul(&a);
            let w = a.mul(&u_mat).mul(&a);
            let mut pw = [[0.0; 4]; 3];
            let mut pr = [[0.0; 6]; 3];
            for k in 0..m * m {
                let r = rel[k];
                let (x, y, zz, ww) = (a.v[k], a2.v[k], z.v[k], w.v[k]);
                for (slot, v) in pw[r].iter_mut().zip([x, y, a3.v[k], a4.v[k]]) {
                    *slot += v;
                }
                for (slot, v) in pr[r].iter_mut().zip([x * y, x * zz, x * ww, y * y, y * zz, y * ww]) {
                    *slot += v;
                }
            }
            for r in 0..3 {
                for (t, v) in pw[r].iter().enumerate() {
                    acc.powers[r][t].push(v / counts[r]);
                }
                for (t, v) in pr[r].iter().enumerate() {
                    acc.pairs[r][t].push(v / counts[r]);
                }
                let avg = |t: usize| pr[r][t] / counts[r];
                acc.deltas[r][0].push(avg(0) - avg(3));
                acc.deltas[r][1].push(avg(1) - avg(4));
                acc.deltas[r][2].push(avg(2) - avg(5));
            }
            let g = |r: usize| (pw[r][3] - pw[r][2]) / counts[r];
            acc.coeffs[0].push(g(0) - g(1));
            acc.coeffs[1].push(g(1));
            acc.coeffs[2].push(g(2));
        }
    });
    let mut total = MomentAcc::default();
    for s in &shards {
        for r in 0..3 {
            for t in 0..4 {
                total.powers[r][t].merge(&s.powers[r][t]);
            }
            for t in 0..6 {
                total.pairs[r][t].merge(&s.pairs[r][t]);
            }
            for t in 0..3 {
                total.deltas[r][t].merge(&s.deltas[r][t]);
            }
            total.coeffs[r].merge(&s.coeffs[r]);
        }
    }
    Ok(MomentEstimates {
        point: pt,
        powers: total.powers.map(|row| row.map(|a| a.estimate())),
        pairs: total.pairs.map(|row| row.map(|a| a.estimate())),
        deltas: total.deltas.map(|row| row.map(|a| a.estimate())),
        coeffs: total.coeffs.map(|a| a.estimate()),
    })
}

fn block_sq(n: usize) -> (Sq, Sq) {
    let m = 2 * n;
    let same = |i: usize, j: usize| (i < n) == (j < n);
    (
        Sq::from_fn(m, |i, j| f64::from(u8::from(same(i, j)))),
        Sq::from_fn(m, |i, j| f64::from(u8::from(!same(i, j)))),
    )
}

/// `||A - A W² A||_F²`.
fn linear_gae_loss(a: &Sq, w2: &Sq) -> f64 {
    let r = a.mul(w2).mul(a);
    a.v.iter().zip(&r.v).map(|(x, y)| (x - y).powi(2)).sum()
}

fn sq_from_tensor(t: &Tensor) -> Result<Sq> {
    if t.rows() != t.cols() {
        return Err(MuseError::Contract("weight matrix must be square".into()));
    }
    Ok(Sq {
        m: t.rows(),
        v: t.data().to_vec(),
    })
}

/// `I - gamma * 4 (aI + bP + cU)` from the closed-form expected gradient.
pub fn expected_update(train: TheoryPoint, gamma: f64) -> Tensor {
    let g = gradient_coeffs(train);
    let n = train.n;
    Tensor::from_fn(2 * n, 2 * n, |i, j| {
        f64::from(u8::from(i == j)) - 4.0 * gamma * g.entry(Relation::of(i, j, n))
    })
}

/// Paired per-graph estimate of `E[L(W) - L(I)]` over graphs at `test`.
pub fn mc_loss_change(w: &Tensor, test: TheoryPoint, samples: usize, seed: u64) -> Result<Estimate> {
    let w = sq_from_tensor(w)?;
    if w.m != 2 * test.n {
        return Err(MuseError::Contract(format!("weight is {0}x{0}, graphs have {1} nodes", w.m, 2 * test.n)));
    }
    if samples < 2 {
        return Err(MuseError::Precondition("need at least 2 samples".into()));
    }
    let w2 = w.mul(&w);
    let id = Sq::from_fn(w.m, |i, j| f64::from(u8::from(i == j)));
    let shards = run_shards(samples, seed, 0x22, Acc::default(), |acc, count, rng| {
        for _ in 0..count {
            let a = sample_sq(test.n, test.p, rng);
            acc.push(linear_gae_loss(&a, &w2) - linear_gae_loss(&a, &id));
        }
    });
    let mut total = Acc::default();
    shards.iter().for_each(|s| total.merge(s));
    Ok(total.estimate())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearGaeRun {
    pub loss_before: Estimate,
    pub loss_after: Estimate,
    /// Paired per-graph `L(W') - L(I)`.
    pub loss_change: Estimate,
    /// `4 * mean(A⁴ - A³)`, the empirical gradient at `W = I`.
    #[serde(skip)]
    pub grad: Tensor,
    /// Gradient entries averaged per relation (diag, same, diff).
    pub grad_groups: [Estimate; 3],
}

/// Samples training graphs, forms `W' = I - gamma * grad` from the empirical
/// mean gradient and evaluates the loss before and after on a fresh sample.
pub fn mc_linear_gae(pt: TheoryPoint, samples: usize, gamma: f64, seed: u64) -> Result<LinearGaeRun> {
    if samples < 2 {
        return Err(MuseError::Precondition("need at least 2 samples".into()));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(MuseError::Precondition(format!("step size {gamma} must be non-negative")));
    }
    let n = pt.n;
    let m = 2 * n;
    let rel: Vec<usize> = (0..m * m).map(|k| Relation::of(k / m, k % m, n).index()).collect();
    let counts = [m as f64, (m * (n - 1)) as f64, (m * n) as f64];
    let shards = run_shards(samples, seed, 0x33, (Sq::zeros(m), [Acc::default(); 3]), |acc, count, rng| {
        for _ in 0..count {
            let a = sample_sq(n, pt.p, rng);
            let a3 = a.mul(&a).mul(&a);
            let a4 = a3.mul(&a);
            let mut groups = [0.0; 3];
            for k in 0..m * m {
                let g = 4.0 * (a4.v[k] - a3.v[k]);
                acc.0.v[k] += g;
                groups[rel[k]] += g;
            }
            for r in 0..3 {
                acc.1[r].push(groups[r] / counts[r]);
            }
        }
    });
    let mut sum = Sq::zeros(m);
    let mut groups = [Acc::default(); 3];
    for (s, g) in &shards {
        for (x, y) in sum.v.iter_mut().zip(&s.v) {
            *x += y;
        }
        for r in 0..3 {
            groups[r].merge(&g[r]);
        }
    }
    let grad = Sq {
        m,
        v: sum.v.iter().map(|x| x / samples as f64).collect(),
    };
    let w = Sq::from_fn(m, |i, j| f64::from(u8::from(i == j)) - gamma * grad.at(i, j));
    let w2 = w.mul(&w);
    let id = Sq::from_fn(m, |i, j| f64::from(u8::from(i == j)));
    let evals = run_shards(samples, seed, 0x44, [Acc::default(); 3], |acc, count, rng| {
        for _ in 0..count {
            let a = sample_sq(n, pt.p, rng);
            let (before, after) = (linear_gae_loss(&a, &id), linear_gae_loss(&a, &w2));
            acc[0].push(before);
            acc[1].push(after);
            acc[2].push(after - before);
        }
    });
    let mut tot = [Acc::default(); 3];
    for e in &evals {
        for k in 0..3 {
            tot[k].merge(&e[k]);
        }
    }
    Ok(LinearGaeRun {
        loss_before: tot[0].estimate(),
        loss_after: tot[1].estimate(),
        loss_change: tot[2].estimate(),
        grad: Tensor::from_vec(m, m, grad.v).expect("square"),
        grad_groups: groups.map(|g| g.estimate()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_graph_is_simple() {
        let a = sample_adjacency(4, 0.7, &mut seeded(1));
        for i in 0..8 {
            assert_eq!(a.get(i, i), 0.0);
            for j in 0..8 {
                assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
    }

    #[test]
    fn expected_update_structure() {
        let pt = TheoryPoint::new(3, 0.8).unwrap();
        let g = gradient_coeffs(pt);
        let w = expected_update(pt, 0.01);
        assert!((w.get(0, 0) - (1.0 - 0.04 * (g.a + g.b))).abs() < 1e-12);
        assert!((w.get(0, 1) + 0.04 * g.b).abs() < 1e-12);
        assert!((w.get(0, 4) + 0.04 * g.c).abs() < 1e-12);
    }

    #[test]
    fn estimate_z_score() {
        let e = Estimate { mean: 1.0, se: 0.5, samples: 10 };
        assert_eq!(e.z_score(2.0), 2.0);
        let exact = Estimate { mean: 1.0, se: 0.0, samples: 10 };
        assert_eq!(exact.z_score(1.0), 0.0);
        assert!(exact.z_score(1.1).is_infinite());
    }
}
