//! Closed-form analysis of the linear graph autoencoder `Â = A W² A` on
//! two-block random graphs (two communities of `N` nodes, within-block edge
//! probability `p`, across-block `1 - p`), plus a Monte-Carlo oracle.
//!
//! Gradients are decomposed as `aI + bP + cU`, with `P` the within-block
//! ones matrix (diagonal included) and `U` the across-block ones matrix.

mod closed_forms;
pub mod mc;
mod poly;
pub mod printed;
pub mod report;

use serde::Serialize;
use tensorlab::Tensor;

use crate::error::{MuseError, Result};
use closed_forms as cf;
use poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoryPoint {
    /// Nodes per community; the graph has `2N` nodes.
    pub n: usize,
    pub p: f64,
}

impl TheoryPoint {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(MuseError::Range(format!("community size N = {n} must be at least 2")));
        }
        if !(p > 0.5 && p <= 1.0) {
            return Err(MuseError::Range(format!("p = {p} outside (0.5, 1]")));
        }
        Ok(TheoryPoint { n, p })
    }

    /// `p = (tau + 1) / 2`.
    pub fn from_tau(n: usize, tau: f64) -> Result<Self> {
        Self::new(n, (tau + 1.0) / 2.0)
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Diag,
    SameGroup,
    DiffGroup,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Diag, Relation::SameGroup, Relation::DiffGroup];

    /// Relation of `(i, j)` in a graph whose first `n` nodes form block 0.
    pub fn of(i: usize, j: usize, n: usize) -> Relation {
        if i == j {
            Relation::Diag
        } else if (i < n) == (j < n) {
            Relation::SameGroup
        } else {
            Relation::DiffGroup
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Products of `x = A_ij`, `y = (A²)_ij`, `z = (APA)_ij` and `w = (AUA)_ij`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PairMoment {
    XY,
    XZ,
    XW,
    YY,
    YZ,
    YW,
}

impl PairMoment {
    pub const ALL: [PairMoment; 6] = [
        PairMoment::XY,
        PairMoment::XZ,
        PairMoment::XW,
        PairMoment::YY,
        PairMoment::YZ,
        PairMoment::YW,
    ];
}

const POWERS: [[Poly; 4]; 3] = [
    [cf::DIAG_A1, cf::DIAG_A2, cf::DIAG_A3, cf::DIAG_A4],
    [cf::SAME_A1, cf::SAME_A2, cf::SAME_A3, cf::SAME_A4],
    [cf::DIFF_A1, cf::DIFF_A2, cf::DIFF_A3, cf::DIFF_A4],
];

const PAIRS: [[Poly; 6]; 3] = [
    [cf::DIAG_XY, cf::DIAG_XZ, cf::DIAG_XW, cf::DIAG_YY, cf::DIAG_YZ, cf::DIAG_YW],
    [cf::SAME_XY, cf::SAME_XZ, cf::SAME_XW, cf::SAME_YY, cf::SAME_YZ, cf::SAME_YW],
    [cf::DIFF_XY, cf::DIFF_XZ, cf::DIFF_XW, cf::DIFF_YY, cf::DIFF_YZ, cf::DIFF_YW],
];

/// `E[(A^power)_ij]` for an entry of the given relation.
pub fn expected_moment(pt: TheoryPoint, relation: Relation, power: u32) -> Result<f64> {
    if !(1..=4).contains(&power) {
        return Err(MuseError::Contract(format!("moment power {power} outside 1..=4")));
    }
    Ok(POWERS[relation.index()][power as usize - 1].eval(pt.nf(), pt.p))
}

/// Third and fourth moments from the factored forms.
pub fn expected_moment_factored(pt: TheoryPoint, relation: Relation, power: u32) -> Result<f64> {
    let (n, p) = (pt.nf(), pt.p);
    Ok(match (relation, power) {
        (Relation::Diag, 3) => cf::diag_a3_factored(n, p),
        (Relation::Diag, 4) => cf::diag_a4_factored(n, p),
        (Relation::SameGroup, 3) => cf::same_a3_factored(n, p),
        (Relation::SameGroup, 4) => cf::same_a4_factored(n, p),
        (Relation::DiffGroup, 3) => cf::diff_a3_factored(n, p),
        (Relation::DiffGroup, 4) => cf::diff_a4_factored(n, p),
        _ => return Err(MuseError::Contract(format!("no factored form for power {power}"))),
    })
}

pub fn expected_pair_moment(pt: TheoryPoint, relation: Relation, m: PairMoment) -> f64 {
    PAIRS[relation.index()][m as usize].eval(pt.nf(), pt.p)
}

/// `E[A⁴ - A³] = aI + bP + cU`; the loss gradient at `W = I` is four times
/// this matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GradientCoeffs {
    /// Entry of `aI + bP + cU` at the given relation.
    pub fn entry(&self, relation: Relation) -> f64 {
        match relation {
            Relation::Diag => self.a + self.b,
            Relation::SameGroup => self.b,
            Relation::DiffGroup => self.c,
        }
    }
}

fn gap(pt: TheoryPoint, r: Relation) -> f64 {
    let row = &POWERS[r.index()];
    row[3].eval(pt.nf(), pt.p) - row[2].eval(pt.nf(), pt.p)
}

pub fn gradient_coeffs(pt: TheoryPoint) -> GradientCoeffs {
    let same = gap(pt, Relation::SameGroup);
    GradientCoeffs {
        a: gap(pt, Relation::Diag) - same,
        b: same,
        c: gap(pt, Relation::DiffGroup),
    }
}

/// The same coefficients from the factored forms.
pub fn gradient_coeffs_factored(pt: TheoryPoint) -> GradientCoeffs {
    let (n, p) = (pt.nf(), pt.p);
    GradientCoeffs {
        a: cf::coeff_a_factored(n, p),
        b: cf::coeff_b_factored(n, p),
        c: cf::coeff_c_factored(n, p),
    }
}

/// `d[r][k]` for relation `r` (diag, same, diff) and direction `k`:
/// `E[xy] - E[y²]`, `E[xz] - E[yz]`, `E[xw] - E[yw]`. The combined
/// `d_k = d[0][k] + (N-1) d[1][k] + N d[2][k]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossDeltaCoeffs {
    pub d: [[f64; 3]; 3],
    pub combined: [f64; 3],
}

const DIRECTIONS: [(PairMoment, PairMoment); 3] =
    [(PairMoment::XY, PairMoment::YY), (PairMoment::XZ, PairMoment::YZ), (PairMoment::XW, PairMoment::YW)];

fn combine(n: f64, d: &[[f64; 3]; 3]) -> [f64; 3] {
    std::array::from_fn(|k| d[0][k] + (n - 1.0) * d[1][k] + n * d[2][k])
}

pub fn loss_delta_coeffs(pt: TheoryPoint) -> LossDeltaCoeffs {
    let d: [[f64; 3]; 3] = std::array::from_fn(|r| {
        std::array::from_fn(|k| {
            let (x, y) = DIRECTIONS[k];
            PAIRS[r][x as usize].eval(pt.nf(), pt.p) - PAIRS[r][y as usize].eval(pt.nf(), pt.p)
        })
    });
    LossDeltaCoeffs {
        combined: combine(pt.nf(), &d),
        d,
    }
}

pub fn loss_delta_coeffs_factored(pt: TheoryPoint) -> LossDeltaCoeffs {
    let (n, p) = (pt.nf(), pt.p);
    let d = [
        [cf::d11_factored(n, p), cf::d12_factored(n, p), cf::d13_factored(n, p)],
        [cf::d21_factored(n, p), cf::d22_factored(n, p), cf::d23_factored(n, p)],
        [cf::d31_factored(n, p), cf::d32_factored(n, p), cf::d33_factored(n, p)],
    ];
    LossDeltaCoeffs {
        d,
        combined: [cf::d1_factored(n, p), cf::d2_factored(n, p), cf::d3_factored(n, p)],
    }
}

/// `∂d_k/∂p` from the expanded derivative tables.
pub fn loss_delta_derivatives(pt: TheoryPoint) -> [f64; 3] {
    [cf::D1_DP, cf::D2_DP, cf::D3_DP].map(|q| q.eval(pt.nf(), pt.p))
}

/// `∂d_k/∂p` by differentiating the pair-moment tables term by term.
pub fn loss_delta_derivatives_termwise(pt: TheoryPoint) -> [f64; 3] {
    let d: [[f64; 3]; 3] = std::array::from_fn(|r| {
        std::array::from_fn(|k| {
            let (x, y) = DIRECTIONS[k];
            PAIRS[r][x as usize].dp(pt.nf(), pt.p) - PAIRS[r][y as usize].dp(pt.nf(), pt.p)
        })
    });
    combine(pt.nf(), &d)
}

pub fn loss_delta_derivatives_factored(pt: TheoryPoint) -> [f64; 3] {
    let (n, p) = (pt.nf(), pt.p);
    [cf::d1_dp_factored(n, p), cf::d2_dp_factored(n, p), cf::d3_dp_factored(n, p)]
}

/// `a(train) d_1(test) + b(train) d_2(test) + c(train) d_3(test)`. The
/// expected loss change on test graphs after one step of size `gamma` on the
/// expected training gradient is `32 N gamma` times this, to first order.
/// Both points must share `N`.
pub fn theorem1_margin(train: TheoryPoint, test: TheoryPoint) -> f64 {
    let g = gradient_coeffs(train);
    let d = loss_delta_coeffs(test).combined;
    g.a * d[0] + g.b * d[1] + g.c * d[2]
}

/// Whether [`theorem2_speed`] rejects points outside the proved region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Enforce,
    Override,
}

fn check_theorem2_scope(p_test: f64, p_train: f64, n: usize, scope: Scope) -> Result<()> {
    if scope == Scope::Override {
        return Ok(());
    }
    const TOL: f64 = 1e-9;
    if n < 17 {
        return Err(MuseError::Range(format!("N = {n} below 17")));
    }
    if !(p_train > 0.5 && p_train <= 0.99 + TOL) {
        return Err(MuseError::Range(format!("training p = {p_train} outside (0.5, 0.99]")));
    }
    if p_test < p_train + 0.01 - TOL || p_test > 1.0 + TOL {
        return Err(MuseError::Range(format!("test p = {p_test} outside [p_train + 0.01, 1]")));
    }
    Ok(())
}

/// `f(p, p', N) = a(p') ∂d_1/∂p + b(p') ∂d_2/∂p + c(p') ∂d_3/∂p` with test
/// strength `p` and training strength `p'`.
pub fn theorem2_speed(p_test: f64, p_train: f64, n: usize, scope: Scope) -> Result<f64> {
    check_theorem2_scope(p_test, p_train, n, scope)?;
    let g = gradient_coeffs(TheoryPoint::new(n, p_train)?);
    let dd = loss_delta_derivatives(TheoryPoint::new(n, p_test)?);
    Ok(g.a * dd[0] + g.b * dd[1] + g.c * dd[2])
}

/// `f(p2, p1, N) - f(p1, p1, N)`.
pub fn theorem2_gap(p2: f64, p1: f64, n: usize, scope: Scope) -> Result<f64> {
    check_theorem2_scope(p2, p1, n, scope)?;
    Ok(theorem2_speed(p2, p1, n, Scope::Override)? - theorem2_speed(p1, p1, n, Scope::Override)?)
}

/// The same gap from the printed polynomials.
pub fn theorem2_gap_printed(p2: f64, p1: f64, n: usize) -> f64 {
    let nf = n as f64;
    printed::speed(p2, p1, nf) - printed::speed(p1, p1, nf)
}

/// Second-order coefficients of `(W')² = (1 + α1) I + α2 P + α3 U` for
/// `W' = I - gamma * 4 (aI + bP + cU)`.
pub fn alphas(g: GradientCoeffs, gamma: f64, n: usize) -> [f64; 3] {
    let nf = n as f64;
    let [e1, e2, e3] = [g.a, g.b, g.c].map(|v| -4.0 * gamma * v);
    [
        2.0 * e1 + e1 * e1,
        2.0 * e2 + nf * e2 * e2 + nf * e3 * e3 + 2.0 * e1 * e2,
        2.0 * e3 + 2.0 * e1 * e3 + 2.0 * nf * e2 * e3,
    ]
}

/// `(P, U)` for two blocks of `n` nodes.
pub fn block_matrices(n: usize) -> (Tensor, Tensor) {
    let m = 2 * n;
    let same = |i: usize, j: usize| (i < n) == (j < n);
    (
        Tensor::from_fn(m, m, |i, j| f64::from(u8::from(same(i, j)))),
        Tensor::from_fn(m, m, |i, j| f64::from(u8::from(!same(i, j)))),
    )
}
