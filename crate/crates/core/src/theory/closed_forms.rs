// Exact expectations for the two-block random graph, generated by walk
// enumeration. `Poly` tables are expanded forms; `*_factored` are the same
// polynomials in factored Horner form.

use super::poly::Poly;

pub(crate) const DIAG_A1: Poly = Poly(&[(0, 0, 0.0)]);
pub(crate) const DIAG_A2: Poly = Poly(&[(1, 0, 1.0), (0, 1, -1.0)]);
pub(crate) const DIAG_A3: Poly = Poly(&[(2, 3, 4.0), (2, 2, -6.0), (2, 1, 3.0), (1, 3, -6.0), (1, 2, 6.0), (1, 1, -3.0), (0, 3, 2.0)]);
pub(crate) const DIAG_A4: Poly = Poly(&[(3, 4, 8.0), (3, 3, -16.0), (3, 2, 12.0), (3, 1, -4.0), (3, 0, 1.0), (2, 4, -24.0), (2, 3, 40.0), (2, 2, -28.0), (2, 1, 8.0), (1, 4, 22.0), (1, 3, -24.0), (1, 2, 12.0), (1, 1, -4.0), (0, 4, -6.0), (0, 2, 4.0), (0, 1, -1.0)]);
pub(crate) const DIAG_XY: Poly = Poly(&[(0, 0, 0.0)]);
pub(crate) const DIAG_XZ: Poly = Poly(&[(0, 0, 0.0)]);
pub(crate) const DIAG_XW: Poly = Poly(&[(0, 0, 0.0)]);
pub(crate) const DIAG_YY: Poly = Poly(&[(2, 0, 1.0), (1, 2, -2.0), (0, 2, 2.0), (0, 1, -1.0)]);
pub(crate) const DIAG_YZ: Poly = Poly(&[(3, 2, 2.0), (3, 1, -2.0), (3, 0, 1.0), (2, 3, -2.0), (2, 2, -4.0), (2, 1, 3.0), (1, 3, 8.0), (1, 2, -4.0), (1, 1, -1.0), (0, 3, -6.0), (0, 2, 6.0), (0, 1, -1.0)]);
pub(crate) const DIAG_YW: Poly = Poly(&[(3, 2, -2.0), (3, 1, 2.0), (2, 3, 2.0), (2, 2, -2.0), (1, 3, -2.0), (1, 2, 4.0), (1, 1, -2.0)]);
pub(crate) const SAME_A1: Poly = Poly(&[(0, 1, 1.0)]);
pub(crate) const SAME_A2: Poly = Poly(&[(1, 2, 2.0), (1, 1, -2.0), (1, 0, 1.0), (0, 2, -2.0)]);
pub(crate) const SAME_A3: Poly = Poly(&[(2, 3, 4.0), (2, 2, -6.0), (2, 1, 3.0), (1, 3, -10.0), (1, 2, 10.0), (1, 1, -3.0), (0, 3, 6.0), (0, 2, -4.0), (0, 1, 1.0)]);
pub(crate) const SAME_A4: Poly = Poly(&[(3, 4, 8.0), (3, 3, -16.0), (3, 2, 12.0), (3, 1, -4.0), (3, 0, 1.0), (2, 4, -28.0), (2, 3, 48.0), (2, 2, -30.0), (2, 1, 6.0), (1, 4, 32.0), (1, 3, -40.0), (1, 2, 16.0), (1, 1, -2.0), (0, 4, -12.0), (0, 3, 12.0), (0, 2, -4.0)]);
pub(crate) const SAME_XY: Poly = Poly(&[(1, 3, 2.0), (1, 2, -2.0), (1, 1, 1.0), (0, 3, -2.0)]);
pub(crate) const SAME_XZ: Poly = Poly(&[(2, 3, 2.0), (2, 2, -2.0), (2, 1, 1.0), (1, 3, -4.0), (1, 2, 2.0), (0, 3, 4.0), (0, 2, -4.0), (0, 1, 1.0)]);
pub(crate) const SAME_XW: Poly = Poly(&[(2, 3, -2.0), (2, 2, 2.0), (1, 3, 4.0), (1, 2, -6.0), (1, 1, 2.0)]);
pub(crate) const SAME_YY: Poly = Poly(&[(2, 4, 4.0), (2, 3, -8.0), (2, 2, 8.0), (2, 1, -4.0), (2, 0, 1.0), (1, 4, -10.0), (1, 3, 12.0), (1, 2, -8.0), (1, 1, 2.0), (0, 4, 6.0), (0, 2, -2.0)]);
pub(crate) const SAME_YZ: Poly = Poly(&[(3, 4, 4.0), (3, 3, -8.0), (3, 2, 8.0), (3, 1, -4.0), (3, 0, 1.0), (2, 4, -12.0), (2, 3, 16.0), (2, 2, -10.0), (2, 1, 2.0), (1, 4, 12.0), (1, 3, -8.0), (1, 1, 1.0), (0, 4, -6.0), (0, 3, 6.0), (0, 2, -2.0)]);
pub(crate) const SAME_YW: Poly = Poly(&[(3, 4, -4.0), (3, 3, 8.0), (3, 2, -6.0), (3, 1, 2.0), (2, 4, 12.0), (2, 3, -20.0), (2, 2, 10.0), (2, 1, -2.0), (1, 4, -10.0), (1, 3, 16.0), (1, 2, -6.0)]);
pub(crate) const DIFF_A1: Poly = Poly(&[(0, 1, -1.0), (0, 0, 1.0)]);
pub(crate) const DIFF_A2: Poly = Poly(&[(1, 2, -2.0), (1, 1, 2.0), (0, 2, 2.0), (0, 1, -2.0)]);
pub(crate) const DIFF_A3: Poly = Poly(&[(2, 3, -4.0), (2, 2, 6.0), (2, 1, -3.0), (2, 0, 1.0), (1, 3, 10.0), (1, 2, -14.0), (1, 1, 4.0), (0, 3, -6.0), (0, 2, 8.0), (0, 1, -2.0)]);
pub(crate) const DIFF_A4: Poly = Poly(&[(3, 4, -8.0), (3, 3, 16.0), (3, 2, -12.0), (3, 1, 4.0), (2, 4, 28.0), (2, 3, -48.0), (2, 2, 24.0), (2, 1, -4.0), (1, 4, -32.0), (1, 3, 52.0), (1, 2, -22.0), (1, 1, 2.0), (0, 4, 12.0), (0, 3, -20.0), (0, 2, 10.0), (0, 1, -2.0)]);
pub(crate) const DIFF_XY: Poly = Poly(&[(1, 3, 2.0), (1, 2, -4.0), (1, 1, 2.0), (0, 3, -2.0), (0, 2, 4.0), (0, 1, -2.0)]);
pub(crate) const DIFF_XZ: Poly = Poly(&[(2, 3, 2.0), (2, 2, -4.0), (2, 1, 2.0), (1, 3, -4.0), (1, 2, 6.0), (1, 1, -2.0), (0, 3, 2.0), (0, 2, -2.0)]);
pub(crate) const DIFF_XW: Poly = Poly(&[(2, 3, -2.0), (2, 2, 4.0), (2, 1, -3.0), (2, 0, 1.0), (1, 3, 4.0), (1, 2, -6.0), (1, 1, 2.0), (0, 3, -2.0), (0, 2, 2.0)]);
pub(crate) const DIFF_YY: Poly = Poly(&[(2, 4, 4.0), (2, 3, -8.0), (2, 2, 4.0), (1, 4, -10.0), (1, 3, 20.0), (1, 2, -12.0), (1, 1, 2.0), (0, 4, 6.0), (0, 3, -12.0), (0, 2, 8.0), (0, 1, -2.0)]);
pub(crate) const DIFF_YZ: Poly = Poly(&[(3, 4, 4.0), (3, 3, -8.0), (3, 2, 4.0), (2, 4, -12.0), (2, 3, 24.0), (2, 2, -14.0), (2, 1, 2.0), (1, 4, 12.0), (1, 3, -22.0), (1, 2, 12.0), (1, 1, -2.0), (0, 4, -4.0), (0, 3, 6.0), (0, 2, -2.0)]);
pub(crate) const DIFF_YW: Poly = Poly(&[(3, 4, -4.0), (3, 3, 8.0), (3, 2, -6.0), (3, 1, 2.0), (2, 4, 12.0), (2, 3, -20.0), (2, 2, 10.0), (2, 1, -2.0), (1, 4, -10.0), (1, 3, 14.0), (1, 2, -4.0), (0, 4, 2.0), (0, 3, -2.0)]);
pub(crate) const D1_DP: Poly = Poly(&[(3, 3, -32.0), (3, 2, 48.0), (3, 1, -24.0), (3, 0, 4.0), (2, 3, 96.0), (2, 2, -108.0), (2, 1, 44.0), (2, 0, -5.0), (1, 3, -88.0), (1, 2, 54.0), (1, 1, -12.0), (1, 0, 1.0), (0, 3, 24.0), (0, 2, 6.0), (0, 1, -8.0), (0, 0, 1.0)]);
pub(crate) const D2_DP: Poly = Poly(&[(4, 3, -32.0), (4, 2, 48.0), (4, 1, -24.0), (4, 0, 4.0), (3, 3, 112.0), (3, 2, -132.0), (3, 1, 48.0), (3, 0, -3.0), (2, 3, -144.0), (2, 2, 114.0), (2, 1, -16.0), (2, 0, -3.0), (1, 3, 88.0), (1, 2, -54.0), (1, 0, 3.0), (0, 3, -24.0), (0, 2, 24.0), (0, 1, -8.0)]);
pub(crate) const D3_DP: Poly = Poly(&[(4, 3, 32.0), (4, 2, -48.0), (4, 1, 24.0), (4, 0, -4.0), (3, 3, -112.0), (3, 2, 132.0), (3, 1, -36.0), (3, 0, 1.0), (2, 3, 128.0), (2, 2, -126.0), (2, 1, 16.0), (2, 0, 2.0), (1, 3, -48.0), (1, 2, 42.0), (1, 1, -4.0)]);

pub(crate) fn diag_a3_factored(n: f64, p: f64) -> f64 {
    (n - 1.0)*p*(3.0*n + p*(-6.0*n + p*(4.0*n - 2.0)))
}

pub(crate) fn diag_a4_factored(n: f64, p: f64) -> f64 {
    n.powi(3) + p*(n*(n*(8.0 - 4.0*n) - 4.0) + p*(n*(n*(12.0*n - 28.0) + 12.0) + p*(n*(n*(40.0 - 16.0*n) - 24.0) + p*(n*(n*(8.0*n - 24.0) + 22.0) - 6.0)) + 4.0) - 1.0)
}

pub(crate) fn same_a3_factored(n: f64, p: f64) -> f64 {
    p*(n*(3.0*n - 3.0) + p*(n*(10.0 - 6.0*n) + p*(n*(4.0*n - 10.0) + 6.0) - 4.0) + 1.0)
}

pub(crate) fn same_a4_factored(n: f64, p: f64) -> f64 {
    n.powi(3) + p*(n*(n*(6.0 - 4.0*n) - 2.0) + p*(n*(n*(12.0*n - 30.0) + 16.0) + p*(n*(n*(48.0 - 16.0*n) - 40.0) + p*(n*(n*(8.0*n - 28.0) + 32.0) - 12.0) + 12.0) - 4.0))
}

pub(crate) fn diff_a3_factored(n: f64, p: f64) -> f64 {
    -(p - 1.0)*(n.powi(2) + p*(n*(4.0 - 2.0*n) + p*(n*(4.0*n - 10.0) + 6.0) - 2.0))
}

pub(crate) fn diff_a4_factored(n: f64, p: f64) -> f64 {
    -2.0*(n - 1.0)*p*(p - 1.0)*(2.0*n.powi(2) + p*(n*(6.0 - 4.0*n) + p*(n*(4.0*n - 10.0) + 6.0) - 4.0) + 1.0)
}

pub(crate) fn coeff_a_factored(n: f64, p: f64) -> f64 {
    2.0*p*(n*(n - 1.0) + p*(n.powi(2) + p*(n*(6.0 - 4.0*n) + p*(n*(2.0*n - 5.0) + 3.0) - 4.0) + 2.0))
}

pub(crate) fn coeff_b_factored(n: f64, p: f64) -> f64 {
    n.powi(3) + p*(n*(n*(3.0 - 4.0*n) + 1.0) + p*(n*(n*(12.0*n - 24.0) + 6.0) + p*(n*(n*(44.0 - 16.0*n) - 30.0) + p*(n*(n*(8.0*n - 28.0) + 32.0) - 12.0) + 6.0)) - 1.0)
}

pub(crate) fn coeff_c_factored(n: f64, p: f64) -> f64 {
    -(p - 1.0)*(-n.powi(2) + p*(n*(n*(4.0*n - 2.0) - 2.0) + p*(n*(n*(16.0 - 8.0*n) - 10.0) + p*(n*(n*(8.0*n - 28.0) + 32.0) - 12.0) + 2.0)))
}

pub(crate) fn d11_factored(n: f64, p: f64) -> f64 {
    -n.powi(2) + p*(p*(2.0*n - 2.0) + 1.0)
}

pub(crate) fn d12_factored(n: f64, p: f64) -> f64 {
    -n.powi(3) + p*(n*(n*(2.0*n - 3.0) + 1.0) + p*(n*(n*(4.0 - 2.0*n) + 4.0) + p*(n*(2.0*n - 8.0) + 6.0) - 6.0) + 1.0)
}

pub(crate) fn d13_factored(n: f64, p: f64) -> f64 {
    -2.0*(n - 1.0)*n*p*(p - 1.0)*(-n + p - 1.0)
}

pub(crate) fn d21_factored(n: f64, p: f64) -> f64 {
    -(n.powi(2) + p*(n*(1.0 - 4.0*n) + p*(n*(8.0*n - 6.0) + p*(n*(10.0 - 8.0*n) + p*(n*(4.0*n - 10.0) + 6.0) + 2.0) - 2.0)))
}

pub(crate) fn d22_factored(n: f64, p: f64) -> f64 {
    -(n.powi(3) + p*(n*(n*(1.0 - 4.0*n) + 1.0) + p*(n*(n*(8.0*n - 8.0) - 2.0) + p*(n*(n*(14.0 - 8.0*n) - 4.0) + p*(n*(n*(4.0*n - 12.0) + 12.0) - 6.0) + 2.0) + 2.0) - 1.0))
}

pub(crate) fn d23_factored(n: f64, p: f64) -> f64 {
    2.0*n*p*(p - 1.0)*(n*(n - 1.0) + p*(n*(3.0 - 2.0*n) + p*(n*(2.0*n - 6.0) + 5.0) - 1.0) - 1.0)
}

pub(crate) fn d31_factored(n: f64, p: f64) -> f64 {
    -2.0*(n - 1.0)*p.powi(2)*(p - 1.0)*(-2.0*n + p*(2.0*n - 3.0) + 2.0)
}

pub(crate) fn d32_factored(n: f64, p: f64) -> f64 {
    -2.0*(n - 1.0)*p.powi(2)*(p - 1.0)*(n*(3.0 - 2.0*n) + p*(n*(2.0*n - 4.0) + 2.0))
}

pub(crate) fn d33_factored(n: f64, p: f64) -> f64 {
    (p - 1.0)*(-n.powi(2) + p*(n*(2.0*n.powi(2) - 2.0) + p*(n.powi(2)*(6.0 - 4.0*n) + p*(n*(n*(4.0*n - 12.0) + 10.0) - 2.0) - 2.0)))
}

pub(crate) fn d1_factored(n: f64, p: f64) -> f64 {
    -(n.powi(3) + p*(n*(n*(5.0 - 4.0*n) - 1.0) + p*(n*(n*(12.0*n - 22.0) + 6.0) + p*(n*(n*(36.0 - 16.0*n) - 18.0) + p*(n*(n*(8.0*n - 24.0) + 22.0) - 6.0) - 2.0) + 4.0) - 1.0))
}

pub(crate) fn d1_dp_factored(n: f64, p: f64) -> f64 {
    -(n*(n*(5.0 - 4.0*n) - 1.0) + p*(n*(n*(24.0*n - 44.0) + 12.0) + p*(n*(n*(108.0 - 48.0*n) - 54.0) + p*(n*(n*(32.0*n - 96.0) + 88.0) - 24.0) - 6.0) + 8.0) - 1.0)
}

pub(crate) fn d2_factored(n: f64, p: f64) -> f64 {
    -(n.powi(4) + p*(n*(n*(n*(3.0 - 4.0*n) + 3.0) - 3.0) + p*(n.powi(2)*(n*(12.0*n - 24.0) + 8.0) + p*(n*(n*(n*(44.0 - 16.0*n) - 38.0) + 18.0) + p*(n*(n*(n*(8.0*n - 28.0) + 36.0) - 22.0) + 6.0) - 8.0) + 4.0)))
}

pub(crate) fn d2_dp_factored(n: f64, p: f64) -> f64 {
    -(n*(n*(n*(3.0 - 4.0*n) + 3.0) - 3.0) + p*(n.powi(2)*(n*(24.0*n - 48.0) + 16.0) + p*(n*(n*(n*(132.0 - 48.0*n) - 114.0) + 54.0) + p*(n*(n*(n*(32.0*n - 112.0) + 144.0) - 88.0) + 24.0) - 24.0) + 8.0))
}

pub(crate) fn d3_factored(n: f64, p: f64) -> f64 {
    n*(p - 1.0)*(-n.powi(2) + p*(n*(n*(4.0*n - 2.0) - 2.0) + p*(n*(n*(16.0 - 8.0*n) - 10.0) + p*(n*(n*(8.0*n - 28.0) + 32.0) - 12.0) + 2.0)))
}

pub(crate) fn d3_dp_factored(n: f64, p: f64) -> f64 {
    n*(n*(n*(1.0 - 4.0*n) + 2.0) + p*(n*(n*(24.0*n - 36.0) + 16.0) + p*(n*(n*(132.0 - 48.0*n) - 126.0) + p*(n*(n*(32.0*n - 112.0) + 128.0) - 48.0) + 42.0) - 4.0))
}
