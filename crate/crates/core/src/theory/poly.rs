/// Polynomial in `(N, p)` stored as `(power of N, power of p, coefficient)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Poly(pub &'static [(i32, i32, f64)]);

impl Poly {
    pub(crate) fn eval(&self, n: f64, p: f64) -> f64 {
        self.0.iter().map(|&(i, j, c)| c * n.powi(i) * p.powi(j)).sum()
    }

    /// Partial derivative in `p`.
    pub(crate) fn dp(&self, n: f64, p: f64) -> f64 {
        self.0
            .iter()
            .filter(|t| t.1 > 0)
            .map(|&(i, j, c)| c * f64::from(j) * n.powi(i) * p.powi(j - 1))
            .sum()
    }
}
