//! Coefficient polynomials exactly as printed alongside the theorems. They
//! differ from the true expectations in [`super::closed_forms`]; they are
//! kept to report what the printed proof computes.

/// Printed `a`.
pub fn coeff_a(n: f64, p: f64) -> f64 {
    let q = 1.0 - p;
    3.0 * (n - 2.0) * (n - 3.0) * p.powi(4) + 2.0 * n * (4.0 * n - 6.0) * p * q * q + n * (n - 1.0) * q.powi(4)
}

/// Printed `b`.
pub fn coeff_b(n: f64, p: f64) -> f64 {
    let q = 1.0 - p;
    (n - 2.0) * (n - 3.0) * p.powi(3) * ((n - 4.0) * p - 1.0)
        + n * (3.0 * n - 5.0) * p * q * q * (2.0 * (n - 2.0) * p - 1.0)
        + n * (n - 1.0) * (n - 2.0) * q.powi(4)
}

/// Printed `c`.
pub fn coeff_c(n: f64, p: f64) -> f64 {
    let q = 1.0 - p;
    let k = 4.0 * (n - 2.0).powi(2) * p;
    (n - 1.0) * p * p * q * (k - 3.0 * n + 5.0) + (n - 1.0) * q.powi(3) * (k - n + 1.0)
}

/// Printed `∂d_1/∂p`.
pub fn d1_dp(n: f64, p: f64) -> f64 {
    4.0 * n.powi(4) * (1.0 - 4.0 * p + 6.0 * p.powi(2) - 4.0 * p.powi(3))
        + n.powi(3) * (-6.0 + 34.0 * p - 66.0 * p.powi(2) + 64.0 * p.powi(3))
        + n.powi(2) * (4.0 - 34.0 * p + 87.0 * p.powi(2) - 104.0 * p.powi(3))
        + n * (-2.0 + 24.0 * p - 72.0 * p.powi(2) + 80.0 * p.powi(3))
        + (1.0 - 8.0 * p + 27.0 * p.powi(2) - 24.0 * p.powi(3))
}

/// Printed `∂d_2/∂p`.
pub fn d2_dp(n: f64, p: f64) -> f64 {
    4.0 * n.powi(4) * (1.0 - 2.0 * p).powi(3)
        + 2.0 * n.powi(3) * (-2.0 + 31.0 * p - 84.0 * p.powi(2) + 68.0 * p.powi(3))
        + n.powi(2) * (1.0 - 66.0 * p + 231.0 * p.powi(2) - 208.0 * p.powi(3))
        + n * (-1.0 + 44.0 * p - 156.0 * p.powi(2) + 128.0 * p.powi(3))
        + (1.0 - 16.0 * p + 45.0 * p.powi(2) - 24.0 * p.powi(3))
}

/// Printed `∂d_3/∂p`.
pub fn d3_dp(n: f64, p: f64) -> f64 {
    4.0 * n.powi(4) * (-1.0 + 2.0 * p).powi(3)
        + n.powi(3) * (3.0 - 46.0 * p + 144.0 * p.powi(2) - 116.0 * p.powi(3))
        + n.powi(2) * (-1.0 + 26.0 * p - 135.0 * p.powi(2) + 132.0 * p.powi(3))
        + n * (-1.0 + 2.0 * p + 36.0 * p.powi(2) - 48.0 * p.powi(3))
}

/// Printed `f(p, p', N)` with test strength `p` and training strength `p'`.
pub fn speed(p_test: f64, p_train: f64, n: f64) -> f64 {
    coeff_a(n, p_train) * d1_dp(n, p_test) + coeff_b(n, p_train) * d2_dp(n, p_test) + coeff_c(n, p_train) * d3_dp(n, p_test)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_values_at_p_one() {
        assert_eq!(coeff_a(6.0, 1.0), 36.0);
        assert_eq!(coeff_b(6.0, 1.0), 12.0);
        assert_eq!(coeff_c(6.0, 1.0), 0.0);
    }

    #[test]
    fn printed_speed_matches_expanded_product() {
        // The printed closed form of f, transcribed term by term.
        let f = |p: f64, q: f64, n: f64| {
            -((-1.0 + n)
                * n
                * (-1.0 + 2.0 * p + 36.0 * p.powi(2) - 48.0 * p.powi(3)
                    + 4.0 * n.powi(3) * (-1.0 + 2.0 * p).powi(3)
                    + n.powi(2) * (3.0 - 46.0 * p + 144.0 * p.powi(2) - 116.0 * p.powi(3))
                    + n * (-1.0 + 26.0 * p - 135.0 * p.powi(2) + 132.0 * p.powi(3)))
                * (-1.0 + q)
                * (1.0 + 14.0 * q - 26.0 * q.powi(2) + 32.0 * q.powi(3) + 4.0 * n.powi(2) * q * (1.0 - 2.0 * q + 2.0 * q.powi(2))
                    - n * (1.0 + 14.0 * q - 28.0 * q.powi(2) + 32.0 * q.powi(3))))
                - (-1.0 + 8.0 * p - 27.0 * p.powi(2) + 24.0 * p.powi(3)
                    + n * (2.0 - 24.0 * p + 72.0 * p.powi(2) - 80.0 * p.powi(3))
                    + n.powi(3) * (6.0 - 34.0 * p + 66.0 * p.powi(2) - 64.0 * p.powi(3))
                    + 4.0 * n.powi(4) * (-1.0 + 4.0 * p - 6.0 * p.powi(2) + 4.0 * p.powi(3))
                    + n.powi(2) * (-4.0 + 34.0 * p - 87.0 * p.powi(2) + 104.0 * p.powi(3)))
                    * (18.0 * q.powi(4) + n.powi(2) * (1.0 + 4.0 * q - 10.0 * q.powi(2) + 4.0 * q.powi(3) + 4.0 * q.powi(4))
                        - n * (1.0 + 8.0 * q - 18.0 * q.powi(2) + 8.0 * q.powi(3) + 16.0 * q.powi(4)))
                - (-1.0 + 16.0 * p - 45.0 * p.powi(2) + 24.0 * p.powi(3) + 4.0 * n.powi(4) * (-1.0 + 2.0 * p).powi(3)
                    + n * (1.0 - 44.0 * p + 156.0 * p.powi(2) - 128.0 * p.powi(3))
                    - 2.0 * n.powi(3) * (-2.0 + 31.0 * p - 84.0 * p.powi(2) + 68.0 * p.powi(3))
                    + n.powi(2) * (-1.0 + 66.0 * p - 231.0 * p.powi(2) + 208.0 * p.powi(3)))
                    * (-6.0 * q.powi(3) * (1.0 + 4.0 * q)
                        + n.powi(2) * (-3.0 + 9.0 * q - 34.0 * q.powi(2) + 52.0 * q.powi(3) - 34.0 * q.powi(4))
                        + n.powi(3) * (1.0 - 4.0 * q + 12.0 * q.powi(2) - 16.0 * q.powi(3) + 8.0 * q.powi(4))
                        + n * (2.0 - 3.0 * q + 22.0 * q.powi(2) - 38.0 * q.powi(3) + 48.0 * q.powi(4)))
        };
        for n in [17.0, 25.0, 40.0] {
            for (p, q) in [(0.52, 0.51), (0.9, 0.6), (1.0, 0.75)] {
                let (a, b) = (speed(p, q, n), f(p, q, n));
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }
}
