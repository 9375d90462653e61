//! Grid checks of the theorems and the closed forms, serialisable as JSON.

use std::str::FromStr;

use serde::Serialize;

use super::mc::{mc_moments, Estimate};
use super::*;

pub const THM1_SIZES: [usize; 5] = [6, 8, 10, 17, 25];
pub const THM1_PS: [f64; 6] = [0.51, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const THM2_SIZES: [usize; 3] = [17, 25, 40];
pub const THM2_P1: [f64; 5] = [0.51, 0.6, 0.75, 0.9, 0.99];

/// Standard-error multiple accepted by the Monte-Carlo comparisons.
pub const MC_SIGMAS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Moments,
    Thm1,
    Thm2,
    All,
}

impl FromStr for Check {
    type Err = MuseError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "moments" => Ok(Check::Moments),
            "thm1" => Ok(Check::Thm1),
            "thm2" => Ok(Check::Thm2),
            "all" => Ok(Check::All),
            _ => Err(MuseError::Config(format!("unknown theory check {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Thm1Cell {
    pub n: usize,
    pub p_train: f64,
    pub p_test: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Thm1Check {
    pub cells: Vec<Thm1Cell>,
    pub violations: usize,
    pub passed: bool,
}

pub fn theorem1_check() -> Thm1Check {
    let mut cells = Vec::new();
    for &n in &THM1_SIZES {
        for &p_train in &THM1_PS {
            for &p_test in &THM1_PS {
                let margin = theorem1_margin(
                    TheoryPoint::new(n, p_train).expect("grid point"),
                    TheoryPoint::new(n, p_test).expect("grid point"),
                );
                cells.push(Thm1Cell {
                    n,
                    p_train,
                    p_test,
                    margin,
                    pass: margin < 0.0,
                });
            }
        }
    }
    let violations = cells.iter().filter(|c| !c.pass).count();
    Thm1Check {
        cells,
        violations,
        passed: violations == 0,
    }
}

/// `p1 + 0.01, p1 + 0.06, ...` up to 1, rounded to two decimals.
pub fn theorem2_test_points(p1: f64) -> Vec<f64> {
    (0..)
        .map(|k| ((p1 + 0.01 + 0.05 * f64::from(k)) * 100.0).round() / 100.0)
        .take_while(|&p| p <= 1.0 + 1e-12)
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Thm2Cell {
    pub n: usize,
    pub p1: f64,
    pub p2: f64,
    /// `f(p2, p1) - f(p1, p1)` from the exact polynomials.
    pub gap: f64,
    /// The same from the printed polynomials.
    pub gap_printed: f64,
    /// Direct first-order comparison: `margin(p1 -> p2) - margin(p1 -> p1)`;
    /// negative means the larger decrease is on the `p2` graphs.
    pub margin_difference: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Thm2Check {
    pub cells: Vec<Thm2Cell>,
    pub violations: usize,
    pub violations_printed: usize,
    pub violations_direct: usize,
    pub passed: bool,
}

pub fn theorem2_check() -> Thm2Check {
    let mut cells = Vec::new();
    for &n in &THM2_SIZES {
        for &p1 in &THM2_P1 {
            let train = TheoryPoint::new(n, p1).expect("grid point");
            for p2 in theorem2_test_points(p1) {
                let gap = theorem2_gap(p2, p1, n, Scope::Enforce).expect("grid inside theorem scope");
                let test = TheoryPoint::new(n, p2).expect("grid point");
                cells.push(Thm2Cell {
                    n,
                    p1,
                    p2,
                    gap,
                    gap_printed: theorem2_gap_printed(p2, p1, n),
                    margin_difference: theorem1_margin(train, test) - theorem1_margin(train, train),
                    pass: gap < 0.0,
                });
            }
        }
    }
    let count = |f: &dyn Fn(&Thm2Cell) -> bool| cells.iter().filter(|c| f(c)).count();
    let violations = count(&|c| !c.pass);
    let violations_printed = count(&|c| c.gap_printed >= 0.0);
    let violations_direct = count(&|c| c.margin_difference >= 0.0);
    Thm2Check {
        violations,
        violations_printed,
        violations_direct,
        passed: violations == 0,
        cells,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct McCell {
    pub quantity: String,
    pub closed_form: f64,
    pub estimate: Estimate,
    pub z: f64,
    pub pass: bool,
}

impl McCell {
    fn new(quantity: String, closed_form: f64, estimate: Estimate) -> Self {
        let z = estimate.z_score(closed_form);
        McCell {
            quantity,
            closed_form,
            estimate,
            z,
            pass: z <= MC_SIGMAS,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentCheck {
    pub point: TheoryPoint,
    pub samples: usize,
    pub cells: Vec<McCell>,
    /// Largest `|aI + bP + cU - E[A⁴ - A³]|` over relations, closed forms only.
    pub decomposition_error: f64,
    pub passed: bool,
}

/// Powers, pair moments, `d` blocks and `a, b, c` against one Monte-Carlo run.
pub fn moment_check(pt: TheoryPoint, samples: usize, seed: u64) -> Result<MomentCheck> {
    let est = mc_moments(pt, samples, seed)?;
    let names = ["diag", "same", "diff"];
    let mut cells = Vec::new();
    for r in Relation::ALL {
        let i = r as usize;
        for k in 1..=4u32 {
            cells.push(McCell::new(
                format!("E[A^{k}] {}", names[i]),
                expected_moment(pt, r, k)?,
                est.powers[i][k as usize - 1],
            ));
        }
    }
    let d = loss_delta_coeffs(pt);
    for r in 0..3 {
        for k in 0..3 {
            cells.push(McCell::new(format!("d{}{}", r + 1, k + 1), d.d[r][k], est.deltas[r][k]));
        }
    }
    let g = gradient_coeffs(pt);
    for (name, v, e) in [("a", g.a, est.coeffs[0]), ("b", g.b, est.coeffs[1]), ("c", g.c, est.coeffs[2])] {
        cells.push(McCell::new(name.to_string(), v, e));
    }
    let decomposition_error = Relation::ALL
        .iter()
        .map(|&r| {
            let direct = expected_moment(pt, r, 4).expect("power in range") - expected_moment(pt, r, 3).expect("power in range");
            (g.entry(r) - direct).abs()
        })
        .fold(0.0, f64::max);
    let passed = cells.iter().all(|c| c.pass) && decomposition_error <= 1e-12 * g.b.abs().max(1.0);
    Ok(MomentCheck {
        point: pt,
        samples,
        cells,
        decomposition_error,
        passed,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TheoryReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thm1: Option<Thm1Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thm2: Option<Thm2Check>,
}

impl TheoryReport {
    pub fn passed(&self) -> bool {
        self.moments.as_ref().is_none_or(|m| m.passed)
            && self.thm1.as_ref().is_none_or(|m| m.passed)
            && self.thm2.as_ref().is_none_or(|m| m.passed)
    }
}

/// Runs the selected checks; moments use `N = 6, p = 0.7`.
pub fn run_checks(check: Check, samples: usize, seed: u64) -> Result<TheoryReport> {
    let mut report = TheoryReport::default();
    if matches!(check, Check::Moments | Check::All) {
        report.moments = Some(moment_check(TheoryPoint::new(6, 0.7)?, samples, seed)?);
    }
    if matches!(check, Check::Thm1 | Check::All) {
        report.thm1 = Some(theorem1_check());
    }
    if matches!(check, Check::Thm2 | Check::All) {
        report.thm2 = Some(theorem2_check());
    }
    Ok(report)
}
