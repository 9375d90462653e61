//! Criterion bookkeeping for the acceptance run, plus brute-force oracles
//! for the ranking metrics.

use std::fmt;
use std::process::ExitCode;
use std::time::{Duration, Instant};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Informational check that did not hold; does not fail the run.
    Warn,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
            Status::Skip => "SKIP",
        })
    }
}

pub struct Outcome {
    pub status: Status,
    pub detail: String,
}

impl Outcome {
    pub fn check(ok: bool, detail: impl Into<String>) -> Self {
        Outcome {
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }

    pub fn skip(detail: impl Into<String>) -> Self {
        Outcome {
            status: Status::Skip,
            detail: detail.into(),
        }
    }
}

#[derive(Default)]
pub struct Board {
    rows: Vec<(String, Status)>,
}

impl Board {
    /// Runs one criterion and prints its line. A criterion that exceeds its
    /// runtime budget fails.
    pub fn run<F: FnOnce() -> Outcome>(&mut self, name: &str, budget: Duration, f: F) {
        let t = Instant::now();
        let mut out = f();
        let took = t.elapsed();
        if took > budget && matches!(out.status, Status::Pass | Status::Warn) {
            out.status = Status::Fail;
            out.detail = format!("{}; over budget {:.0?}", out.detail, budget);
        }
        println!("{:<4} {name}: {} [{:.2?}]", out.status, out.detail, took);
        self.rows.push((name.to_string(), out.status));
    }

    pub fn count(&self, s: Status) -> usize {
        self.rows.iter().filter(|r| r.1 == s).count()
    }

    pub fn finish(self) -> ExitCode {
        println!(
            "acceptance: {} passed, {} failed, {} warned, {} skipped",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Warn),
            self.count(Status::Skip)
        );
        if self.count(Status::Fail) == 0 {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }
    }
}

pub mod oracles {
    //! Direct pairwise and rank-by-rank definitions over normality scores
    //! (anomaly score = -s; ties in input order for rank-based metrics).

    pub fn auroc(s: &[f64], y: &[bool]) -> f64 {
        let mut total = 0.0;
        let mut pairs = 0.0;
        for i in (0..s.len()).filter(|&i| y[i]) {
            for j in (0..s.len()).filter(|&j| !y[j]) {
                total += match (-s[i]).partial_cmp(&-s[j]).expect("finite scores") {
                    std::cmp::Ordering::Greater => 1.0,
                    std::cmp::Ordering::Equal => 0.5,
                    std::cmp::Ordering::Less => 0.0,
                };
                pairs += 1.0;
            }
        }
        total / pairs
    }

    pub fn rank(s: &[f64], i: usize) -> usize {
        1 + (0..s.len()).filter(|&j| s[j] < s[i] || (s[j] == s[i] && j < i)).count()
    }

    pub fn average_precision(s: &[f64], y: &[bool]) -> f64 {
        let anomalies: Vec<usize> = (0..s.len()).filter(|&i| y[i]).collect();
        let mut total = 0.0;
        for &i in &anomalies {
            let r = rank(s, i);
            let above = anomalies.iter().filter(|&&j| rank(s, j) <= r).count();
            total += above as f64 / r as f64;
        }
        total / anomalies.len() as f64
    }

    pub fn precision_at_k(s: &[f64], y: &[bool], k: usize) -> f64 {
        (0..s.len()).filter(|&i| y[i] && rank(s, i) <= k).count() as f64 / k as f64
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn hand_checked_instance() {
            // anomaly order: idx 2 (0.1), idx 0 (0.3), idx 1 (0.6)
            let s = [0.3, 0.6, 0.1, 0.9];
            let y = [false, true, true, false];
            assert_eq!(auroc(&s, &y), 0.75);
            assert_eq!(rank(&s, 1), 3);
            assert!((average_precision(&s, &y) - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
            assert_eq!(precision_at_k(&s, &y, 2), 0.5);
        }
    }
}
