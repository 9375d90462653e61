//! One-class scoring of fixed-size graph representations with an MLP
//! autoencoder and dimensionwise-weighted residuals.

use std::path::Path;

use tensorlab::rng::seeded;
use tensorlab::{Adam, ParamStore, Tape, Tensor};

use crate::error::{MuseError, Result};
use crate::errorrep::{csv_err, population_std};
use crate::models::Mlp2;

/// Lower bound on every dimension weight.
pub const WEIGHT_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct OccConfig {
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl OccConfig {
    pub fn new(hidden: usize, lr: f64, seed: u64) -> Self {
        OccConfig {
            hidden,
            lr,
            epochs: 500,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OccModel {
    mlp: Mlp2,
    store: ParamStore,
    dim_weights: Vec<f64>,
}

fn to_tensor(reps: &[Vec<f64>]) -> Result<Tensor> {
    Tensor::from_rows(reps).map_err(|e| MuseError::Precondition(format!("ragged representations: {e}")))
}

impl OccModel {
    /// Fits the autoencoder on the mean per-point L2 residual and records
    /// the training population std of each dimension.
    pub fn fit(reps: &[Vec<f64>], cfg: &OccConfig) -> Result<Self> {
        if reps.len() < 2 {
            return Err(MuseError::Precondition(format!("need at least 2 training points, got {}", reps.len())));
        }
        let d = reps[0].len();
        if d == 0 || cfg.hidden == 0 || cfg.epochs == 0 {
            return Err(MuseError::Precondition("dims and epochs must be positive".into()));
        }
        if reps.iter().flatten().any(|v| !v.is_finite()) {
            return Err(MuseError::Precondition("representations must be finite".into()));
        }
        let x = to_tensor(reps)?;
        let mut store = ParamStore::new();
        let mlp = Mlp2::new(&mut store, "occ", (d, cfg.hidden, d), &mut seeded(cfg.seed))?;
        let opt = Adam::new(cfg.lr);
        for _ in 0..cfg.epochs {
            let mut tape = Tape::new();
            let xv = tape.constant(x.clone());
            let out = mlp.forward(&mut tape, &store, xv)?;
            let diff = tape.sub(xv, out)?;
            let norms = tape.row_l2_norm(diff);
            let loss = tape.mean(norms)?;
            tape.backward(loss, &mut store)?;
            opt.step(&mut store)?;
        }
        let mut dim_weights = Vec::with_capacity(d);
        for l in 0..d {
            let col: Vec<f64> = reps.iter().map(|r| r[l]).collect();
            let w = population_std(&col);
            if w < WEIGHT_FLOOR {
                log::warn!("representation dimension {l} is constant on the training set; weight floored");
            }
            dim_weights.push(w.max(WEIGHT_FLOOR));
        }
        Ok(OccModel { mlp, store, dim_weights })
    }

    pub fn dim(&self) -> usize {
        self.dim_weights.len()
    }

    pub fn dim_weights(&self) -> &[f64] {
        &self.dim_weights
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    /// `z - MLP(z)` for each row.
    pub fn residuals(&self, reps: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if reps.iter().any(|r| r.len() != self.dim()) {
            return Err(MuseError::Contract(format!("representations must have dimension {}", self.dim())));
        }
        if reps.is_empty() {
            return Ok(Vec::new());
        }
        let x = to_tensor(reps)?;
        let mut tape = Tape::new();
        let xv = tape.constant(x.clone());
        let out = self.mlp.forward(&mut tape, &self.store, xv)?;
        let out = tape.value(out);
        Ok((0..x.rows())
            .map(|i| x.row(i).iter().zip(out.row(i)).map(|(a, b)| a - b).collect())
            .collect())
    }

    /// Normality scores in `(0, 1]`; larger is more normal.
    pub fn score_batch(&self, reps: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(self
            .residuals(reps)?
            .iter()
            .map(|r| weighted_score(r, &self.dim_weights))
            .collect())
    }

    pub fn score(&self, z: &[f64]) -> Result<f64> {
        Ok(self.score_batch(&[z.to_vec()])?[0])
    }
}

/// `exp(-sqrt(sum((r_l / w_l)^2)))`.
pub fn weighted_score(residual: &[f64], weights: &[f64]) -> f64 {
    let s: f64 = residual.iter().zip(weights).map(|(r, w)| (r / w).powi(2)).sum();
    (-s.sqrt()).exp()
}

/// Writes `graph_id,score,label`; the label is 1 for anomalies.
pub fn write_scores(path: impl AsRef<Path>, rows: &[(usize, f64, bool)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_err)?;
    w.write_record(["graph_id", "score", "label"]).map_err(csv_err)?;
    for &(id, s, anomaly) in rows {
        w.write_record([id.to_string(), format!("{s:?}"), u8::from(anomaly).to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_formula_examples() {
        assert_eq!(weighted_score(&[0.0, 0.0], &[1.0, 2.0]), 1.0);
        let w = [0.5, 2.0, 3.0];
        assert!((weighted_score(&w, &w) - (-(3f64).sqrt()).exp()).abs() < 1e-15);
        let a = weighted_score(&[0.4, 1.0], &[1.0, 1.0]);
        let b = weighted_score(&[0.8, 1.0], &[2.0, 1.0]);
        assert!((a - b).abs() < 1e-15);
        assert!(weighted_score(&[0.5, 1.0], &[1.0, 1.0]) < a);
    }

    #[test]
    fn population_weights() {
        let m = OccModel::fit(&[vec![0.0], vec![2.0]], &OccConfig { epochs: 5, ..OccConfig::new(4, 1e-2, 0) }).unwrap();
        assert_eq!(m.dim_weights(), &[1.0]);
    }
}
