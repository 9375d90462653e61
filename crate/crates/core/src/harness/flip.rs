//! Train/unseen loss curves for the reconstruction-flip experiments.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{MuseError, Result};
use crate::errorrep::csv_err;
use crate::models::{
    train_with_callback, AdjLoss, FeatAeModel, FeatLoss, GaeModel, GinEncoderConfig, GraphBatch, Reconstructor, TrainConfig,
};
use crate::synth::{build_flip_dataset, FlipKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipModel {
    GaeBce,
    GaeFrob,
    FeatAeCos,
    FeatAeFrob,
}

impl FlipModel {
    pub const ALL: [FlipModel; 4] = [FlipModel::GaeBce, FlipModel::GaeFrob, FlipModel::FeatAeCos, FlipModel::FeatAeFrob];

    pub fn as_str(self) -> &'static str {
        match self {
            FlipModel::GaeBce => "gae-bce",
            FlipModel::GaeFrob => "gae-frob",
            FlipModel::FeatAeCos => "featae-cos",
            FlipModel::FeatAeFrob => "featae-frob",
        }
    }
}

impl fmt::Display for FlipModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FlipModel {
    type Err = MuseError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match key.as_str() {
            "gaebce" => Ok(FlipModel::GaeBce),
            "gaefrob" | "gaefrobenius" => Ok(FlipModel::GaeFrob),
            "feataecos" | "feataecosine" => Ok(FlipModel::FeatAeCos),
            "feataefrob" | "feataefrobenius" => Ok(FlipModel::FeatAeFrob),
            _ => Err(MuseError::Config(format!("unknown flip model {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlipConfig {
    pub kind: FlipKind,
    pub model: FlipModel,
    pub epochs: usize,
    pub record_every: usize,
    pub seed: u64,
    pub hidden_dim: usize,
    pub layers: usize,
    pub lr: f64,
}

impl FlipConfig {
    pub fn new(kind: FlipKind, model: FlipModel, seed: u64) -> Self {
        FlipConfig {
            kind,
            model,
            epochs: 200,
            record_every: 10,
            seed,
            hidden_dim: 32,
            layers: 3,
            lr: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlipRow {
    pub epoch: usize,
    pub mean_train_loss: f64,
    pub mean_unseen_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlipCurve {
    pub kind: FlipKind,
    pub model: FlipModel,
    pub seed: u64,
    pub rows: Vec<FlipRow>,
}

impl FlipCurve {
    pub fn last(&self) -> FlipRow {
        *self.rows.last().expect("curve has the epoch-0 row")
    }

    /// Unseen graphs end up reconstructed better than the training graphs.
    pub fn flipped(&self) -> bool {
        let r = self.last();
        r.mean_unseen_loss < r.mean_train_loss
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_err)?;
        w.write_record(["epoch", "mean_train_loss", "mean_unseen_loss"]).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([r.epoch.to_string(), format!("{:?}", r.mean_train_loss), format!("{:?}", r.mean_unseen_loss)])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn record<M: Reconstructor>(model: &mut M, train: &GraphBatch, unseen: &GraphBatch, cfg: &FlipConfig) -> Result<Vec<FlipRow>> {
    let mut rows = Vec::new();
    let tcfg = TrainConfig::new(cfg.epochs, cfg.lr, cfg.seed);
    train_with_callback(model, train.graphs(), &tcfg, |epoch, m| {
        if epoch % cfg.record_every == 0 {
            rows.push(FlipRow {
                epoch,
                mean_train_loss: mean(&m.eval_graph_losses(train)?),
                mean_unseen_loss: mean(&m.eval_graph_losses(unseen)?),
            });
        }
        Ok(())
    })?;
    Ok(rows)
}

/// Trains on the flip dataset's training half, recording mean per-graph
/// evaluation losses on both halves every `record_every` epochs.
pub fn run_flip_experiment(cfg: &FlipConfig) -> Result<FlipCurve> {
    if cfg.epochs == 0 || cfg.record_every == 0 || cfg.epochs % cfg.record_every != 0 {
        return Err(MuseError::Config(format!(
            "epochs {} must be a positive multiple of record_every {}",
            cfg.epochs, cfg.record_every
        )));
    }
    let (train, unseen) = build_flip_dataset(cfg.kind, cfg.seed)?;
    let enc = GinEncoderConfig {
        dropout: 0.0,
        ..GinEncoderConfig::new(train.feature_dim(), cfg.hidden_dim, cfg.layers)
    };
    let tb = GraphBatch::new(train.graphs())?;
    let ub = GraphBatch::new(unseen.graphs())?;
    let rows = match cfg.model {
        FlipModel::GaeBce => record(&mut GaeModel::new(enc, AdjLoss::Bce, cfg.seed)?, &tb, &ub, cfg)?,
        FlipModel::GaeFrob => record(&mut GaeModel::new(enc, AdjLoss::Frobenius, cfg.seed)?, &tb, &ub, cfg)?,
        FlipModel::FeatAeCos => record(&mut FeatAeModel::new(enc, FeatLoss::Cosine, cfg.seed)?, &tb, &ub, cfg)?,
        FlipModel::FeatAeFrob => record(&mut FeatAeModel::new(enc, FeatLoss::Frobenius, cfg.seed)?, &tb, &ub, cfg)?,
    };
    Ok(FlipCurve {
        kind: cfg.kind,
        model: cfg.model,
        seed: cfg.seed,
        rows,
    })
}
