//! GIN encoder, the adjacency and feature autoencoders used in the flip
//! analysis, and the MuSE reconstruction model.

pub mod batch;
pub mod recon;
pub mod train;

use std::sync::Arc;

use tensorlab::rng::{derive_seed, Rng};
use tensorlab::{ParamId, ParamStore, SparseMatrix, Tape, Var};

use crate::error::{MuseError, Result};

pub use batch::{edge_drop_augment, GraphBatch, PairSet};
pub use recon::{AdjLoss, FeatAeModel, FeatLoss, GaeModel, MuseConfig, MuseModel, Reconstructor};
pub use train::{train_reconstructor, train_with_callback, TrainConfig};

/// Forward mode. Training enables dropout and augmentation, seeded per call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Eval,
    Train { seed: u64 },
}

#[derive(Clone, Copy, Debug)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
}

impl Linear {
    pub fn new(store: &mut ParamStore, name: &str, fan_in: usize, fan_out: usize, rng: &mut Rng) -> Result<Self> {
        Ok(Linear {
            w: store.add_glorot(format!("{name}.w"), fan_in, fan_out, rng)?,
            b: store.add_zeros(format!("{name}.b"), 1, fan_out)?,
        })
    }

    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, x: Var) -> Result<Var> {
        let w = tape.param(store, self.w);
        let b = tape.param(store, self.b);
        let xw = tape.matmul(x, w)?;
        Ok(tape.add_row(xw, b)?)
    }
}

/// Two linear layers with a ReLU between them.
#[derive(Clone, Copy, Debug)]
pub struct Mlp2 {
    pub l1: Linear,
    pub l2: Linear,
}

impl Mlp2 {
    pub fn new(store: &mut ParamStore, name: &str, dims: (usize, usize, usize), rng: &mut Rng) -> Result<Self> {
        Ok(Mlp2 {
            l1: Linear::new(store, &format!("{name}.0"), dims.0, dims.1, rng)?,
            l2: Linear::new(store, &format!("{name}.1"), dims.1, dims.2, rng)?,
        })
    }

    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, x: Var) -> Result<Var> {
        let h = self.l1.forward(tape, store, x)?;
        let h = tape.relu(h);
        self.l2.forward(tape, store, h)
    }
}

/// GIN with epsilon fixed at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct GinEncoderConfig {
    pub layers: usize,
    pub hidden_dim: usize,
    pub input_dim: usize,
    pub dropout: f64,
}

impl GinEncoderConfig {
    pub fn new(input_dim: usize, hidden_dim: usize, layers: usize) -> Self {
        GinEncoderConfig {
            layers,
            hidden_dim,
            input_dim,
            dropout: 0.3,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden_dim == 0 || self.input_dim == 0 {
            return Err(MuseError::Precondition(format!("encoder dims must be positive: {self:?}")));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(MuseError::Precondition(format!("dropout {} outside [0,1)", self.dropout)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GinEncoder {
    pub cfg: GinEncoderConfig,
    layers: Vec<Mlp2>,
}

impl GinEncoder {
    pub fn new(cfg: GinEncoderConfig, store: &mut ParamStore, rng: &mut Rng) -> Result<Self> {
        cfg.validate()?;
        let mut layers = Vec::with_capacity(cfg.layers);
        for k in 0..cfg.layers {
            let d_in = if k == 0 { cfg.input_dim } else { cfg.hidden_dim };
            layers.push(Mlp2::new(store, &format!("gin{k}"), (d_in, cfg.hidden_dim, cfg.hidden_dim), rng)?);
        }
        Ok(GinEncoder { cfg, layers })
    }

    pub fn output_dim(&self) -> usize {
        self.cfg.hidden_dim
    }

    /// `h <- MLP(h + A h)` per layer; ReLU and (in training) dropout between
    /// layers, nothing after the last one.
    pub fn forward(&self, tape: &mut Tape, store: &ParamStore, x: Var, adj: Arc<SparseMatrix>, mode: Mode) -> Result<Var> {
        let d = tape.value(x).cols();
        if d != self.cfg.input_dim {
            return Err(MuseError::Contract(format!(
                "encoder expects {} input features, got {d}",
                self.cfg.input_dim
            )));
        }
        let mut h = x;
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let msg = tape.sparse_matmul(adj.clone(), h)?;
            let s = tape.add(h, msg)?;
            h = layer.forward(tape, store, s)?;
            if k < last {
                h = tape.relu(h);
                if let Mode::Train { seed } = mode {
                    if self.cfg.dropout > 0.0 {
                        h = tape.dropout(h, self.cfg.dropout, derive_seed(seed, &[0xD0, k as u64]))?;
                    }
                }
            }
        }
        Ok(h)
    }
}
