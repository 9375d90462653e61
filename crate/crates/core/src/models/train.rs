use rand::seq::SliceRandom;
use tensorlab::rng::{derive_seed, seeded};
use tensorlab::{Adam, Tape};

use super::batch::GraphBatch;
use super::recon::Reconstructor;
use super::Mode;
use crate::error::{MuseError, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub seed: u64,
    /// Graphs per optimizer step; `None` is one full-batch step per epoch.
    pub batch_size: Option<usize>,
}

impl TrainConfig {
    pub fn new(epochs: usize, lr: f64, seed: u64) -> Self {
        TrainConfig {
            epochs,
            lr,
            weight_decay: 1e-6,
            seed,
            batch_size: None,
        }
    }
}

/// Trains on the mean per-graph loss; returns the mean loss of each epoch.
pub fn train_reconstructor<M: Reconstructor>(model: &mut M, graphs: &[Graph], cfg: &TrainConfig) -> Result<Vec<f64>> {
    train_with_callback(model, graphs, cfg, |_, _| Ok(()))
}

/// As [`train_reconstructor`], calling `on_epoch(k, model)` before training
/// (`k = 0`) and after each epoch `k`.
pub fn train_with_callback<M, F>(model: &mut M, graphs: &[Graph], cfg: &TrainConfig, mut on_epoch: F) -> Result<Vec<f64>>
where
    M: Reconstructor,
    F: FnMut(usize, &M) -> Result<()>,
{
    if cfg.epochs == 0 {
        return Err(MuseError::Precondition("epochs must be at least 1".into()));
    }
    if graphs.is_empty() {
        return Err(MuseError::Precondition("no training graphs".into()));
    }
    let opt = Adam::new(cfg.lr).with_weight_decay(cfg.weight_decay);
    let full = match cfg.batch_size {
        None => Some(GraphBatch::new(graphs)?),
        Some(0) => return Err(MuseError::Precondition("batch_size must be positive".into())),
        Some(_) => None,
    };
    let mut order: Vec<usize> = (0..graphs.len()).collect();
    let mut shuffle_rng = seeded(derive_seed(cfg.seed, &[0x0B]));
    let mut trace = Vec::with_capacity(cfg.epochs);
    on_epoch(0, model)?;
    for epoch in 0..cfg.epochs {
        let mut total = 0.0;
        if let Some(batch) = &full {
            total += step(model, batch, &opt, derive_seed(cfg.seed, &[epoch as u64, 0]))?;
        } else {
            order.shuffle(&mut shuffle_rng);
            let size = cfg.batch_size.expect("checked above");
            for (b, chunk) in order.chunks(size).enumerate() {
                let sub: Vec<Graph> = chunk.iter().map(|&i| graphs[i].clone()).collect();
                let batch = GraphBatch::new(&sub)?;
                total += step(model, &batch, &opt, derive_seed(cfg.seed, &[epoch as u64, b as u64]))? * chunk.len() as f64;
            }
            total /= graphs.len() as f64;
        }
        trace.push(total);
        on_epoch(epoch + 1, model)?;
    }
    Ok(trace)
}

fn step<M: Reconstructor>(model: &mut M, batch: &GraphBatch, opt: &Adam, seed: u64) -> Result<f64> {
    let mut tape = Tape::new();
    let per_graph = model.graph_losses(&mut tape, batch, Mode::Train { seed })?;
    let loss = tape.mean(per_graph)?;
    let value = tape.value(loss).item()?;
    tape.backward(loss, model.store_mut())?;
    opt.step(model.store_mut())?;
    Ok(value)
}
