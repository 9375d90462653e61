use std::str::FromStr;

use tensorlab::rng::{derive_seed, seeded};
use tensorlab::{ParamStore, Tape, Tensor, Var};

use super::batch::{GraphBatch, PairSet};
use super::{GinEncoder, GinEncoderConfig, Mlp2, Mode};
use crate::error::{MuseError, Result};
use crate::graph::Graph;

/// Probability clamp applied before every log in BCE paths.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdjLoss {
    Bce,
    Frobenius,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatLoss {
    Cosine,
    Frobenius,
}

impl FromStr for FeatLoss {
    type Err = MuseError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" | "cos" => Ok(FeatLoss::Cosine),
            "frobenius" | "frob" | "sfn" => Ok(FeatLoss::Frobenius),
            _ => Err(MuseError::Config(format!("unknown feature loss {s:?}"))),
        }
    }
}

/// Anything trained by [`train_reconstructor`](super::train_reconstructor).
pub trait Reconstructor {
    fn store(&self) -> &ParamStore;
    fn store_mut(&mut self) -> &mut ParamStore;
    /// Per-graph objective, `G x 1`.
    fn graph_losses(&self, tape: &mut Tape, batch: &GraphBatch, mode: Mode) -> Result<Var>;
    /// Node embeddings from the encoder in evaluation mode.
    fn embed(&self, batch: &GraphBatch) -> Result<Tensor>;

    /// Evaluation-mode per-graph losses.
    fn eval_graph_losses(&self, batch: &GraphBatch) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let l = self.graph_losses(&mut tape, batch, Mode::Eval)?;
        Ok(tape.value(l).data().to_vec())
    }

    /// Mean-pooled encoder embeddings, one row per graph.
    fn pooled_embeddings(&self, batch: &GraphBatch) -> Result<Tensor> {
        let z = self.embed(batch)?;
        Ok(batch.node_mean.matmul_dense(&z)?)
    }
}

/// `log(clamp(p))` and `log(1 - clamp(p))` for probabilities `p`.
fn clamped_logs(tape: &mut Tape, prob: Var) -> (Var, Var) {
    let p = tape.clamp(prob, PROB_EPS, 1.0 - PROB_EPS);
    let log_p = tape.log(p);
    let neg = tape.scalar_mul(p, -1.0);
    let q = tape.add_scalar(neg, 1.0);
    let log_q = tape.log(q);
    (log_p, log_q)
}

/// `-(w_pos * a * log p + (1 - a) * log(1 - p))` per entry.
pub fn weighted_bce(tape: &mut Tape, prob: Var, target: &Tensor, pos_weight: &Tensor) -> Result<Var> {
    let (log_p, log_q) = clamped_logs(tape, prob);
    let wp = tape.constant(target.zip_map(pos_weight, "weighted_bce", |a, w| a * w)?);
    let wn = tape.constant(target.map(|a| 1.0 - a));
    let t1 = tape.mul(wp, log_p)?;
    let t2 = tape.mul(wn, log_q)?;
    let s = tape.add(t1, t2)?;
    Ok(tape.scalar_mul(s, -1.0))
}

/// Per-entry adjacency losses for inner-product decoding of `z` over `pairs`.
pub fn adjacency_entry_losses(tape: &mut Tape, z: Var, pairs: &PairSet, loss: AdjLoss) -> Result<Var> {
    let logits = tape.pair_dots(z, pairs.pairs.clone())?;
    let prob = tape.sigmoid(logits);
    match loss {
        AdjLoss::Bce => weighted_bce(tape, prob, &pairs.target, &Tensor::ones(pairs.len(), 1)),
        AdjLoss::Frobenius => {
            let a = tape.constant(pairs.target.clone());
            let d = tape.sub(a, prob)?;
            Ok(tape.square(d))
        }
    }
}

/// Per-node feature errors: `1 - cos` or squared Euclidean distance.
pub fn feature_node_errors(tape: &mut Tape, x: Var, xhat: Var, loss: FeatLoss) -> Result<Var> {
    match loss {
        FeatLoss::Cosine => {
            let c = tape.row_cosine(x, xhat)?;
            let neg = tape.scalar_mul(c, -1.0);
            Ok(tape.add_scalar(neg, 1.0))
        }
        FeatLoss::Frobenius => {
            let d = tape.sub(x, xhat)?;
            let sq = tape.square(d);
            Ok(tape.sum_rows(sq))
        }
    }
}

/// Graph autoencoder: GIN encoder and `sigmoid(Z Zᵀ)` decoder.
#[derive(Clone, Debug)]
pub struct GaeModel {
    pub encoder: GinEncoder,
    pub loss: AdjLoss,
    store: ParamStore,
}

impl GaeModel {
    pub fn new(cfg: GinEncoderConfig, loss: AdjLoss, seed: u64) -> Result<Self> {
        let mut store = ParamStore::new();
        let mut rng = seeded(seed);
        let encoder = GinEncoder::new(cfg, &mut store, &mut rng)?;
        Ok(GaeModel { encoder, loss, store })
    }

    fn encode(&self, tape: &mut Tape, batch: &GraphBatch, mode: Mode) -> Result<Var> {
        let x = tape.constant(batch.features.clone());
        self.encoder.forward(tape, &self.store, x, batch.adjacency.clone(), mode)
    }

    /// The summed loss over all `n^2` ordered pairs of one graph.
    pub fn gae_loss(&self, graph: &Graph) -> Result<f64> {
        let batch = GraphBatch::new(std::slice::from_ref(graph))?;
        let mut tape = Tape::new();
        let z = self.encode(&mut tape, &batch, Mode::Eval)?;
        let e = adjacency_entry_losses(&mut tape, z, &batch.all_pairs, self.loss)?;
        Ok(tape.value(e).sum())
    }
}

impl Reconstructor for GaeModel {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    /// Mean entry loss per graph (the summed loss divided by `n^2`).
    fn graph_losses(&self, tape: &mut Tape, batch: &GraphBatch, mode: Mode) -> Result<Var> {
        let z = self.encode(tape, batch, mode)?;
        let e = adjacency_entry_losses(tape, z, &batch.all_pairs, self.loss)?;
        Ok(tape.sparse_matmul(batch.all_pairs.mean.clone(), e)?)
    }

    fn embed(&self, batch: &GraphBatch) -> Result<Tensor> {
        let mut tape = Tape::new();
        let z = self.encode(&mut tape, batch, Mode::Eval)?;
        Ok(tape.value(z).clone())
    }
}

/// Feature autoencoder: GIN encoder and a two-layer MLP feature decoder.
#[derive(Clone, Debug)]
pub struct FeatAeModel {
    pub encoder: GinEncoder,
    pub decoder: Mlp2,
    pub loss: FeatLoss,
    store: ParamStore,
}

impl FeatAeModel {
    pub fn new(cfg: GinEncoderConfig, loss: FeatLoss, seed: u64) -> Result<Self> {
        let mut store = ParamStore::new();
        let mut rng = seeded(seed);
        let (d, h) = (cfg.input_dim, cfg.hidden_dim);
        let encoder = GinEncoder::new(cfg, &mut store, &mut rng)?;
        let decoder = Mlp2::new(&mut store, "feat_dec", (h, h, d), &mut rng)?;
        Ok(FeatAeModel {
            encoder,
            decoder,
            loss,
            store,
        })
    }
}

impl Reconstructor for FeatAeModel {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    /// Mean per-node error per graph.
    fn graph_losses(&self, tape: &mut Tape, batch: &GraphBatch, mode: Mode) -> Result<Var> {
        let x = tape.constant(batch.features.clone());
        let z = self.encoder.forward(tape, &self.store, x, batch.adjacency.clone(), mode)?;
        let xhat = self.decoder.forward(tape, &self.store, z)?;
        let e = feature_node_errors(tape, x, xhat, self.loss)?;
        Ok(tape.sparse_matmul(batch.node_mean.clone(), e)?)
    }

    fn embed(&self, batch: &GraphBatch) -> Result<Tensor> {
        let mut tape = Tape::new();
        let x = tape.constant(batch.features.clone());
        let z = self.encoder.forward(&mut tape, &self.store, x, batch.adjacency.clone(), Mode::Eval)?;
        Ok(tape.value(z).clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuseConfig {
    /// Fraction of edges dropped from the encoder input during training.
    pub aug_edge_drop_rate: f64,
    pub omega_exponent: f64,
    pub use_lx: bool,
    pub use_la: bool,
    pub feature_loss: FeatLoss,
    /// Per-node sampled adjacency entries during training; `None` uses all.
    pub sample_k: Option<usize>,
}

impl Default for MuseConfig {
    fn default() -> Self {
        MuseConfig {
            aug_edge_drop_rate: 0.3,
            omega_exponent: 1.0,
            use_lx: true,
            use_la: true,
            feature_loss: FeatLoss::Cosine,
            sample_k: None,
        }
    }
}

impl MuseConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.aug_edge_drop_rate) {
            return Err(MuseError::Precondition(format!(
                "augmentation rate {} outside [0,1)",
                self.aug_edge_drop_rate
            )));
        }
        if !self.use_lx && !self.use_la {
            return Err(MuseError::Precondition("at least one of L_X and L_A must be enabled".into()));
        }
        if self.sample_k == Some(0) {
            return Err(MuseError::Precondition("sample_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// `(n^2 / sum(A) - 1)^exponent`, or 1 for an edgeless graph.
pub fn omega(graph: &Graph, exponent: f64) -> f64 {
    let total = graph.adjacency().sum();
    if total == 0.0 {
        return 1.0;
    }
    let n = graph.node_count() as f64;
    (n * n / total - 1.0).powf(exponent)
}

/// Per-graph loss terms, each `G x 1`.
#[derive(Clone, Copy, Debug)]
pub struct MuseLosses {
    pub lx: Var,
    pub la: Var,
    pub total: Var,
}

/// Evaluation-mode reconstruction of a batch.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    /// Stacked `X̂`, one row per node.
    pub xhat: Tensor,
    /// Clamped `Â` over [`GraphBatch::all_pairs`], `m x 1`.
    pub ahat: Tensor,
}

/// Encoder `f`, feature decoder `g` and adjacency decoder `h` with
/// `Â = sigmoid(h(Z) h(Z)ᵀ)`.
#[derive(Clone, Debug)]
pub struct MuseModel {
    pub encoder: GinEncoder,
    pub feat_dec: Mlp2,
    pub adj_dec: Mlp2,
    pub cfg: MuseConfig,
    store: ParamStore,
}

impl MuseModel {
    pub fn new(enc: GinEncoderConfig, cfg: MuseConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut store = ParamStore::new();
        let mut rng = seeded(seed);
        let (d, h) = (enc.input_dim, enc.hidden_dim);
        let encoder = GinEncoder::new(enc, &mut store, &mut rng)?;
        let feat_dec = Mlp2::new(&mut store, "feat_dec", (h, h, d), &mut rng)?;
        let adj_dec = Mlp2::new(&mut store, "adj_dec", (h, h, h), &mut rng)?;
        Ok(MuseModel {
            encoder,
            feat_dec,
            adj_dec,
            cfg,
            store,
        })
    }

    /// Replaces the parameter values, e.g. from a checkpoint.
    pub fn load_params(&mut self, other: &ParamStore) -> Result<()> {
        let n = self.store.load_values(other)?;
        if n != self.store.len() {
            return Err(MuseError::Contract(format!(
                "checkpoint provides {n} of {} parameters",
                self.store.len()
            )));
        }
        Ok(())
    }

    fn pos_weights(&self, batch: &GraphBatch, pairs: &PairSet) -> Tensor {
        let w: Vec<f64> = batch.graphs().iter().map(|g| omega(g, self.cfg.omega_exponent)).collect();
        Tensor::column(pairs.graph_of.iter().map(|&g| w[g]).collect())
    }

    /// Forward pass producing `X̂` and `Z' = h(Z)`.
    fn decode(&self, tape: &mut Tape, batch: &GraphBatch, mode: Mode) -> Result<(Var, Var, Var)> {
        let adj = match mode {
            Mode::Train { seed } => batch.augmented_adjacency(self.cfg.aug_edge_drop_rate, derive_seed(seed, &[0xA6]))?,
            Mode::Eval => batch.adjacency.clone(),
        };
        let x = tape.constant(batch.features.clone());
        let z = self.encoder.forward(tape, &self.store, x, adj, mode)?;
        let xhat = self.feat_dec.forward(tape, &self.store, z)?;
        let zp = self.adj_dec.forward(tape, &self.store, z)?;
        Ok((x, xhat, zp))
    }

    fn losses_over(&self, tape: &mut Tape, batch: &GraphBatch, mode: Mode, pairs: &PairSet) -> Result<MuseLosses> {
        let (x, xhat, zp) = self.decode(tape, batch, mode)?;
        let fe = feature_node_errors(tape, x, xhat, self.cfg.feature_loss)?;
        let lx = tape.sparse_matmul(batch.node_mean.clone(), fe)?;
        let logits = tape.pair_dots(zp, pairs.pairs.clone())?;
        let prob = tape.sigmoid(logits);
        let ae = weighted_bce(tape, prob, &pairs.target, &self.pos_weights(batch, pairs))?;
        let la = tape.sparse_matmul(pairs.mean.clone(), ae)?;
        let total = match (self.cfg.use_lx, self.cfg.use_la) {
            (true, true) => {
                let s = tape.add(lx, la)?;
                tape.scalar_mul(s, 0.5)
            }
            (true, false) => lx,
            (false, true) => la,
            (false, false) => unreachable!("validated at construction"),
        };
        Ok(MuseLosses { lx, la, total })
    }

    /// Per-graph `L_X`, `L_A` and `L`. Training mode augments the encoder
    /// input and, with `sample_k`, restricts `L_A` to sampled entries.
    pub fn losses(&self, tape: &mut Tape, batch: &GraphBatch, mode: Mode) -> Result<MuseLosses> {
        match (mode, self.cfg.sample_k) {
            (Mode::Train { seed }, Some(k)) => {
                let pairs = batch.sampled_pairs(k, derive_seed(seed, &[0x5A]))?;
                self.losses_over(tape, batch, mode, &pairs)
            }
            _ => self.losses_over(tape, batch, mode, &batch.all_pairs),
        }
    }

    /// `(L_X, L_A, L)` for a single graph.
    pub fn muse_losses(&self, graph: &Graph, seed: u64, training: bool) -> Result<(f64, f64, f64)> {
        let batch = GraphBatch::new(std::slice::from_ref(graph))?;
        let mode = if training { Mode::Train { seed } } else { Mode::Eval };
        let mut tape = Tape::new();
        let l = self.losses(&mut tape, &batch, mode)?;
        let get = |v: Var| tape.value(v).data()[0];
        Ok((get(l.lx), get(l.la), get(l.total)))
    }

    /// Weighted BCE over `min(K, n)` sampled columns per node, normalised by
    /// the number of sampled entries (evaluation forward pass).
    pub fn sampled_adjacency_loss(&self, graph: &Graph, k: usize, seed: u64) -> Result<f64> {
        let batch = GraphBatch::new(std::slice::from_ref(graph))?;
        let pairs = batch.sampled_pairs(k, seed)?;
        let mut tape = Tape::new();
        let l = self.losses_over(&mut tape, &batch, Mode::Eval, &pairs)?;
        Ok(tape.value(l.la).data()[0])
    }

    pub fn reconstruct(&self, batch: &GraphBatch) -> Result<Reconstruction> {
        let mut tape = Tape::new();
        let (_, xhat, zp) = self.decode(&mut tape, batch, Mode::Eval)?;
        let logits = tape.pair_dots(zp, batch.all_pairs.pairs.clone())?;
        let prob = tape.sigmoid(logits);
        let p = tape.clamp(prob, PROB_EPS, 1.0 - PROB_EPS);
        Ok(Reconstruction {
            xhat: tape.value(xhat).clone(),
            ahat: tape.value(p).clone(),
        })
    }
}

impl Reconstructor for MuseModel {
    fn store(&self) -> &ParamStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    fn graph_losses(&self, tape: &mut Tape, batch: &GraphBatch, mode: Mode) -> Result<Var> {
        Ok(self.losses(tape, batch, mode)?.total)
    }

    fn embed(&self, batch: &GraphBatch) -> Result<Tensor> {
        let mut tape = Tape::new();
        let x = tape.constant(batch.features.clone());
        let z = self.encoder.forward(&mut tape, &self.store, x, batch.adjacency.clone(), Mode::Eval)?;
        Ok(tape.value(z).clone())
    }
}
