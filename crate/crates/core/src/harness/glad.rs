//! The GLAD protocol: per normal class and trial, split, optionally
//! contaminate, train a reconstructor, build representations, fit the
//! one-class model and score validation and test graphs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use tensorlab::rng::derive_seed;
use tensorlab::{ParamStore, Tape, Tensor, Var};

use super::config::{ExperimentConfig, Method, SYN_COM};
use super::metrics::{auroc, average_precision, precision_at_k};
use crate::error::{MuseError, Result};
use crate::errorrep::{csv_err, error_representations, RepresentationSpec};
use crate::graph::{contaminate_train, make_split, parse_tu_dataset, Graph, GraphDataset, SplitSpec};
use crate::models::{
    train_with_callback, AdjLoss, FeatAeModel, FeatLoss, GaeModel, GraphBatch, Mode, MuseModel, Reconstructor,
};
use crate::occ::{OccConfig, OccModel};
use crate::synth::{gen_syn_com, SynComParams};

pub const SYN_NORMAL_TAU: f64 = 0.4;
pub const SYN_ANOMALY_TAU: f64 = 0.8;
pub const SYN_NORMAL_COUNT: usize = 500;
pub const SYN_ANOMALY_COUNT: usize = 100;

/// Syn-Com graphs at two community strengths: class 0 normal, class 1 anomalous.
pub fn synthetic_glad_dataset(seed: u64) -> Result<GraphDataset> {
    let make = |tau, count, part| {
        gen_syn_com(&SynComParams {
            count,
            ..SynComParams::new(tau, count, derive_seed(seed, &[0x5C, part]))
        })
    };
    let normal = make(SYN_NORMAL_TAU, SYN_NORMAL_COUNT, 0)?;
    let anomaly = make(SYN_ANOMALY_TAU, SYN_ANOMALY_COUNT, 1)?;
    let graphs = normal
        .graphs()
        .iter()
        .map(|g| g.clone().with_label(Some(0)))
        .chain(anomaly.graphs().iter().map(|g| g.clone().with_label(Some(1))))
        .collect();
    GraphDataset::new(SYN_COM, graphs)
}

/// The built-in synthetic set, or a TU dataset under `data_root`.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<GraphDataset> {
    let e = &cfg.experiment;
    if e.dataset.eq_ignore_ascii_case(SYN_COM) {
        synthetic_glad_dataset(e.seed)
    } else {
        parse_tu_dataset(&e.data_root, &e.dataset)
    }
}

/// Any trainable reconstructor the harness can build.
pub enum AnyModel {
    Muse(MuseModel),
    Gae(GaeModel),
    FeatAe(FeatAeModel),
}

impl Reconstructor for AnyModel {
    fn store(&self) -> &ParamStore {
        match self {
            AnyModel::Muse(m) => m.store(),
            AnyModel::Gae(m) => m.store(),
            AnyModel::FeatAe(m) => m.store(),
        }
    }

    fn store_mut(&mut self) -> &mut ParamStore {
        match self {
            AnyModel::Muse(m) => m.store_mut(),
            AnyModel::Gae(m) => m.store_mut(),
            AnyModel::FeatAe(m) => m.store_mut(),
        }
    }

    fn graph_losses(&self, tape: &mut Tape, batch: &GraphBatch, mode: Mode) -> Result<Var> {
        match self {
            AnyModel::Muse(m) => m.graph_losses(tape, batch, mode),
            AnyModel::Gae(m) => m.graph_losses(tape, batch, mode),
            AnyModel::FeatAe(m) => m.graph_losses(tape, batch, mode),
        }
    }

    fn embed(&self, batch: &GraphBatch) -> Result<Tensor> {
        match self {
            AnyModel::Muse(m) => m.embed(batch),
            AnyModel::Gae(m) => m.embed(batch),
            AnyModel::FeatAe(m) => m.embed(batch),
        }
    }
}

/// One point of the search space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hyper {
    pub lr: f64,
    pub hidden_dim: usize,
    pub layers: usize,
    pub epochs: usize,
    pub omega_exponent: f64,
    pub occ_hidden: usize,
    pub occ_lr: f64,
}

/// Builds the model for `method` from the config with `h` applied.
pub fn build_model(cfg: &ExperimentConfig, h: &Hyper, input_dim: usize, seed: u64) -> Result<AnyModel> {
    let enc = super::config::EncoderSection {
        hidden_dim: h.hidden_dim,
        layers: h.layers,
        ..cfg.encoder.clone()
    }
    .encoder(input_dim);
    let method = cfg.experiment.method;
    Ok(match method {
        Method::Muse | Method::MuseVariant(_) => {
            let mut base = cfg.muse.config()?;
            base.omega_exponent = h.omega_exponent;
            AnyModel::Muse(MuseModel::new(enc, method.muse_config(&base), seed)?)
        }
        Method::Gae2 => AnyModel::Gae(GaeModel::new(enc, AdjLoss::Bce, seed)?),
        Method::FeatAe2 => AnyModel::FeatAe(FeatAeModel::new(enc, FeatLoss::Cosine, seed)?),
    })
}

/// Fixed-size graph representations fed to the one-class model: error
/// representations for MuSE, mean-pooled embeddings otherwise.
pub fn representations(model: &AnyModel, spec: &RepresentationSpec, graphs: &[Graph]) -> Result<Vec<Vec<f64>>> {
    match model {
        AnyModel::Muse(m) => Ok(error_representations(m, graphs, spec)?.into_iter().map(|r| r.values).collect()),
        _ => {
            let mut out = Vec::with_capacity(graphs.len());
            for chunk in graphs.chunks(256) {
                let pooled = model.pooled_embeddings(&GraphBatch::new(chunk)?)?;
                out.extend((0..pooled.rows()).map(|r| pooled.row(r).to_vec()));
            }
            Ok(out)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialResult {
    pub config_id: String,
    pub normal_class: usize,
    pub trial: usize,
    pub seed: u64,
    pub hyper: Hyper,
    pub contaminated: usize,
    pub val_auroc: f64,
    pub auroc: f64,
    pub ap: f64,
    pub precision_at_k: f64,
    pub k: usize,
    pub runtime_secs: f64,
}

impl TrialResult {
    /// Equality of everything except the wall-clock runtime.
    pub fn same_outcome(&self, other: &TrialResult) -> bool {
        self.config_id == other.config_id
            && self.normal_class == other.normal_class
            && self.trial == other.trial
            && self.seed == other.seed
            && self.hyper == other.hyper
            && self.contaminated == other.contaminated
            && self.val_auroc.to_bits() == other.val_auroc.to_bits()
            && self.auroc.to_bits() == other.auroc.to_bits()
            && self.ap.to_bits() == other.ap.to_bits()
            && self.precision_at_k.to_bits() == other.precision_at_k.to_bits()
    }
}

struct Scored {
    hyper: Hyper,
    val_auroc: f64,
    test_scores: Vec<f64>,
}

struct Sets {
    train: Vec<Graph>,
    val: Vec<Graph>,
    val_y: Vec<bool>,
    test: Vec<Graph>,
    test_y: Vec<bool>,
}

fn pick(ds: &GraphDataset, idx: impl IntoIterator<Item = usize>) -> Vec<Graph> {
    idx.into_iter().map(|i| ds.graphs()[i].clone()).collect()
}

impl Hyper {
    /// The pinned values of `cfg`.
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Hyper {
            lr: cfg.train.lr,
            hidden_dim: cfg.encoder.hidden_dim,
            layers: cfg.encoder.layers,
            epochs: cfg.train.epochs,
            omega_exponent: cfg.muse.omega_exponent,
            occ_hidden: cfg.occ.hidden,
            occ_lr: cfg.occ.lr,
        }
    }
}

/// Every model-level hyperparameter combination to train.
fn model_grid(cfg: &ExperimentConfig) -> Vec<Hyper> {
    let base = Hyper::from_config(cfg);
    if !cfg.experiment.tune {
        return vec![base];
    }
    let t = &cfg.tune;
    let omegas = if cfg.experiment.method.is_muse() {
        t.omega_exponent.clone()
    } else {
        vec![base.omega_exponent]
    };
    let mut out = Vec::new();
    for &lr in &t.lr {
        for &hidden_dim in &t.hidden_dim {
            for &layers in &t.layers {
                for &omega_exponent in &omegas {
                    out.push(Hyper {
                        lr,
                        hidden_dim,
                        layers,
                        epochs: *t.epochs.iter().max().expect("validated non-empty"),
                        omega_exponent,
                        ..base.clone()
                    });
                }
            }
        }
    }
    out
}

fn run_trial(cfg: &ExperimentConfig, ds: &GraphDataset, normal_class: usize, trial: usize) -> Result<TrialResult> {
    let started = Instant::now();
    let e = &cfg.experiment;
    let seed = derive_seed(e.seed, &[normal_class as u64, trial as u64]);
    let split = make_split(ds, &SplitSpec::new(normal_class, derive_seed(seed, &[1])))?;
    let split = if e.contamination > 0.0 {
        contaminate_train(&split, e.contamination, derive_seed(seed, &[2]))?
    } else {
        split
    };
    let contaminated = split.train.iter().filter(|&&i| ds.graphs()[i].label() != Some(normal_class)).count();
    let (val, test) = (split.val(), split.test());
    let sets = Sets {
        train: pick(ds, split.train.iter().copied()),
        val: pick(ds, val.iter().map(|v| v.0)),
        val_y: val.iter().map(|v| v.1).collect(),
        test: pick(ds, test.iter().map(|v| v.0)),
        test_y: test.iter().map(|v| v.1).collect(),
    };

    let snapshot_epochs: Vec<usize> = if e.tune { cfg.tune.epochs.clone() } else { vec![cfg.train.epochs] };
    let occ_grid: Vec<(usize, f64)> = if e.tune {
        cfg.tune.occ_hidden.iter().flat_map(|&h| cfg.tune.occ_lr.iter().map(move |&lr| (h, lr))).collect()
    } else {
        vec![(cfg.occ.hidden, cfg.occ.lr)]
    };

    let mut best: Option<Scored> = None;
    for h in model_grid(cfg) {
        let mut model = build_model(cfg, &h, ds.feature_dim(), derive_seed(seed, &[3]))?;
        let spec = match &model {
            AnyModel::Muse(m) => e.method.representation(&m.cfg),
            _ => RepresentationSpec::default(),
        };
        let tcfg = cfg.train.config(derive_seed(seed, &[4]));
        let tcfg = crate::models::TrainConfig {
            epochs: h.epochs,
            lr: h.lr,
            ..tcfg
        };
        let mut snapshots = Vec::new();
        train_with_callback(&mut model, &sets.train, &tcfg, |epoch, m| {
            if snapshot_epochs.contains(&epoch) {
                snapshots.push((
                    epoch,
                    representations(m, &spec, &sets.train)?,
                    representations(m, &spec, &sets.val)?,
                    representations(m, &spec, &sets.test)?,
                ));
            }
            Ok(())
        })?;
        for (epoch, train_r, val_r, test_r) in &snapshots {
            for &(occ_hidden, occ_lr) in &occ_grid {
                let occ_cfg = OccConfig {
                    epochs: cfg.occ.epochs,
                    ..OccConfig::new(occ_hidden, occ_lr, derive_seed(seed, &[5]))
                };
                let occ = OccModel::fit(train_r, &occ_cfg)?;
                let val_auroc = auroc(&occ.score_batch(val_r)?, &sets.val_y)?;
                if best.as_ref().is_none_or(|b| val_auroc > b.val_auroc) {
                    best = Some(Scored {
                        hyper: Hyper {
                            epochs: *epoch,
                            occ_hidden,
                            occ_lr,
                            ..h.clone()
                        },
                        val_auroc,
                        test_scores: occ.score_batch(test_r)?,
                    });
                }
            }
        }
    }
    let best = best.ok_or_else(|| MuseError::Config("empty hyperparameter search".into()))?;
    let k = e.precision_k.min(sets.test.len());
    let result = TrialResult {
        config_id: format!("{}/{}/class{}", e.dataset, e.method, normal_class),
        normal_class,
        trial,
        seed,
        contaminated,
        val_auroc: best.val_auroc,
        auroc: auroc(&best.test_scores, &sets.test_y)?,
        ap: average_precision(&best.test_scores, &sets.test_y)?,
        precision_at_k: precision_at_k(&best.test_scores, &sets.test_y, k)?,
        k,
        hyper: best.hyper,
        runtime_secs: started.elapsed().as_secs_f64(),
    };
    log::info!(
        "{} trial {}: auroc {:.4} ap {:.4} p@{} {:.4}",
        result.config_id,
        trial,
        result.auroc,
        result.ap,
        k,
        result.precision_at_k
    );
    Ok(result)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population standard deviation.
fn std(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(v: &[f64]) -> Self {
        MeanStd { mean: mean(v), std: std(v) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassSummary {
    pub normal_class: usize,
    pub auroc: MeanStd,
    pub ap: MeanStd,
    pub precision_at_k: MeanStd,
}

/// Mean over classes of the per-class trial means, with the standard
/// deviation both averaged over classes and pooled over all trials.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std_per_class: f64,
    pub std_pooled: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GladSummary {
    pub auroc: MetricSummary,
    pub ap: MetricSummary,
    pub precision_at_k: MetricSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct GladReport {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
    pub classes: Vec<ClassSummary>,
    pub summary: GladSummary,
}

fn summarize(trials: &[TrialResult]) -> (Vec<ClassSummary>, GladSummary) {
    let mut by_class: BTreeMap<usize, Vec<&TrialResult>> = BTreeMap::new();
    for t in trials {
        by_class.entry(t.normal_class).or_default().push(t);
    }
    let metric = |t: &TrialResult, k: usize| [t.auroc, t.ap, t.precision_at_k][k];
    let classes: Vec<ClassSummary> = by_class
        .iter()
        .map(|(&c, ts)| {
            let col = |k| MeanStd::of(&ts.iter().map(|t| metric(t, k)).collect::<Vec<_>>());
            ClassSummary {
                normal_class: c,
                auroc: col(0),
                ap: col(1),
                precision_at_k: col(2),
            }
        })
        .collect();
    let overall = |k: usize| {
        let per: Vec<MeanStd> = classes.iter().map(|c| [c.auroc, c.ap, c.precision_at_k][k]).collect();
        MetricSummary {
            mean: mean(&per.iter().map(|m| m.mean).collect::<Vec<_>>()),
            std_per_class: mean(&per.iter().map(|m| m.std).collect::<Vec<_>>()),
            std_pooled: std(&trials.iter().map(|t| metric(t, k)).collect::<Vec<_>>()),
        }
    };
    let summary = GladSummary {
        auroc: overall(0),
        ap: overall(1),
        precision_at_k: overall(2),
    };
    (classes, summary)
}

/// Runs every (normal class, trial) pair; trials run in parallel.
pub fn run_glad_experiment(cfg: &ExperimentConfig, ds: &GraphDataset) -> Result<GladReport> {
    cfg.validate()?;
    let present = ds.class_ids();
    let classes: Vec<usize> = match &cfg.experiment.normal_classes {
        Some(c) => c.clone(),
        None => present.iter().copied().collect(),
    };
    if classes.is_empty() {
        return Err(MuseError::Config("no normal classes".into()));
    }
    if let Some(c) = classes.iter().find(|c| !present.contains(c)) {
        return Err(MuseError::Config(format!("normal class {c} not in dataset classes {present:?}")));
    }
    let jobs: Vec<(usize, usize)> = classes
        .iter()
        .flat_map(|&c| (0..cfg.experiment.trials).map(move |t| (c, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(c, t)| run_trial(cfg, ds, c, t))
        .collect::<Result<Vec<_>>>()?;
    let (classes, summary) = summarize(&trials);
    Ok(GladReport {
        config: cfg.clone(),
        trials,
        classes,
        summary,
    })
}

impl GladReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let s = serde_json::to_string_pretty(self).map_err(|e| MuseError::Config(e.to_string()))?;
        std::fs::write(path, s)?;
        Ok(())
    }

    /// One row per trial.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_err)?;
        w.write_record(["config_id", "normal_class", "trial", "seed", "val_auroc", "auroc", "ap", "precision_at_k", "k", "runtime_secs"])
            .map_err(csv_err)?;
        for t in &self.trials {
            w.write_record([
                t.config_id.clone(),
                t.normal_class.to_string(),
                t.trial.to_string(),
                t.seed.to_string(),
                t.val_auroc.to_string(),
                t.auroc.to_string(),
                t.ap.to_string(),
                t.precision_at_k.to_string(),
                t.k.to_string(),
                format!("{:.3}", t.runtime_secs),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}
