//! Per-node and per-pair reconstruction errors and their fixed-size summary.

use std::path::Path;

use crate::error::{MuseError, Result};
use crate::graph::Graph;
use crate::models::{FeatLoss, GraphBatch, MuseModel};

/// Errors of one graph. Adjacency errors are row-major over all `n^2` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorVectors {
    pub feature_errors: Vec<f64>,
    pub adjacency_errors: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregator {
    Mean,
    Std,
}

impl Aggregator {
    pub fn apply(self, v: &[f64]) -> f64 {
        match self {
            Aggregator::Mean => mean(v),
            Aggregator::Std => population_std(v),
        }
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Standard deviation with `1/|v|` inside the root.
pub fn population_std(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Which halves and aggregations make up the representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationSpec {
    pub aggregators: Vec<Aggregator>,
    pub use_x: bool,
    pub use_a: bool,
}

impl Default for RepresentationSpec {
    fn default() -> Self {
        RepresentationSpec {
            aggregators: vec![Aggregator::Mean, Aggregator::Std],
            use_x: true,
            use_a: true,
        }
    }
}

impl RepresentationSpec {
    pub fn dim(&self) -> usize {
        self.aggregators.len() * (usize::from(self.use_x) + usize::from(self.use_a))
    }
}

/// `[Agg_1(L_X), .., Agg_T(L_X), Agg_1(L_A), .., Agg_T(L_A)]` restricted to
/// the enabled halves.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRepresentation {
    pub values: Vec<f64>,
}

pub fn aggregate(vectors: &ErrorVectors, spec: &RepresentationSpec) -> Result<ErrorRepresentation> {
    if spec.aggregators.is_empty() {
        return Err(MuseError::Contract("no aggregators given".into()));
    }
    if !spec.use_x && !spec.use_a {
        return Err(MuseError::Contract("representation uses neither error vector".into()));
    }
    let mut values = Vec::with_capacity(spec.dim());
    for (on, v) in [(spec.use_x, &vectors.feature_errors), (spec.use_a, &vectors.adjacency_errors)] {
        if !on {
            continue;
        }
        if v.is_empty() {
            return Err(MuseError::Contract("cannot aggregate an empty error vector".into()));
        }
        values.extend(spec.aggregators.iter().map(|a| a.apply(v)));
    }
    Ok(ErrorRepresentation { values })
}

fn cosine_error(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        1.0
    } else {
        1.0 - dot / (nx * ny)
    }
}

/// Negated log-likelihood of a clamped probability.
pub fn bce_error(a: f64, p: f64) -> f64 {
    -(a * p.ln() + (1.0 - a) * (1.0 - p).ln())
}

/// Error vectors of every graph in the batch from one evaluation pass on
/// the original graphs. Feature errors follow the model's feature loss
/// (`1 - cos`, or squared distance for the Frobenius variant); adjacency
/// errors carry no positive-edge weight.
pub fn compute_error_vectors_batch(model: &MuseModel, batch: &GraphBatch) -> Result<Vec<ErrorVectors>> {
    let rec = model.reconstruct(batch)?;
    if rec.xhat.cols() != batch.features.cols() {
        return Err(MuseError::Contract("decoder output does not match feature_dim".into()));
    }
    let mut out = Vec::with_capacity(batch.num_graphs());
    for g in 0..batch.num_graphs() {
        let feature_errors = batch
            .node_range(g)
            .map(|i| {
                let (x, y) = (batch.features.row(i), rec.xhat.row(i));
                match model.cfg.feature_loss {
                    FeatLoss::Cosine => cosine_error(x, y),
                    FeatLoss::Frobenius => x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum(),
                }
            })
            .collect();
        let adjacency_errors = batch
            .pair_range(g)
            .map(|k| bce_error(batch.all_pairs.target.data()[k], rec.ahat.data()[k]))
            .collect();
        out.push(ErrorVectors {
            feature_errors,
            adjacency_errors,
        });
    }
    Ok(out)
}

pub fn compute_error_vectors(model: &MuseModel, graph: &Graph) -> Result<ErrorVectors> {
    let batch = GraphBatch::new(std::slice::from_ref(graph))?;
    Ok(compute_error_vectors_batch(model, &batch)?.remove(0))
}

/// Error representations for many graphs, processed in chunks.
pub fn error_representations(model: &MuseModel, graphs: &[Graph], spec: &RepresentationSpec) -> Result<Vec<ErrorRepresentation>> {
    let mut reps = Vec::with_capacity(graphs.len());
    for chunk in graphs.chunks(256) {
        let batch = GraphBatch::new(chunk)?;
        for v in compute_error_vectors_batch(model, &batch)? {
            reps.push(aggregate(&v, spec)?);
        }
    }
    Ok(reps)
}

/// Writes `i,j,a,err` for every node pair of `graph`.
pub fn export_error_distribution(model: &MuseModel, graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let v = compute_error_vectors(model, graph)?;
    let n = graph.node_count();
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(csv_err)?;
    w.write_record(["i", "j", "a", "err"]).map_err(csv_err)?;
    for i in 0..n {
        for j in 0..n {
            let a = graph.adjacency().get(i, j);
            w.write_record([i.to_string(), j.to_string(), format!("{a}"), format!("{:?}", v.adjacency_errors[i * n + j])])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> MuseError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => MuseError::Io(io),
        other => MuseError::Contract(format!("csv: {other:?}")),
    }
}
