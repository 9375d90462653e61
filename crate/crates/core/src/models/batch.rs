use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;
use tensorlab::rng::seeded;
use tensorlab::{SparseMatrix, Tensor};

use crate::error::{MuseError, Result};
use crate::graph::Graph;

/// Ordered node pairs with their adjacency targets and a per-graph mean
/// reduction matrix.
#[derive(Clone, Debug)]
pub struct PairSet {
    pub pairs: Arc<Vec<(usize, usize)>>,
    /// `A_ij` for each pair, `m x 1`.
    pub target: Tensor,
    /// Graph index of each pair.
    pub graph_of: Vec<usize>,
    /// `G x m`, row `g` averages the pairs of graph `g`.
    pub mean: Arc<SparseMatrix>,
}

impl PairSet {
    fn build(graphs: usize, pairs: Vec<(usize, usize)>, target: Vec<f64>, graph_of: Vec<usize>) -> Result<Self> {
        let mut counts = vec![0usize; graphs];
        for &g in &graph_of {
            counts[g] += 1;
        }
        let trip: Vec<(usize, usize, f64)> = graph_of
            .iter()
            .enumerate()
            .map(|(k, &g)| (g, k, 1.0 / counts[g] as f64))
            .collect();
        let m = pairs.len();
        Ok(PairSet {
            pairs: Arc::new(pairs),
            target: Tensor::column(target),
            graph_of,
            mean: Arc::new(SparseMatrix::from_triplets(graphs, m, &trip)?),
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Several graphs stacked into one block-diagonal problem.
#[derive(Clone, Debug)]
pub struct GraphBatch {
    graphs: Vec<Graph>,
    offsets: Vec<usize>,
    pub features: Tensor,
    pub adjacency: Arc<SparseMatrix>,
    /// All `n_g^2` ordered pairs of every graph, diagonal included.
    pub all_pairs: PairSet,
    /// `G x n_total`, row `g` averages the nodes of graph `g`.
    pub node_mean: Arc<SparseMatrix>,
}

impl GraphBatch {
    pub fn new(graphs: &[Graph]) -> Result<Self> {
        if graphs.is_empty() {
            return Err(MuseError::Precondition("empty graph batch".into()));
        }
        let d = graphs[0].feature_dim();
        if graphs.iter().any(|g| g.feature_dim() != d) {
            return Err(MuseError::Precondition("graphs in a batch must share feature_dim".into()));
        }
        let mut offsets = Vec::with_capacity(graphs.len() + 1);
        offsets.push(0);
        for g in graphs {
            offsets.push(offsets.last().copied().unwrap_or(0) + g.node_count());
        }
        let total = *offsets.last().expect("non-empty");
        let mut x = Tensor::zeros(total, d);
        let mut pairs = Vec::new();
        let mut target = Vec::new();
        let mut graph_of = Vec::new();
        let mut node_trip = Vec::with_capacity(total);
        for (gi, g) in graphs.iter().enumerate() {
            let o = offsets[gi];
            let n = g.node_count();
            for i in 0..n {
                x.row_mut(o + i).copy_from_slice(g.features().row(i));
                node_trip.push((gi, o + i, 1.0 / n as f64));
                for j in 0..n {
                    pairs.push((o + i, o + j));
                    target.push(g.adjacency().get(i, j));
                    graph_of.push(gi);
                }
            }
        }
        let adjacency = Arc::new(block_adjacency(graphs, &offsets, None)?);
        Ok(GraphBatch {
            all_pairs: PairSet::build(graphs.len(), pairs, target, graph_of)?,
            node_mean: Arc::new(SparseMatrix::from_triplets(graphs.len(), total, &node_trip)?),
            graphs: graphs.to_vec(),
            offsets,
            features: x,
            adjacency,
        })
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn num_graphs(&self) -> usize {
        self.graphs.len()
    }

    pub fn total_nodes(&self) -> usize {
        *self.offsets.last().expect("offsets start at 0")
    }

    /// Row range of graph `g` in the stacked node matrix.
    pub fn node_range(&self, g: usize) -> std::ops::Range<usize> {
        self.offsets[g]..self.offsets[g + 1]
    }

    /// Range of graph `g` within [`GraphBatch::all_pairs`].
    pub fn pair_range(&self, g: usize) -> std::ops::Range<usize> {
        let start: usize = self.graphs[..g].iter().map(|h| h.node_count().pow(2)).sum();
        start..start + self.graphs[g].node_count().pow(2)
    }

    /// Block-diagonal adjacency after per-graph edge dropping.
    pub fn augmented_adjacency(&self, p: f64, seed: u64) -> Result<Arc<SparseMatrix>> {
        if p == 0.0 {
            return Ok(self.adjacency.clone());
        }
        let mut rng = seeded(seed);
        let kept: Vec<Vec<(usize, usize)>> = self
            .graphs
            .iter()
            .map(|g| kept_edges(&g.edges(), p, &mut rng))
            .collect::<Result<_>>()?;
        Ok(Arc::new(block_adjacency(&self.graphs, &self.offsets, Some(&kept))?))
    }

    /// For each node, `min(k, n_g)` distinct columns of its own graph drawn
    /// uniformly without replacement.
    pub fn sampled_pairs(&self, k: usize, seed: u64) -> Result<PairSet> {
        if k == 0 {
            return Err(MuseError::Precondition("sample size K must be at least 1".into()));
        }
        let mut rng = seeded(seed);
        let mut pairs = Vec::new();
        let mut target = Vec::new();
        let mut graph_of = Vec::new();
        for (gi, g) in self.graphs.iter().enumerate() {
            let o = self.offsets[gi];
            let n = g.node_count();
            for i in 0..n {
                let cols: Vec<usize> = if k >= n {
                    (0..n).collect()
                } else {
                    sample(&mut rng, n, k).into_vec()
                };
                for j in cols {
                    pairs.push((o + i, o + j));
                    target.push(g.adjacency().get(i, j));
                    graph_of.push(gi);
                }
            }
        }
        PairSet::build(self.graphs.len(), pairs, target, graph_of)
    }
}

/// Edges surviving the removal of `ceil(p |E|)` distinct edges.
pub(crate) fn kept_edges<R: Rng + ?Sized>(edges: &[(usize, usize)], p: f64, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    if !(0.0..1.0).contains(&p) {
        return Err(MuseError::Precondition(format!("edge drop rate {p} outside [0,1)")));
    }
    let drop = ((p * edges.len() as f64) - 1e-9).ceil().max(0.0) as usize;
    if drop == 0 {
        return Ok(edges.to_vec());
    }
    let removed: std::collections::BTreeSet<usize> = sample(rng, edges.len(), drop).into_iter().collect();
    Ok(edges
        .iter()
        .enumerate()
        .filter(|(k, _)| !removed.contains(k))
        .map(|(_, &e)| e)
        .collect())
}

fn block_adjacency(graphs: &[Graph], offsets: &[usize], edges: Option<&[Vec<(usize, usize)>]>) -> Result<SparseMatrix> {
    let total = *offsets.last().unwrap_or(&0);
    let mut trip = Vec::new();
    for (gi, g) in graphs.iter().enumerate() {
        let o = offsets[gi];
        let own;
        let list = match edges {
            Some(e) => &e[gi],
            None => {
                own = g.edges();
                &own
            }
        };
        for &(i, j) in list {
            trip.push((o + i, o + j, 1.0));
            trip.push((o + j, o + i, 1.0));
        }
    }
    Ok(SparseMatrix::from_triplets(total, total, &trip)?)
}

/// Removes exactly `ceil(p |E|)` distinct undirected edges chosen uniformly.
pub fn edge_drop_augment(graph: &Graph, p: f64, seed: u64) -> Result<Graph> {
    let kept = kept_edges(&graph.edges(), p, &mut seeded(seed))?;
    Graph::from_edges(graph.node_count(), &kept, graph.features().clone(), graph.label())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let x = Tensor::from_fn(n, 4, |i, j| f64::from(u8::from(i % 4 == j)));
        Graph::from_edges(n, &e, x, None).unwrap()
    }

    #[test]
    fn edge_drop_counts() {
        let g = ring(10);
        assert_eq!(edge_drop_augment(&g, 0.0, 1).unwrap(), g);
        assert_eq!(edge_drop_augment(&g, 0.5, 1).unwrap().edge_count(), 5);
        let tri = ring(3);
        assert_eq!(edge_drop_augment(&tri, 0.4, 2).unwrap().edge_count(), 1);
        assert!(edge_drop_augment(&tri, 1.0, 2).is_err());
    }

    #[test]
    fn batch_layout() {
        let b = GraphBatch::new(&[ring(3), ring(4)]).unwrap();
        assert_eq!(b.total_nodes(), 7);
        assert_eq!(b.all_pairs.len(), 9 + 16);
        assert_eq!(b.node_range(1), 3..7);
        assert_eq!(b.pair_range(1), 9..25);
        assert_eq!(b.adjacency.nnz(), 6 + 8);
        let row_sums: Vec<f64> = (0..2).map(|g| b.all_pairs.mean.row_entries(g).map(|(_, v)| v).sum()).collect();
        assert!((row_sums[0] - 1.0).abs() < 1e-12 && (row_sums[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn batch_augmentation_matches_single_graph_rule() {
        let graphs = vec![ring(6)];
        let b = GraphBatch::new(&graphs).unwrap();
        let aug = b.augmented_adjacency(0.3, 11).unwrap();
        let single = edge_drop_augment(&graphs[0], 0.3, 11).unwrap();
        assert_eq!(aug.to_dense(), *single.adjacency());
    }

    #[test]
    fn sampled_pairs_cover_all_when_k_large() {
        let b = GraphBatch::new(&[ring(5)]).unwrap();
        let s = b.sampled_pairs(9, 0).unwrap();
        assert_eq!(s.len(), 25);
        let s = b.sampled_pairs(2, 0).unwrap();
        assert_eq!(s.len(), 10);
        assert!(b.sampled_pairs(0, 0).is_err());
    }
}
