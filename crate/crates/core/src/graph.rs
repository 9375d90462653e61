//! Graph data model, TU flat-file ingestion and export, degree features,
//! splitting and contamination.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use tensorlab::rng::seeded;
use tensorlab::Tensor;

use crate::error::{MuseError, Result};

/// Undirected simple graph with dense adjacency and node features.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    adjacency: Tensor,
    features: Tensor,
    label: Option<usize>,
}

impl Graph {
    pub fn new(adjacency: Tensor, features: Tensor, label: Option<usize>) -> Result<Self> {
        let n = adjacency.rows();
        if n == 0 {
            return Err(MuseError::InvalidGraph("graph has no nodes".into()));
        }
        if adjacency.cols() != n {
            return Err(MuseError::InvalidGraph(format!("adjacency is {}x{}", n, adjacency.cols())));
        }
        if features.rows() != n || features.cols() == 0 {
            return Err(MuseError::InvalidGraph(format!(
                "features are {}x{} for {n} nodes",
                features.rows(),
                features.cols()
            )));
        }
        for i in 0..n {
            if adjacency.get(i, i) != 0.0 {
                return Err(MuseError::InvalidGraph(format!("self-loop at node {i}")));
            }
            for j in 0..n {
                let a = adjacency.get(i, j);
                if a != 0.0 && a != 1.0 {
                    return Err(MuseError::InvalidGraph(format!("adjacency entry ({i},{j}) = {a}")));
                }
                if a != adjacency.get(j, i) {
                    return Err(MuseError::InvalidGraph(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Graph {
            adjacency,
            features,
            label,
        })
    }

    /// Builds from undirected edges; duplicates and self-loops are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], features: Tensor, label: Option<usize>) -> Result<Self> {
        let mut a = Tensor::zeros(n, n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(MuseError::InvalidGraph(format!("edge ({u},{v}) outside {n} nodes")));
            }
            if u != v {
                a.set(u, v, 1.0);
                a.set(v, u, 1.0);
            }
        }
        Graph::new(a, features, label)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn adjacency(&self) -> &Tensor {
        &self.adjacency
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn with_label(mut self, label: Option<usize>) -> Self {
        self.label = label;
        self
    }

    pub fn with_features(&self, features: Tensor) -> Result<Self> {
        Graph::new(self.adjacency.clone(), features, self.label)
    }

    /// Undirected edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.node_count();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.adjacency.get(i, j) != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.sum() as usize / 2
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count())
            .map(|i| self.adjacency.row(i).iter().filter(|&&x| x != 0.0).count())
            .collect()
    }

    /// Same graph with nodes relabelled so that new node `k` is old node
    /// `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        if perm.len() != n || perm.iter().copied().collect::<BTreeSet<_>>().len() != n || perm.iter().any(|&p| p >= n) {
            return Err(MuseError::Precondition("permutation is not a bijection".into()));
        }
        let a = Tensor::from_fn(n, n, |i, j| self.adjacency.get(perm[i], perm[j]));
        let x = Tensor::from_fn(n, self.feature_dim(), |i, j| self.features.get(perm[i], j));
        Graph::new(a, x, self.label)
    }
}

/// Ordered graphs sharing one feature dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphDataset {
    pub name: String,
    graphs: Vec<Graph>,
    feature_dim: usize,
    /// Original label value for each contiguous class id.
    class_values: Vec<i64>,
}

impl GraphDataset {
    /// Class ids are taken from the graphs; original values default to the
    /// ids themselves.
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>) -> Result<Self> {
        let max_class = graphs.iter().filter_map(Graph::label).max();
        let class_values = match max_class {
            Some(m) => (0..=m as i64).collect(),
            None => Vec::new(),
        };
        Self::with_class_values(name, graphs, class_values)
    }

    pub fn with_class_values(name: impl Into<String>, graphs: Vec<Graph>, class_values: Vec<i64>) -> Result<Self> {
        let feature_dim = graphs.first().map_or(0, Graph::feature_dim);
        if let Some((k, g)) = graphs.iter().enumerate().find(|(_, g)| g.feature_dim() != feature_dim) {
            return Err(MuseError::InvalidGraph(format!(
                "graph {k} has feature_dim {} but dataset uses {feature_dim}",
                g.feature_dim()
            )));
        }
        if let Some(l) = graphs.iter().filter_map(Graph::label).find(|&l| l >= class_values.len()) {
            return Err(MuseError::InvalidGraph(format!("label {l} has no class value")));
        }
        Ok(GraphDataset {
            name: name.into(),
            graphs,
            feature_dim,
            class_values,
        })
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Labels actually present.
    pub fn class_ids(&self) -> BTreeSet<usize> {
        self.graphs.iter().filter_map(Graph::label).collect()
    }

    pub fn class_values(&self) -> &[i64] {
        &self.class_values
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let graphs = indices
            .iter()
            .map(|&i| {
                self.graphs
                    .get(i)
                    .cloned()
                    .ok_or_else(|| MuseError::Precondition(format!("index {i} outside dataset of {}", self.len())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_class_values(self.name.clone(), graphs, self.class_values.clone())
    }

    pub fn mean_node_count(&self) -> f64 {
        if self.graphs.is_empty() {
            return 0.0;
        }
        self.graphs.iter().map(|g| g.node_count() as f64).sum::<f64>() / self.len() as f64
    }
}

struct LineFile {
    path: PathBuf,
    lines: Vec<(usize, String)>,
}

fn read_lines(path: PathBuf) -> Result<LineFile> {
    let text = fs::read_to_string(&path).map_err(|source| MuseError::Ingest {
        path: path.clone(),
        source,
    })?;
    let lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    Ok(LineFile { path, lines })
}

fn read_optional(path: PathBuf) -> Result<Option<LineFile>> {
    if path.exists() {
        read_lines(path).map(Some)
    } else {
        Ok(None)
    }
}

fn parse_num<T: std::str::FromStr>(file: &LineFile, line: usize, field: &str) -> Result<T> {
    field.trim().parse().map_err(|_| MuseError::Format {
        path: file.path.clone(),
        line,
        msg: format!("cannot parse {:?}", field.trim()),
    })
}

fn format_err(file: &LineFile, line: usize, msg: impl Into<String>) -> MuseError {
    MuseError::Format {
        path: file.path.clone(),
        line,
        msg: msg.into(),
    }
}

/// Reads `<root>/<name>_{A,graph_indicator,graph_labels}.txt` and the
/// optional `_node_labels.txt` / `_node_attributes.txt`.
///
/// Node labels are one-hot encoded over their sorted distinct values; node
/// attributes are appended after them. Without either, features are the
/// one-hot degree with the cap at the 95th-percentile degree.
pub fn parse_tu_dataset(root: impl AsRef<Path>, name: &str) -> Result<GraphDataset> {
    let root = root.as_ref();
    let file = |suffix: &str| root.join(format!("{name}_{suffix}.txt"));
    let indicator = read_lines(file("graph_indicator"))?;
    let labels = read_lines(file("graph_labels"))?;
    let edges = read_lines(file("A"))?;
    let node_labels = read_optional(file("node_labels"))?;
    let node_attrs = read_optional(file("node_attributes"))?;

    let raw_labels: Vec<i64> = labels
        .lines
        .iter()
        .map(|(ln, l)| parse_num(&labels, *ln, l))
        .collect::<Result<_>>()?;
    let n_graphs = raw_labels.len();
    let class_values: Vec<i64> = raw_labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let class_of: BTreeMap<i64, usize> = class_values.iter().enumerate().map(|(k, &v)| (v, k)).collect();

    let mut graph_of_node = Vec::with_capacity(indicator.lines.len());
    for (ln, l) in &indicator.lines {
        let gid: usize = parse_num(&indicator, *ln, l)?;
        if gid == 0 || gid > n_graphs {
            return Err(format_err(
                &indicator,
                *ln,
                format!("node refers to graph {gid}, but only {n_graphs} graphs are labelled"),
            ));
        }
        graph_of_node.push(gid - 1);
    }
    let n_nodes = graph_of_node.len();
    for w in graph_of_node.windows(2) {
        if w[1] < w[0] {
            return Err(MuseError::Precondition("graph indicator is not sorted by graph id".into()));
        }
    }
    let mut offset = vec![0usize; n_graphs + 1];
    for &g in &graph_of_node {
        offset[g + 1] += 1;
    }
    for g in 0..n_graphs {
        offset[g + 1] += offset[g];
    }
    if let Some(g) = (0..n_graphs).find(|&g| offset[g + 1] == offset[g]) {
        return Err(MuseError::Precondition(format!("graph {} has no nodes", g + 1)));
    }

    let mut edge_lists: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_graphs];
    for (ln, l) in &edges.lines {
        let mut parts = l.split(',');
        let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format_err(&edges, *ln, "expected two comma-separated node ids"));
        };
        let u: usize = parse_num(&edges, *ln, u)?;
        let v: usize = parse_num(&edges, *ln, v)?;
        if u == 0 || v == 0 || u > n_nodes || v > n_nodes {
            return Err(format_err(&edges, *ln, format!("node id outside 1..={n_nodes}")));
        }
        let (gu, gv) = (graph_of_node[u - 1], graph_of_node[v - 1]);
        if gu != gv {
            return Err(format_err(&edges, *ln, "edge joins nodes of different graphs"));
        }
        edge_lists[gu].push((u - 1 - offset[gu], v - 1 - offset[gu]));
    }

    let mut feature_blocks: Vec<Tensor> = Vec::new();
    if let Some(nl) = &node_labels {
        if nl.lines.len() != n_nodes {
            return Err(MuseError::Precondition(format!(
                "{} has {} lines for {n_nodes} nodes",
                nl.path.display(),
                nl.lines.len()
            )));
        }
        let vals: Vec<i64> = nl
            .lines
            .iter()
            .map(|(ln, l)| parse_num(nl, *ln, l.split(',').next().unwrap_or("")))
            .collect::<Result<_>>()?;
        let distinct: Vec<i64> = vals.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let idx: BTreeMap<i64, usize> = distinct.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let mut t = Tensor::zeros(n_nodes, distinct.len());
        for (node, v) in vals.iter().enumerate() {
            t.set(node, idx[v], 1.0);
        }
        feature_blocks.push(t);
    }
    if let Some(na) = &node_attrs {
        if na.lines.len() != n_nodes {
            return Err(MuseError::Precondition(format!(
                "{} has {} lines for {n_nodes} nodes",
                na.path.display(),
                na.lines.len()
            )));
        }
        let rows: Vec<Vec<f64>> = na
            .lines
            .iter()
            .map(|(ln, l)| l.split(',').map(|f| parse_num(na, *ln, f)).collect::<Result<Vec<f64>>>())
            .collect::<Result<_>>()?;
        let width = rows[0].len();
        if let Some(k) = rows.iter().position(|r| r.len() != width) {
            return Err(format_err(na, na.lines[k].0, format!("expected {width} attributes")));
        }
        feature_blocks.push(Tensor::from_rows(&rows)?);
    }

    let mut graphs = Vec::with_capacity(n_graphs);
    for g in 0..n_graphs {
        let n = offset[g + 1] - offset[g];
        let width: usize = feature_blocks.iter().map(Tensor::cols).sum::<usize>().max(1);
        let x = Tensor::from_fn(n, width, |i, j| {
            let mut col = j;
            for b in &feature_blocks {
                if col < b.cols() {
                    return b.get(offset[g] + i, col);
                }
                col -= b.cols();
            }
            0.0
        });
        graphs.push(Graph::from_edges(n, &edge_lists[g], x, Some(class_of[&raw_labels[g]]))?);
    }
    let ds = GraphDataset::with_class_values(name, graphs, class_values)?;
    if feature_blocks.is_empty() {
        let cap = percentile_degree_cap(&ds, 0.95);
        return one_hot_degree_features(&ds, cap);
    }
    Ok(ds)
}

/// Nearest-rank percentile of all node degrees, at least 1.
pub fn percentile_degree_cap(ds: &GraphDataset, q: f64) -> usize {
    let mut degs: Vec<usize> = ds.graphs().iter().flat_map(Graph::degrees).collect();
    if degs.is_empty() {
        return 1;
    }
    degs.sort_unstable();
    let rank = ((q * degs.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    degs[rank.min(degs.len()) - 1].max(1)
}

/// Replaces features by one-hot(min(degree, cap)) in `R^(cap+1)`.
pub fn one_hot_degree_features(ds: &GraphDataset, max_degree_cap: usize) -> Result<GraphDataset> {
    if max_degree_cap < 1 {
        return Err(MuseError::Precondition("max_degree_cap must be at least 1".into()));
    }
    let graphs = ds
        .graphs()
        .iter()
        .map(|g| {
            let deg = g.degrees();
            let x = Tensor::from_fn(g.node_count(), max_degree_cap + 1, |i, j| {
                if deg[i].min(max_degree_cap) == j {
                    1.0
                } else {
                    0.0
                }
            });
            g.with_features(x)
        })
        .collect::<Result<Vec<_>>>()?;
    GraphDataset::with_class_values(ds.name.clone(), graphs, ds.class_values.clone())
}

fn one_hot_column(row: &[f64]) -> Option<usize> {
    let mut hot = None;
    for (j, &v) in row.iter().enumerate() {
        if v == 1.0 {
            if hot.is_some() {
                return None;
            }
            hot = Some(j);
        } else if v != 0.0 {
            return None;
        }
    }
    hot
}

/// Writes the dataset in TU format. Features go to `_node_labels.txt` when
/// every row is one-hot and every column is used (so re-parsing restores
/// them exactly), otherwise to `_node_attributes.txt`.
pub fn write_tu_dataset(ds: &GraphDataset, dir: impl AsRef<Path>, name: &str) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let open = |suffix: &str| -> Result<std::io::BufWriter<fs::File>> {
        Ok(std::io::BufWriter::new(fs::File::create(dir.join(format!("{name}_{suffix}.txt")))?))
    };
    let mut a = open("A")?;
    let mut ind = open("graph_indicator")?;
    let mut lab = open("graph_labels")?;
    let mut base = 0usize;
    for (g, graph) in ds.graphs().iter().enumerate() {
        for _ in 0..graph.node_count() {
            writeln!(ind, "{}", g + 1)?;
        }
        for (i, j) in graph.edges() {
            writeln!(a, "{}, {}", base + i + 1, base + j + 1)?;
            writeln!(a, "{}, {}", base + j + 1, base + i + 1)?;
        }
        let value = graph.label().map_or(0, |l| ds.class_values.get(l).copied().unwrap_or(l as i64));
        writeln!(lab, "{value}")?;
        base += graph.node_count();
    }
    let hot: Option<Vec<usize>> = ds
        .graphs()
        .iter()
        .flat_map(|g| (0..g.node_count()).map(move |i| one_hot_column(g.features().row(i))))
        .collect();
    let all_used = hot
        .as_ref()
        .is_some_and(|h| h.iter().copied().collect::<BTreeSet<_>>().len() == ds.feature_dim());
    if let (Some(h), true) = (hot, all_used) {
        let mut nl = open("node_labels")?;
        for c in h {
            writeln!(nl, "{c}")?;
        }
        nl.flush()?;
    } else {
        let mut na = open("node_attributes")?;
        for g in ds.graphs() {
            for i in 0..g.node_count() {
                let row: Vec<String> = g.features().row(i).iter().map(|v| format!("{v:?}")).collect();
                writeln!(na, "{}", row.join(", "))?;
            }
        }
        na.flush()?;
    }
    a.flush()?;
    ind.flush()?;
    lab.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitSpec {
    pub normal_class: usize,
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub anomaly_val_frac: f64,
    pub anomaly_test_frac: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(normal_class: usize, seed: u64) -> Self {
        SplitSpec {
            normal_class,
            train_frac: 0.8,
            val_frac: 0.1,
            test_frac: 0.1,
            anomaly_val_frac: 0.05,
            anomaly_test_frac: 0.05,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let fr = [
            self.train_frac,
            self.val_frac,
            self.test_frac,
            self.anomaly_val_frac,
            self.anomaly_test_frac,
        ];
        if fr.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(MuseError::Precondition("split fractions must lie in [0,1]".into()));
        }
        if (self.train_frac + self.val_frac + self.test_frac - 1.0).abs() > 1e-9 {
            return Err(MuseError::Precondition("train+val+test fractions must sum to 1".into()));
        }
        Ok(())
    }
}

/// Index lists into a [`GraphDataset`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataSplit {
    pub train: Vec<usize>,
    pub val_normal: Vec<usize>,
    pub val_anomaly: Vec<usize>,
    pub test_normal: Vec<usize>,
    pub test_anomaly: Vec<usize>,
    /// Anomalies assigned to neither val nor test; the contamination pool.
    pub unused_anomalies: Vec<usize>,
}

impl DataSplit {
    /// Validation indices with anomaly flags (normals first).
    pub fn val(&self) -> Vec<(usize, bool)> {
        labelled(&self.val_normal, &self.val_anomaly)
    }

    pub fn test(&self) -> Vec<(usize, bool)> {
        labelled(&self.test_normal, &self.test_anomaly)
    }

    pub fn all_lists(&self) -> [&[usize]; 6] {
        [
            &self.train,
            &self.val_normal,
            &self.val_anomaly,
            &self.test_normal,
            &self.test_anomaly,
            &self.unused_anomalies,
        ]
    }
}

fn labelled(normal: &[usize], anomaly: &[usize]) -> Vec<(usize, bool)> {
    normal.iter().map(|&i| (i, false)).chain(anomaly.iter().map(|&i| (i, true))).collect()
}

fn floor_frac(f: f64, n: usize) -> usize {
    (f * n as f64 + 1e-9).floor() as usize
}

fn ceil_frac(f: f64, n: usize) -> usize {
    (f * n as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Seeded split: normals by floor counts with the remainder in train,
/// anomalies by ceiling counts into val then test.
pub fn make_split(ds: &GraphDataset, spec: &SplitSpec) -> Result<DataSplit> {
    spec.validate()?;
    let mut normals: Vec<usize> = Vec::new();
    let mut anomalies: Vec<usize> = Vec::new();
    for (i, g) in ds.graphs().iter().enumerate() {
        if g.label() == Some(spec.normal_class) {
            normals.push(i);
        } else {
            anomalies.push(i);
        }
    }
    if normals.len() < 10 || anomalies.len() < 2 {
        return Err(MuseError::Precondition(format!(
            "need at least 10 normal and 2 anomalous graphs, have {} and {}",
            normals.len(),
            anomalies.len()
        )));
    }
    let mut rng = seeded(spec.seed);
    normals.shuffle(&mut rng);
    anomalies.shuffle(&mut rng);
    let n = normals.len();
    let n_val = floor_frac(spec.val_frac, n);
    let n_test = floor_frac(spec.test_frac, n);
    let n_train = n - n_val - n_test;
    let m = anomalies.len();
    let a_val = ceil_frac(spec.anomaly_val_frac, m);
    let a_test = ceil_frac(spec.anomaly_test_frac, m);
    if a_val + a_test > m {
        return Err(MuseError::Precondition(format!(
            "{m} anomalies cannot cover {a_val} validation and {a_test} test anomalies"
        )));
    }
    Ok(DataSplit {
        train: normals[..n_train].to_vec(),
        val_normal: normals[n_train..n_train + n_val].to_vec(),
        test_normal: normals[n_train + n_val..].to_vec(),
        val_anomaly: anomalies[..a_val].to_vec(),
        test_anomaly: anomalies[a_val..a_val + a_test].to_vec(),
        unused_anomalies: anomalies[a_val + a_test..].to_vec(),
    })
}

/// Appends `floor(rate * |train|)` unused anomalies to train.
pub fn contaminate_train(split: &DataSplit, rate: f64, seed: u64) -> Result<DataSplit> {
    if !(0.0..1.0).contains(&rate) {
        return Err(MuseError::Precondition(format!("contamination rate {rate} outside [0,1)")));
    }
    let k = floor_frac(rate, split.train.len());
    if k == 0 {
        return Ok(split.clone());
    }
    if k > split.unused_anomalies.len() {
        return Err(MuseError::Shortfall {
            needed: k,
            available: split.unused_anomalies.len(),
        });
    }
    let mut pool = split.unused_anomalies.clone();
    pool.shuffle(&mut seeded(seed));
    let mut out = split.clone();
    out.train.extend_from_slice(&pool[..k]);
    out.unused_anomalies = pool[k..].to_vec();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)], Tensor::ones(3, 1), Some(0)).unwrap()
    }

    #[test]
    fn graph_invariants_enforced() {
        let mut a = Tensor::zeros(2, 2);
        a.set(0, 1, 1.0);
        assert!(Graph::new(a.clone(), Tensor::ones(2, 1), None).is_err());
        a.set(1, 0, 1.0);
        assert!(Graph::new(a.clone(), Tensor::ones(3, 1), None).is_err());
        assert!(Graph::new(a.clone(), Tensor::ones(2, 1), None).is_ok());
        a.set(0, 0, 1.0);
        assert!(Graph::new(a, Tensor::ones(2, 1), None).is_err());
    }

    #[test]
    fn degree_one_hot_path_isolated_and_star() {
        let ds = GraphDataset::new("t", vec![path3()]).unwrap();
        let d = one_hot_degree_features(&ds, 4).unwrap();
        let x = d.graphs()[0].features();
        assert_eq!(x.cols(), 5);
        assert_eq!(x.row(0), &[0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(x.row(1), &[0.0, 0.0, 1.0, 0.0, 0.0]);

        let iso = Graph::from_edges(1, &[], Tensor::ones(1, 1), None).unwrap();
        let star = Graph::from_edges(8, &(1..8).map(|k| (0, k)).collect::<Vec<_>>(), Tensor::ones(8, 1), None).unwrap();
        let d = one_hot_degree_features(&GraphDataset::new("t", vec![iso, star]).unwrap(), 4).unwrap();
        assert_eq!(d.graphs()[0].features().row(0), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(d.graphs()[1].features().row(0), &[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(one_hot_degree_features(&d, 0).is_err());
    }

    #[test]
    fn percentile_cap_is_nearest_rank() {
        let star = Graph::from_edges(8, &(1..8).map(|k| (0, k)).collect::<Vec<_>>(), Tensor::ones(8, 1), None).unwrap();
        let ds = GraphDataset::new("t", vec![star]).unwrap();
        // degrees: seven 1s and one 7 -> 95th percentile rank ceil(7.6) = 8 -> 7
        assert_eq!(percentile_degree_cap(&ds, 0.95), 7);
        assert_eq!(percentile_degree_cap(&ds, 0.5), 1);
    }

    fn labelled_dataset(normals: usize, anomalies: usize) -> GraphDataset {
        let graphs = (0..normals + anomalies)
            .map(|k| path3().with_label(Some(usize::from(k >= normals))))
            .collect();
        GraphDataset::new("t", graphs).unwrap()
    }

    #[test]
    fn split_counts() {
        let s = make_split(&labelled_dataset(100, 100), &SplitSpec::new(0, 1)).unwrap();
        assert_eq!(
            (s.train.len(), s.val_normal.len(), s.val_anomaly.len(), s.test_normal.len(), s.test_anomaly.len()),
            (80, 10, 5, 10, 5)
        );
        let s = make_split(&labelled_dataset(10, 40), &SplitSpec::new(0, 1)).unwrap();
        assert_eq!(
            (s.train.len(), s.val_normal.len(), s.val_anomaly.len(), s.test_normal.len(), s.test_anomaly.len()),
            (8, 1, 2, 1, 2)
        );
        assert!(make_split(&labelled_dataset(9, 40), &SplitSpec::new(0, 1)).is_err());
        assert!(make_split(&labelled_dataset(20, 1), &SplitSpec::new(0, 1)).is_err());
    }

    #[test]
    fn contamination_counts_and_shortfall() {
        let ds = labelled_dataset(100, 100);
        let s = make_split(&ds, &SplitSpec::new(0, 4)).unwrap();
        let c = contaminate_train(&s, 0.1, 9).unwrap();
        assert_eq!(c.train.len(), 88);
        assert_eq!(contaminate_train(&s, 0.0, 9).unwrap(), s);

        let ds = labelled_dataset(100, 30);
        let s = make_split(&ds, &SplitSpec::new(0, 4)).unwrap();
        assert_eq!(s.unused_anomalies.len(), 26);
        let mut short = s.clone();
        short.unused_anomalies.truncate(20);
        assert!(matches!(
            contaminate_train(&short, 0.3, 1),
            Err(MuseError::Shortfall { needed: 24, available: 20 })
        ));
    }
}
