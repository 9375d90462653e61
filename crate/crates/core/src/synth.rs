//! Synthetic graph families: two-community graphs (Syn-Com), the n-cycle with
//! its single-edge-relocated pan variants (Syn-Cycle), and the four
//! train/unseen pairings used for reconstruction-flip experiments.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use tensorlab::rng::{derive_seed, seeded};
use tensorlab::Tensor;

use crate::error::{MuseError, Result};
use crate::graph::{Graph, GraphDataset};

#[derive(Clone, Debug, PartialEq)]
pub struct SynComParams {
    pub n: usize,
    pub tau: f64,
    pub count: usize,
    pub seed: u64,
}

impl SynComParams {
    pub fn new(tau: f64, count: usize, seed: u64) -> Self {
        SynComParams { n: 10, tau, count, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 4 || self.n % 2 != 0 {
            return Err(MuseError::Precondition(format!("n = {} must be even and at least 4", self.n)));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(MuseError::Precondition(format!("tau = {} outside [0,1]", self.tau)));
        }
        Ok(())
    }
}

/// Nodes `0..n/2` and `n/2..n` form the two communities.
pub fn same_community(n: usize, i: usize, j: usize) -> bool {
    (i < n / 2) == (j < n / 2)
}

/// Two-block graphs with intra-edge probability `(1+tau)/2`, inter-edge
/// probability `(1-tau)/2` and identity features. Graphs are unlabelled.
pub fn gen_syn_com(params: &SynComParams) -> Result<GraphDataset> {
    params.validate()?;
    let n = params.n;
    let p_in = (1.0 + params.tau) / 2.0;
    let p_out = (1.0 - params.tau) / 2.0;
    let mut rng = seeded(params.seed);
    let mut graphs = Vec::with_capacity(params.count);
    for _ in 0..params.count {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let p = if same_community(n, i, j) { p_in } else { p_out };
                if rng.gen::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        graphs.push(Graph::from_edges(n, &edges, Tensor::identity(n), None)?);
    }
    GraphDataset::new(format!("syn-com-tau{}", params.tau), graphs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynCycleFamily {
    pub n: usize,
    pub clean: Graph,
    pub noisy: Vec<Graph>,
}

fn cycle_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

/// The clean n-cycle plus, for every cycle edge `{v_i, v_j}`, the two pan
/// graphs obtained by re-attaching one endpoint to the other endpoint's
/// second neighbour.
pub fn gen_syn_cycle(n: usize) -> Result<SynCycleFamily> {
    if n < 4 {
        return Err(MuseError::Precondition(format!("cycle length {n} must be at least 4")));
    }
    let x = Tensor::identity(n);
    let cycle = cycle_edges(n);
    let clean = Graph::from_edges(n, &cycle, x.clone(), None)?;
    let mut noisy = Vec::with_capacity(2 * n);
    for (k, &(i, j)) in cycle.iter().enumerate() {
        let mut rest: Vec<(usize, usize)> = cycle.clone();
        rest.remove(k);
        let j_other = (j + 1) % n; // neighbour of v_j other than v_i
        let i_other = (i + n - 1) % n; // neighbour of v_i other than v_j
        for extra in [(i, j_other), (j, i_other)] {
            let mut e = rest.clone();
            e.push(extra);
            noisy.push(Graph::from_edges(n, &e, x.clone(), None)?);
        }
    }
    Ok(SynCycleFamily { n, clean, noisy })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipKind {
    ComCom,
    CycleCycle,
    ComCycle,
    CycleCom,
}

impl FlipKind {
    pub const ALL: [FlipKind; 4] = [FlipKind::ComCom, FlipKind::CycleCycle, FlipKind::ComCycle, FlipKind::CycleCom];

    pub fn as_str(self) -> &'static str {
        match self {
            FlipKind::ComCom => "com-com",
            FlipKind::CycleCycle => "cycle-cycle",
            FlipKind::ComCycle => "com-cycle",
            FlipKind::CycleCom => "cycle-com",
        }
    }
}

impl fmt::Display for FlipKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FlipKind {
    type Err = MuseError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match key.as_str() {
            "comcom" => Ok(FlipKind::ComCom),
            "cyclecycle" => Ok(FlipKind::CycleCycle),
            "comcycle" => Ok(FlipKind::ComCycle),
            "cyclecom" => Ok(FlipKind::CycleCom),
            _ => Err(MuseError::Config(format!("unknown flip kind {s:?}"))),
        }
    }
}

pub const FLIP_N: usize = 10;
pub const FLIP_COM_COUNT: usize = 500;
pub const TRAIN_TAU: f64 = 0.4;
pub const UNSEEN_TAU: f64 = 0.8;

/// The first `n` pan graphs after a seeded shuffle.
fn half_of_noisy(family: &SynCycleFamily, seed: u64) -> Vec<Graph> {
    let mut noisy = family.noisy.clone();
    noisy.shuffle(&mut seeded(seed));
    noisy.truncate(family.n);
    noisy
}

fn com(tau: f64, seed: u64) -> Result<GraphDataset> {
    gen_syn_com(&SynComParams {
        n: FLIP_N,
        tau,
        count: FLIP_COM_COUNT,
        seed,
    })
}

/// `(train, unseen)` datasets for a flip experiment.
pub fn build_flip_dataset(kind: FlipKind, seed: u64) -> Result<(GraphDataset, GraphDataset)> {
    let family = gen_syn_cycle(FLIP_N)?;
    let s_train = derive_seed(seed, &[1]);
    let s_unseen = derive_seed(seed, &[2]);
    let cyc = |s| GraphDataset::new("syn-cycle-noisy", half_of_noisy(&family, s));
    let (train, unseen) = match kind {
        FlipKind::ComCom => (com(TRAIN_TAU, s_train)?, com(UNSEEN_TAU, s_unseen)?),
        FlipKind::CycleCycle => (cyc(s_train)?, GraphDataset::new("syn-cycle-clean", vec![family.clean.clone()])?),
        FlipKind::ComCycle => (com(TRAIN_TAU, s_train)?, cyc(s_unseen)?),
        FlipKind::CycleCom => (cyc(s_train)?, com(TRAIN_TAU, s_unseen)?),
    };
    Ok((train, unseen))
}

/// Copy of `ds` with every graph given `label`.
pub fn relabel(ds: &GraphDataset, label: usize) -> Result<Vec<Graph>> {
    Ok(ds.graphs().iter().map(|g| g.clone().with_label(Some(label))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_one_gives_two_cliques() {
        let ds = gen_syn_com(&SynComParams::new(1.0, 5, 3)).unwrap();
        for g in ds.graphs() {
            assert_eq!(g.edge_count(), 20);
            for (i, j) in g.edges() {
                assert!(same_community(10, i, j));
            }
            assert_eq!(g.features(), &Tensor::identity(10));
        }
    }

    #[test]
    fn params_validated() {
        assert!(gen_syn_com(&SynComParams { n: 7, tau: 0.5, count: 1, seed: 0 }).is_err());
        assert!(gen_syn_com(&SynComParams { n: 8, tau: 1.5, count: 1, seed: 0 }).is_err());
        assert!(gen_syn_cycle(3).is_err());
    }

    #[test]
    fn cycle_family_shape() {
        let f = gen_syn_cycle(4).unwrap();
        assert_eq!(f.noisy.len(), 8);
        for g in &f.noisy {
            let mut d = g.degrees();
            d.sort_unstable();
            assert_eq!(d, vec![1, 2, 2, 3]);
        }
        assert!(f.clean.degrees().iter().all(|&d| d == 2));
    }

    #[test]
    fn flip_dataset_sizes_and_determinism() {
        let (t, u) = build_flip_dataset(FlipKind::ComCom, 5).unwrap();
        assert_eq!((t.len(), u.len()), (500, 500));
        assert!(t.graphs().iter().chain(u.graphs()).all(|g| g.node_count() == 10));
        let (t, u) = build_flip_dataset(FlipKind::CycleCycle, 5).unwrap();
        assert_eq!((t.len(), u.len()), (10, 1));
        assert_eq!(build_flip_dataset(FlipKind::ComCycle, 8).unwrap(), build_flip_dataset(FlipKind::ComCycle, 8).unwrap());
        let (t, u) = build_flip_dataset(FlipKind::CycleCom, 5).unwrap();
        assert_eq!((t.len(), u.len()), (10, 500));
    }

    #[test]
    fn flip_kind_parses() {
        assert_eq!("com-com".parse::<FlipKind>().unwrap(), FlipKind::ComCom);
        assert_eq!("CycleCom".parse::<FlipKind>().unwrap(), FlipKind::CycleCom);
        assert!("ring".parse::<FlipKind>().is_err());
    }
}
