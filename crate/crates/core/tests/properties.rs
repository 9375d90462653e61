use std::collections::BTreeSet;

use muse_core::graph::{contaminate_train, make_split, parse_tu_dataset, write_tu_dataset, SplitSpec};
use muse_core::{Graph, GraphDataset};
use proptest::prelude::*;
use tensorlab::Tensor;

fn graph(n: usize, edge_bits: Vec<bool>, feats: Vec<f64>, d: usize, one_hot: bool, label: usize) -> Graph {
    let mut edges = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if edge_bits[k % edge_bits.len()] {
                edges.push((i, j));
            }
            k += 1;
        }
    }
    let x = if one_hot {
        Tensor::from_fn(n, d, |i, j| f64::from(u8::from((i + label) % d == j)))
    } else {
        Tensor::from_fn(n, d, |i, j| feats[(i * d + j) % feats.len()])
    };
    Graph::from_edges(n, &edges, x, Some(label)).unwrap()
}

fn dataset() -> impl Strategy<Value = GraphDataset> {
    (1usize..4, any::<bool>()).prop_flat_map(|(d, one_hot)| {
        prop::collection::vec(
            (
                1usize..7,
                prop::collection::vec(any::<bool>(), 1..21),
                prop::collection::vec(-5.0f64..5.0, 1..30),
                0usize..3,
            ),
            1..6,
        )
        .prop_map(move |specs| {
            let graphs = specs
                .into_iter()
                .map(|(n, e, f, l)| graph(n, e, f, d, one_hot, l))
                .collect();
            GraphDataset::with_class_values("T", graphs, vec![-1, 4, 9]).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tu_format_round_trips(ds in dataset()) {
        let dir = tempfile::tempdir().unwrap();
        write_tu_dataset(&ds, dir.path(), "T").unwrap();
        let back = parse_tu_dataset(dir.path(), "T").unwrap();
        prop_assert_eq!(back.len(), ds.len());
        for (a, b) in ds.graphs().iter().zip(back.graphs()) {
            prop_assert_eq!(a.adjacency(), b.adjacency());
            let value = |d: &GraphDataset, g: &Graph| d.class_values()[g.label().unwrap()];
            prop_assert_eq!(value(&ds, a), value(&back, b));
            prop_assert_eq!(a.features(), b.features());
        }
    }

    #[test]
    fn splits_partition_the_dataset(
        n_normal in 10usize..60,
        n_anomaly in 2usize..40,
        seed in 0u64..1000,
        rate in 0.0f64..0.2,
    ) {
        let graphs: Vec<Graph> = (0..n_normal + n_anomaly)
            .map(|i| Graph::from_edges(2, &[(0, 1)], Tensor::ones(2, 1), Some(usize::from(i >= n_normal))).unwrap())
            .collect();
        let ds = GraphDataset::new("S", graphs).unwrap();
        let split = make_split(&ds, &SplitSpec::new(0, seed)).unwrap();
        let all: Vec<usize> = split.all_lists().iter().flat_map(|l| l.iter().copied()).collect();
        prop_assert_eq!(all.iter().copied().collect::<BTreeSet<_>>().len(), all.len());
        prop_assert_eq!(all.len(), ds.len());
        prop_assert!(split.train.iter().chain(&split.val_normal).chain(&split.test_normal).all(|&i| i < n_normal));
        prop_assert!(!split.val_anomaly.is_empty() && !split.test_anomaly.is_empty());
        prop_assert_eq!(split.train.len() + split.val_normal.len() + split.test_normal.len(), n_normal);

        match contaminate_train(&split, rate, seed) {
            Ok(c) => {
                let added: Vec<usize> = c.train[split.train.len()..].to_vec();
                prop_assert_eq!(added.len(), (rate * split.train.len() as f64 + 1e-9).floor() as usize);
                prop_assert!(added.iter().all(|i| split.unused_anomalies.contains(i)));
                let all: Vec<usize> = c.all_lists().iter().flat_map(|l| l.iter().copied()).collect();
                prop_assert_eq!(all.iter().copied().collect::<BTreeSet<_>>().len(), ds.len());
            }
            Err(_) => prop_assert!((rate * split.train.len() as f64 + 1e-9).floor() as usize > split.unused_anomalies.len()),
        }
    }
}
