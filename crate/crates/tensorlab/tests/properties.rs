use proptest::prelude::*;
use tensorlab::checkpoint::{load, read_params, save, write_params};
use tensorlab::{ParamStore, SparseMatrix, Tensor};

fn tensor(max: usize) -> impl Strategy<Value = Tensor> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0f64..10.0, r * c).prop_map(move |d| Tensor::from_vec(r, c, d).unwrap())
    })
}

proptest! {
    #[test]
    fn transpose_is_an_involution(t in tensor(6)) {
        prop_assert_eq!(t.transpose().transpose(), t);
    }

    #[test]
    fn product_transpose_rule(a in tensor(5), seed in 0u64..1000) {
        let b = Tensor::from_fn(a.cols(), 3, |i, j| ((i * 7 + j * 3) as f64 + seed as f64).sin());
        let lhs = a.matmul(&b).unwrap().transpose();
        let rhs = b.transpose().matmul(&a.transpose()).unwrap();
        for (x, y) in lhs.data().iter().zip(rhs.data()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sparse_matches_dense(t in tensor(6), zero_mask in prop::collection::vec(any::<bool>(), 36)) {
        let mut d = t.clone();
        for (k, v) in d.data_mut().iter_mut().enumerate() {
            if zero_mask[k % zero_mask.len()] { *v = 0.0; }
        }
        let s = SparseMatrix::from_dense(&d);
        let x = Tensor::from_fn(d.cols(), 2, |i, j| i as f64 - j as f64);
        let (sp, de) = (s.matmul_dense(&x).unwrap(), d.matmul(&x).unwrap());
        for (a, b) in sp.data().iter().zip(de.data()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn checkpoint_round_trips(ts in prop::collection::vec(tensor(4), 1..5), names in prop::collection::vec("[a-z_.0-9]{1,12}", 5)) {
        let mut store = ParamStore::new();
        for (k, t) in ts.iter().enumerate() {
            store.add(format!("{k}:{}", names[k]), t.clone()).unwrap();
        }
        let mut buf = Vec::new();
        write_params(&store, &mut buf).unwrap();
        let back = read_params(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), store.len());
        for id in store.ids() {
            let other = back.id(store.name(id)).unwrap();
            prop_assert_eq!(back.value(other), store.value(id));
        }
    }
}

#[test]
fn checkpoint_file_round_trip_and_load_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.bin");
    let mut store = ParamStore::new();
    store.add("enc.w", Tensor::from_fn(2, 3, |i, j| (i * 3 + j) as f64 * 0.1)).unwrap();
    store.add("enc.b", Tensor::zeros(1, 3)).unwrap();
    save(&store, &path).unwrap();
    let loaded = load(&path).unwrap();
    let mut fresh = ParamStore::new();
    fresh.add("enc.w", Tensor::zeros(2, 3)).unwrap();
    fresh.add("enc.b", Tensor::ones(1, 3)).unwrap();
    assert_eq!(fresh.load_values(&loaded).unwrap(), 2);
    assert_eq!(fresh.value(fresh.id("enc.w").unwrap()), store.value(store.id("enc.w").unwrap()));
    assert_eq!(fresh.value(fresh.id("enc.b").unwrap()), &Tensor::zeros(1, 3));
}
