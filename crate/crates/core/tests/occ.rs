use muse_core::occ::*;
use rand::Rng;
use tensorlab::rng::seeded;

fn cloud(n: usize, center: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| (0..4).map(|l| center + (l as f64) * 0.3 + rng.gen_range(-0.1..0.1)).collect())
        .collect()
}

#[test]
fn constant_training_data() {
    let reps = vec![vec![0.5, -1.0, 2.0]; 6];
    let m = OccModel::fit(&reps, &OccConfig::new(8, 1e-2, 1)).unwrap();
    assert_eq!(m.dim_weights(), &[WEIGHT_FLOOR; 3]);
    let s = m.score_batch(&reps).unwrap();
    assert!(s.windows(2).all(|w| w[0] == w[1]));
    let r = m.residuals(&reps[..1]).unwrap();
    let norm: f64 = r[0].iter().map(|v| (v / WEIGHT_FLOOR).powi(2)).sum::<f64>().sqrt();
    assert!((s[0] - (-norm).exp()).abs() < 1e-15);
}

#[test]
fn fit_is_deterministic() {
    let reps = cloud(20, 0.0, 2);
    let cfg = OccConfig { epochs: 50, ..OccConfig::new(16, 1e-2, 3) };
    let a = OccModel::fit(&reps, &cfg).unwrap();
    let b = OccModel::fit(&reps, &cfg).unwrap();
    assert_eq!(a.dim_weights(), b.dim_weights());
    for id in a.store().ids() {
        assert_eq!(a.store().value(id), b.store().value(id));
    }
    assert_eq!(a.score_batch(&reps).unwrap(), b.score_batch(&reps).unwrap());
}

#[test]
fn scores_in_unit_interval_and_separate_outliers() {
    let train = cloud(40, 0.0, 4);
    let m = OccModel::fit(&train, &OccConfig::new(32, 1e-2, 5)).unwrap();
    let normal = m.score_batch(&cloud(10, 0.0, 6)).unwrap();
    let far = m.score_batch(&cloud(10, 3.0, 7)).unwrap();
    for s in normal.iter().chain(&far) {
        assert!(*s > 0.0 && *s <= 1.0);
    }
    let worst_normal = normal.iter().cloned().fold(f64::INFINITY, f64::min);
    let best_far = far.iter().cloned().fold(0.0, f64::max);
    assert!(best_far < worst_normal);
}

#[test]
fn preconditions() {
    assert!(OccModel::fit(&[vec![1.0]], &OccConfig::new(4, 1e-2, 0)).is_err());
    assert!(OccModel::fit(&[vec![1.0], vec![1.0, 2.0]], &OccConfig::new(4, 1e-2, 0)).is_err());
    let m = OccModel::fit(&cloud(4, 0.0, 1), &OccConfig { epochs: 2, ..OccConfig::new(4, 1e-2, 0) }).unwrap();
    assert!(m.score(&[1.0, 2.0]).is_err());
}

#[test]
fn score_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("scores.csv");
    write_scores(&p, &[(3, 0.5, false), (7, 0.25, true)]).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "graph_id,score,label\n3,0.5,0\n7,0.25,1\n");
}
