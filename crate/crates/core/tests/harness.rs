use muse_core::harness::config::Variant;
use muse_core::harness::glad::synthetic_glad_dataset;
use muse_core::harness::*;
use muse_core::synth::FlipKind;
use rand::Rng;
use tensorlab::rng::seeded;

fn brute_auroc(s: &[f64], y: &[bool]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0.0;
    for i in (0..s.len()).filter(|&i| y[i]) {
        for j in (0..s.len()).filter(|&j| !y[j]) {
            // anomaly score is -s
            total += if -s[i] > -s[j] {
                1.0
            } else if s[i] == s[j] {
                0.5
            } else {
                0.0
            };
            pairs += 1.0;
        }
    }
    total / pairs
}

/// 1-based rank by descending anomaly score, ties in input order.
fn rank(s: &[f64], i: usize) -> usize {
    1 + (0..s.len()).filter(|&j| s[j] < s[i] || (s[j] == s[i] && j < i)).count()
}

fn brute_ap(s: &[f64], y: &[bool]) -> f64 {
    let anomalies: Vec<usize> = (0..s.len()).filter(|&i| y[i]).collect();
    let mut total = 0.0;
    for &i in &anomalies {
        let r = rank(s, i);
        let hits = anomalies.iter().filter(|&&j| rank(s, j) <= r).count();
        total += hits as f64 / r as f64;
    }
    total / anomalies.len() as f64
}

fn brute_pak(s: &[f64], y: &[bool], k: usize) -> f64 {
    (0..s.len()).filter(|&i| y[i] && rank(s, i) <= k).count() as f64 / k as f64
}

fn instance(seed: u64) -> (Vec<f64>, Vec<bool>) {
    let mut rng = seeded(seed);
    let n = rng.gen_range(12..=40);
    let coarse = rng.gen_bool(0.5);
    loop {
        let s: Vec<f64> = (0..n)
            .map(|_| if coarse { f64::from(rng.gen_range(0..5)) / 4.0 } else { rng.gen::<f64>() })
            .collect();
        let y: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        if y.iter().any(|&a| a) && y.iter().any(|&a| !a) {
            return (s, y);
        }
    }
}

#[test]
fn metrics_match_brute_force() {
    for seed in 0..100 {
        let (s, y) = instance(seed);
        let k = 10.min(s.len());
        assert!((auroc(&s, &y).unwrap() - brute_auroc(&s, &y)).abs() < 1e-12, "seed {seed}");
        assert!((average_precision(&s, &y).unwrap() - brute_ap(&s, &y)).abs() < 1e-12, "seed {seed}");
        assert!((precision_at_k(&s, &y, k).unwrap() - brute_pak(&s, &y, k)).abs() < 1e-12, "seed {seed}");
    }
}

#[test]
fn auroc_reverses_under_negation() {
    for seed in 100..150 {
        let (s, y) = instance(seed);
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let (a, b) = (auroc(&s, &y).unwrap(), auroc(&neg, &y).unwrap());
        assert!((a - (1.0 - b)).abs() < 1e-12);
        for m in [a, b, average_precision(&s, &y).unwrap()] {
            assert!((0.0..=1.0).contains(&m));
        }
    }
}

#[test]
fn precision_examples() {
    let s = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05];
    let y = [false, false, false, false, false, true, true, true, true, true];
    assert_eq!(precision_at_k(&s, &y, 5).unwrap(), 1.0);
    assert_eq!(average_precision(&s, &y).unwrap(), 1.0);
}

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.experiment.strict_grid = false;
    cfg.experiment.trials = 2;
    cfg.experiment.normal_classes = Some(vec![0]);
    cfg.encoder.hidden_dim = 8;
    cfg.encoder.layers = 2;
    cfg.train.epochs = 3;
    cfg.occ.hidden = 8;
    cfg.occ.epochs = 20;
    cfg
}

#[test]
fn glad_is_deterministic_and_metrics_in_range() {
    let cfg = small_config();
    let ds = synthetic_glad_dataset(cfg.experiment.seed).unwrap();
    assert_eq!(ds.len(), 600);
    let a = run_glad_experiment(&cfg, &ds).unwrap();
    let b = run_glad_experiment(&cfg, &ds).unwrap();
    assert_eq!(a.trials.len(), 2);
    for (x, y) in a.trials.iter().zip(&b.trials) {
        assert!(x.same_outcome(y));
        for m in [x.auroc, x.ap, x.precision_at_k, x.val_auroc] {
            assert!((0.0..=1.0).contains(&m));
        }
        assert_eq!(x.contaminated, 0);
        assert_eq!(x.k, 10);
    }
    let mean = (a.trials[0].auroc + a.trials[1].auroc) / 2.0;
    assert!((a.summary.auroc.mean - mean).abs() < 1e-15);
    assert_eq!(a.summary.auroc.std_per_class, a.summary.auroc.std_pooled);
}

#[test]
fn contamination_injects_anomalies() {
    let mut cfg = small_config();
    cfg.experiment.trials = 1;
    let ds = synthetic_glad_dataset(0).unwrap();
    let clean = run_glad_experiment(&cfg, &ds).unwrap();
    cfg.experiment.contamination = 0.1;
    let dirty = run_glad_experiment(&cfg, &ds).unwrap();
    // 400 training normals -> 40 injected anomalies
    assert_eq!(dirty.trials[0].contaminated, 40);
    assert_eq!(clean.trials[0].contaminated, 0);
    cfg.experiment.contamination = 0.3;
    // needs 120 of the 90 unused anomalies
    assert!(run_glad_experiment(&cfg, &ds).is_err());
}

#[test]
fn every_method_runs_and_classes_aggregate() {
    let ds = synthetic_glad_dataset(1).unwrap();
    for m in ["v1", "v2", "v3", "v4", "noaug", "nocos", "gae2", "featae2"] {
        let mut cfg = small_config();
        cfg.experiment.trials = 1;
        cfg.experiment.method = m.parse().unwrap();
        let r = run_glad_experiment(&cfg, &ds).unwrap();
        assert_eq!(r.trials[0].config_id, format!("syn-com/{m}/class0"));
    }
    // Both classes as normal in turn: 90 normal graphs suffice for class 1.
    let mut cfg = small_config();
    cfg.experiment.normal_classes = None;
    let r = run_glad_experiment(&cfg, &ds).unwrap();
    assert_eq!(r.classes.len(), 2);
    assert_eq!(r.trials.len(), 4);
    let per_class_mean = (r.classes[0].auroc.mean + r.classes[1].auroc.mean) / 2.0;
    assert!((r.summary.auroc.mean - per_class_mean).abs() < 1e-15);
    let per_class_std = (r.classes[0].auroc.std + r.classes[1].auroc.std) / 2.0;
    assert!((r.summary.auroc.std_per_class - per_class_std).abs() < 1e-15);

    cfg.experiment.normal_classes = Some(vec![7]);
    assert!(run_glad_experiment(&cfg, &ds).is_err());
    assert_eq!(Method::MuseVariant(Variant::NoCos).to_string(), "nocos");
}

#[test]
fn tuning_selects_from_the_grid() {
    let mut cfg = small_config();
    cfg.experiment.trials = 1;
    cfg.experiment.tune = true;
    cfg.tune.lr = vec![1e-3];
    cfg.tune.hidden_dim = vec![8];
    cfg.tune.layers = vec![2];
    cfg.tune.epochs = vec![1, 3];
    cfg.tune.omega_exponent = vec![0.0, 1.0];
    cfg.tune.occ_hidden = vec![4, 8];
    cfg.tune.occ_lr = vec![1e-2];
    let ds = synthetic_glad_dataset(2).unwrap();
    let r = run_glad_experiment(&cfg, &ds).unwrap();
    let h = &r.trials[0].hyper;
    assert!([1, 3].contains(&h.epochs));
    assert!([0.0, 1.0].contains(&h.omega_exponent));
    assert!([4, 8].contains(&h.occ_hidden));

    cfg.experiment.strict_grid = true;
    assert!(cfg.validate().is_err());
}

#[test]
fn report_files() {
    let cfg = ExperimentConfig {
        experiment: muse_core::harness::config::ExperimentSection {
            trials: 1,
            ..small_config().experiment
        },
        ..small_config()
    };
    let ds = synthetic_glad_dataset(0).unwrap();
    let r = run_glad_experiment(&cfg, &ds).unwrap();
    let dir = tempfile::tempdir().unwrap();
    r.write_json(dir.path().join("r.json")).unwrap();
    r.write_csv(dir.path().join("r.csv")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["experiment"]["method"], "muse");
    assert!(json["summary"]["auroc"]["std_pooled"].is_number());
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.starts_with("config_id,normal_class,trial,seed,val_auroc,auroc,ap,precision_at_k,k,runtime_secs\n"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn flip_curve_contract() {
    let mut cfg = FlipConfig::new(FlipKind::CycleCycle, FlipModel::GaeBce, 3);
    cfg.epochs = 30;
    let curve = run_flip_experiment(&cfg).unwrap();
    assert_eq!(curve.rows.len(), 30 / 10 + 1);
    assert_eq!(curve.rows.iter().map(|r| r.epoch).collect::<Vec<_>>(), vec![0, 10, 20, 30]);
    assert_eq!(run_flip_experiment(&cfg).unwrap(), curve);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("curve.csv");
    curve.write_csv(&p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("epoch,mean_train_loss,mean_unseen_loss\n0,"));
    assert_eq!(text.lines().count(), 5);

    cfg.record_every = 7;
    assert!(run_flip_experiment(&cfg).is_err());
    for m in FlipModel::ALL {
        assert_eq!(m.to_string().parse::<FlipModel>().unwrap(), m);
    }
}

#[test]
fn feature_autoencoder_flip_curves_run() {
    for model in [FlipModel::FeatAeCos, FlipModel::FeatAeFrob] {
        let mut cfg = FlipConfig::new(FlipKind::CycleCom, model, 0);
        cfg.epochs = 20;
        let curve = run_flip_experiment(&cfg).unwrap();
        assert_eq!(curve.rows.len(), 3);
        assert!(curve.rows.iter().all(|r| r.mean_train_loss.is_finite() && r.mean_unseen_loss >= 0.0));
    }
}
