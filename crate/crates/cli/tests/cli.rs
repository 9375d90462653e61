use std::fs;
use std::process::{Command, Output};

fn muse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_muse")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const TINY: &str = r#"
[experiment]
dataset = "syn-com"
trials = 1
normal_classes = [0]
strict_grid = false

[encoder]
hidden_dim = 8
layers = 2

[train]
epochs = 2

[occ]
hidden = 8
epochs = 10
"#;

#[test]
fn synth_writes_tu_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = muse(&["synth", "--kind", "cycle-cycle", "--seed", "1", "--out", d]);
    assert!(o.status.success(), "{o:?}");
    for f in ["cycle-cycle-train_A.txt", "cycle-cycle-unseen_graph_indicator.txt", "cycle-cycle-train_graph_labels.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let ds = muse_core::graph::parse_tu_dataset(dir.path(), "cycle-cycle-train").unwrap();
    assert_eq!(ds.len(), 10);
}

#[test]
fn theory_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("thm1.json");
    let o = muse(&["theory", "--check", "thm1", "--assert", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("theorem 1 grid: 0 violations of 180: PASS"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["thm1"]["passed"], true);
    assert!(json.get("thm2").is_none());

    // The theorem 2 grid fails with the exact polynomials.
    let o = muse(&["theory", "--check", "thm2", "--assert"]);
    assert_eq!(o.status.code(), Some(2));
    let o = muse(&["theory", "--check", "thm2"]);
    assert!(o.status.success());
    assert!(muse(&["theory", "--check", "nonsense"]).status.code() == Some(1));
}

#[test]
fn flip_assert() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let o = muse(&[
        "flip", "--kind", "cycle-cycle", "--model", "gae-frob", "--epochs", "200", "--assert", "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 22);
}

#[test]
fn train_then_export_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let model_dir = dir.path().join("model");
    let o = muse(&["train", "--config", cfg.to_str().unwrap(), "--out", model_dir.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(fs::read_to_string(model_dir.join("trace.csv")).unwrap().lines().count(), 3);

    let errs = dir.path().join("errors.csv");
    let o = muse(&[
        "export-errors", "--config", cfg.to_str().unwrap(), "--checkpoint",
        model_dir.join("model.ckpt").to_str().unwrap(), "--graph-id", "3", "--out", errs.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = fs::read_to_string(&errs).unwrap();
    assert!(text.starts_with("i,j,a,err\n"));
    assert_eq!(text.lines().count(), 101);

    let o = muse(&[
        "export-errors", "--config", cfg.to_str().unwrap(), "--checkpoint",
        model_dir.join("model.ckpt").to_str().unwrap(), "--graph-id", "9999", "--out", errs.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn glad_reports_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let out = dir.path().join("run");
    let o = muse(&[
        "glad", "--config", cfg.to_str().unwrap(), "--ablate", "v4", "--contamination", "0.1", "--out",
        out.to_str().unwrap(), "--assert", "--min-auroc", "0.0",
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("syn-com v4: mean auroc"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["trials"][0]["contaminated"], 40);
    assert_eq!(json["config"]["experiment"]["method"], "v4");
    assert!(out.join("trials.csv").exists());

    let o = muse(&["glad", "--config", cfg.to_str().unwrap(), "--assert", "--min-auroc", "1.01"]);
    assert_eq!(o.status.code(), Some(2));
    // Missing TU dataset names the file.
    let o = muse(&["glad", "--dataset", "NOPE", "--data-root", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NOPE_graph_indicator.txt"));
}
