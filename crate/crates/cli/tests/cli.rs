use std::path::Path;
use std::process::{Command, Output};

fn ordcollab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ordcollab"));
    c.env_remove("ORDCOLLAB_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    ordcollab().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path, seed: &str) {
    let o = run(&["synth", "--seed", seed, "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}

const SMALL: [&str; 6] = ["--hidden", "8,8,8", "--epochs", "2", "--pin", "g01"];

#[test]
fn synth_writes_corpus_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "1");
    for f in ["segments.csv", "adjudication.csv", "truth.csv", "synth_config.json"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let again = tempfile::tempdir().unwrap();
    synth(again.path(), "1");
    let read = |d: &Path| std::fs::read(d.join("segments.csv")).unwrap();
    assert_eq!(read(dir.path()), read(again.path()));
}

#[test]
fn eval_writes_report_files() {
    let corpus = tempfile::tempdir().unwrap();
    synth(corpus.path(), "2");
    let out = tempfile::tempdir().unwrap();
    let mut args = vec![
        "eval",
        "--corpus",
        corpus.path().to_str().unwrap(),
        "--mixup",
        "full",
        "--loss",
        "oce",
    ];
    args.extend(SMALL);
    args.extend(["--out", out.path().to_str().unwrap()]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["report.json", "metrics.csv", "confusion.txt"] {
        assert!(out.path().join(f).is_file(), "missing {f}");
    }
    let csv = std::fs::read_to_string(out.path().join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 14);

    let o = run(&["report", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("f1"));
}

#[test]
fn out_of_range_tau_is_rejected() {
    let corpus = tempfile::tempdir().unwrap();
    synth(corpus.path(), "3");
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "eval",
        "--corpus",
        corpus.path().to_str().unwrap(),
        "--mixup",
        "full",
        "--tau",
        "1.2",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("tau") && msg.contains("[0, 1)"), "{msg}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["eval", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "--out", "/tmp/x"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let o = run(&["eval", "--corpus", "/nonexistent/corpus", "--out", "/tmp/x"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn sweep_writes_one_report_per_cell() {
    let corpus = tempfile::tempdir().unwrap();
    synth(corpus.path(), "4");
    let out = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--corpus", corpus.path().to_str().unwrap(), "--jobs", "2"];
    args.extend(SMALL);
    args.extend(["--out", out.path().to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let reports = std::fs::read_dir(out.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join("report.json").is_file())
        .count();
    assert_eq!(reports, 9);
    let summary = std::fs::read_to_string(out.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 9);
}

#[test]
fn featurize_and_train() {
    let corpus = tempfile::tempdir().unwrap();
    synth(corpus.path(), "5");
    let out = tempfile::tempdir().unwrap();
    let csv = out.path().join("features.csv");
    let o = run(&[
        "featurize",
        "--corpus",
        corpus.path().to_str().unwrap(),
        "--features",
        "b2-plus-c",
        "--mapping",
        "c-to-a",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 117);

    let mut args = vec!["train", "--corpus", corpus.path().to_str().unwrap(), "--fold", "g02"];
    args.extend(SMALL);
    args.extend(["--out", out.path().to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.path().join("model_g02.json").is_file());

    let mut args = vec!["train", "--corpus", corpus.path().to_str().unwrap(), "--fold", "g01"];
    args.extend(SMALL);
    args.extend(["--out", out.path().to_str().unwrap()]);
    assert_eq!(run(&args).status.code(), Some(1));
}

#[test]
fn seed_env_var_is_used() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let o = ordcollab()
        .env("ORDCOLLAB_SEED", "7")
        .args(["synth", "--out", a.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    synth(b.path(), "7");
    synth(c.path(), "8");
    let read = |d: &Path| std::fs::read(d.join("segments.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_ne!(read(a.path()), read(c.path()));
    let cfg = std::fs::read_to_string(a.path().join("synth_config.json")).unwrap();
    assert!(cfg.contains("\"seed\": 7"));
}
