use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SUITES: [&str; 11] = [
    "bellman-two-point",
    "bellman-multi",
    "bellman-T",
    "bellman-drop",
    "embed-25",
    "embed-26",
    "shift-norm",
    "para-norm",
    "complexity-growth",
    "lemma-1-1",
    "telescope",
];

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bumpcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn embed_run_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"trials": 100, "seed": 42, "alpha": 2, "tolerance": 1e-9, "lattice": {"depth": 8}}"#,
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let o = run(&["verify", "embed-25", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for file in ["rows.csv", "summary.json", "summary.md", "histogram.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let rows = fs::read_to_string(a.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 101);
}

#[test]
fn zero_trials_pass_with_empty_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"trials": 0, "seed": 1, "alpha": 2, "tolerance": 1e-9}"#);
    for suite in ["bellman-two-point", "shift-norm", "telescope"] {
        let out = tmp.path().join(suite);
        let o = run(&["verify", suite, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let rows = fs::read_to_string(out.join("rows.csv")).unwrap();
        assert_eq!(rows, "trial,ok,slack,lhs,rhs,ratio,witness\n");
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["pass"], true);
        assert_eq!(summary["trials"], 0);
    }
}

#[test]
fn regression_config_matches_goldens() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = repo().join("configs/regression.json");
    for suite in SUITES {
        let out = tmp.path().join(suite);
        let o = run(&["verify", suite, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{suite}: {}", stderr(&o));
        let got = fs::read_to_string(out.join("summary.json")).unwrap();
        let want = fs::read_to_string(repo().join(format!("configs/golden/{suite}.json"))).unwrap();
        assert_eq!(got, want, "{suite} drifted from its golden summary");
    }
}

#[test]
fn single_trial_replays_its_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = repo().join("configs/regression.json");
    let cfg = cfg.to_str().unwrap();
    let all = tmp.path().join("all");
    let one = tmp.path().join("one");
    assert!(run(&["verify", "bellman-multi", "--config", cfg, "--out", all.to_str().unwrap()]).status.success());
    assert!(run(&["verify", "bellman-multi", "--config", cfg, "--trial", "5", "--out", one.to_str().unwrap()])
        .status
        .success());
    let full = fs::read_to_string(all.join("rows.csv")).unwrap();
    let single = fs::read_to_string(one.join("rows.csv")).unwrap();
    let row5 = full.lines().find(|l| l.starts_with("5,")).unwrap();
    assert_eq!(single.lines().nth(1).unwrap(), row5);
}

#[test]
fn seed_and_trials_flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = repo().join("configs/regression.json");
    let out = tmp.path().join("o");
    let o = run(&[
        "verify",
        "bellman-T",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "99",
        "--trials",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 99);
    assert_eq!(summary["trials"], 3);
    let golden: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(repo().join("configs/golden/bellman-T.json")).unwrap()).unwrap();
    assert_ne!(summary["config_hash"], golden["config_hash"]);
}

#[test]
fn violated_closing_step_exits_one() {
    // A tiny embedding constant breaks the closing Cauchy-Schwarz step.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"trials": 4, "seed": 2, "lattice": {"depth": 4}, "embedding_constant": 1e-6}"#,
    );
    let out = tmp.path().join("o");
    let o = run(&["verify", "telescope", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let md = fs::read_to_string(out.join("summary.md")).unwrap();
    assert!(md.contains("FAIL") && md.contains("Failing trials"));
    assert!(md.contains("root="), "failing rows name a cell");
    let r = run(&["report", "--in", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&r.stdout), md);
}

#[test]
fn telescope_writes_ledger() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"trials": 3, "seed": 5, "lattice": {"depth": 4}, "ledger_trials": 2}"#);
    let out = tmp.path().join("o");
    assert!(run(&["verify", "telescope", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let ledger = fs::read_to_string(out.join("ledger.csv")).unwrap();
    let mut lines = ledger.lines();
    assert_eq!(lines.next(), Some("trial,kind,root,generation,partial_lhs,rhs,slack"));
    // 31 cells, each with depth(lattice) − depth(cell) generations, two ledgers, two trials.
    let per_ledger: usize = (0..=4usize).map(|d| (1 << d) * (4 - d)).sum();
    assert_eq!(lines.count(), 2 * 2 * per_ledger);
}

#[test]
fn usage_errors_exit_two_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("{\n  \"trials\": 3,\n  \"sede\": 4\n}", "sede"),
        (r#"{"trials": 3, "tolerance": 0}"#, "tolerance"),
        (r#"{"lattice": {"depth": 21}}"#, "leaf-count guard"),
        (r#"{"lattice": {"depth": 7, "branching": 8}}"#, "leaf-count guard"),
        (r#"{"lattice": {"masses": [0.2, 0.2]}}"#, "lattice.masses"),
        (r#"{"alpha": 0.5}"#, "gauge"),
        (r#"{"weights": {"w": {"kind": "power", "params": {"a": -2}}}}"#, "weights.w"),
        (r#"{"trials": "many"}"#, "line 1"),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let cfg = write_config(tmp.path(), &format!("c{i}.json"), body);
        let o = run(&["verify", "embed-25", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {i}");
        assert!(stderr(&o).contains(needle), "case {i}: {}", stderr(&o));
    }
    let cfg = write_config(tmp.path(), "op.json", r#"{"operator": {"kind": "paraproduct"}}"#);
    let o = run(&["verify", "shift-norm", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("operator"));
    assert_eq!(run(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(run(&["report", "--in", tmp.path().join("missing").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn bump_table_grows_along_the_extremal_family() {
    let cfg = repo().join("configs/a2-extremal.json");
    let o = run(&["bump", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("A₂") && text.contains("Orlicz") && text.contains("n_Ψ"));
    let sweep: Vec<Vec<f64>> = text
        .lines()
        .skip_while(|l| !l.starts_with("| a |"))
        .skip(2)
        .map(|l| l.split('|').filter_map(|c| c.trim().parse().ok()).collect())
        .collect();
    assert_eq!(sweep.len(), 7);
    for pair in sweep.windows(2) {
        for col in 1..4 {
            assert!(pair[1][col] > pair[0][col], "column {col} not increasing: {pair:?}");
        }
    }
}

#[test]
fn explicit_operators_are_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let shift = write_config(
        tmp.path(),
        "s.json",
        r#"{"trials": 2, "lattice": {"depth": 2},
            "operator": {"kind": "explicit-shift", "spec": {"complexity": 1,
              "kernels": {"": [1.0, -1.0, -1.0, 1.0], "0": [0.0, 2.0, 2.0, 0.0]}}}}"#,
    );
    let o = run(&["verify", "shift-norm", "--config", &shift, "--out", tmp.path().join("s").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let para = write_config(
        tmp.path(),
        "p.json",
        r#"{"trials": 2, "lattice": {"depth": 2},
            "operator": {"kind": "explicit-paraproduct", "spec": {"delta_b": {"": [0.5, -0.5]}}}}"#,
    );
    let o = run(&["verify", "para-norm", "--config", &para, "--out", tmp.path().join("p").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bad = write_config(
        tmp.path(),
        "b.json",
        r#"{"trials": 2, "lattice": {"depth": 2},
            "operator": {"kind": "explicit-shift", "spec": {"complexity": 1, "kernels": {"": [9.0, 0.0, 0.0, 0.0]}}}}"#,
    );
    let o = run(&["verify", "shift-norm", "--config", &bad, "--out", tmp.path().join("b").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
