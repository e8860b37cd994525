use std::path::Path;
use std::process::{Command, Output};

fn phidim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phidim")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn list_shows_all_kinds() {
    let out = phidim(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for kind in phidim::catalog::Kind::ALL {
        assert!(text.lines().any(|l| l == kind.name()), "{}", kind.name());
    }
    let out = phidim(&["list", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 9);
}

#[test]
fn example2_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"kind":"reproduce-example2","params":{"alpha":2,"checkpoints":5}}"#);
    let out_dir = dir.path().join("out");
    let out = phidim(&["run", &cfg, "--out-dir", out_dir.to_str().unwrap(), "--assert"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("# phidim 0.1.0 (core 0.1.0)\n# kind reproduce-example2\n# config-sha256 "));
    assert!(trace.contains("# seed 0\n"));
    let last = trace.lines().last().unwrap();
    let cells: Vec<&str> = last.split(',').collect();
    let (phi, psi): (f64, f64) = (cells[6].parse().unwrap(), cells[9].parse().unwrap());
    assert!((phi - 0.75).abs() <= 0.02 && (psi - 2.0 / 3.0).abs() <= 0.02, "{last}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["header"]["seed"], 0);
    assert!(out_dir.join("schedule.json").exists());
}

#[test]
fn identity_is_rejected_with_the_growth_axiom() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"kind":"dimfunc-check","params":{"phi":{"kind":"identity"}}}"#);
    let out = phidim(&["run", &cfg, "--out-dir", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "axiom");
    assert_eq!(err["axiom"], "growth axiom");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let o = o.to_str().unwrap();

    let missing = write(dir.path(), "m.json", r#"{"kind":"popcorn","params":{"t":1}}"#);
    let out = phidim(&["validate", &missing]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("q_max"));

    let foreign = write(dir.path(), "f.json", r#"{"kind":"reproduce-example2","params":{"t":1}}"#);
    assert_eq!(phidim(&["validate", &foreign]).status.code(), Some(2));

    let unknown = write(dir.path(), "u.json", r#"{"kind":"reproduce-example2","colour":1}"#);
    assert_eq!(phidim(&["run", &unknown, "--out-dir", o]).status.code(), Some(2));

    let ok = write(dir.path(), "ok.json", r#"{"kind":"reproduce-example2"}"#);
    let out = phidim(&["validate", &ok]);
    assert!(out.status.success());

    let out = phidim(&["run", &ok, "--out-dir", o, "--depth-budget", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "budget");

    let tight = write(dir.path(), "t.json", r#"{"kind":"reproduce-example2","tolerances":{"example":0}}"#);
    assert_eq!(phidim(&["run", &tight, "--out-dir", o]).status.code(), Some(0));
    let out = phidim(&["run", &tight, "--out-dir", o, "--assert"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["error"], "tolerance");

    assert_eq!(phidim(&["run", dir.path().join("none.json").to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"kind":"dimfunc-check","params":{"phi":{"kind":"spectrum","theta_prime":0.5},"random_scales":20},"seed":3}"#,
    );
    let read_all = |d: &Path| {
        let mut files: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.into_iter().map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(&p).unwrap())).collect::<Vec<_>>()
    };
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (d, threads) in [(&a, "1"), (&b, "4")] {
        assert!(phidim(&["run", &cfg, "--out-dir", d.to_str().unwrap(), "--threads", threads]).status.success());
    }
    assert_eq!(read_all(&a), read_all(&b));
    assert!(phidim(&["run", &cfg, "--out-dir", c.to_str().unwrap(), "--seed", "4"]).status.success());
    let axioms = |d: &Path| std::fs::read_to_string(d.join("axioms.csv")).unwrap();
    assert_ne!(axioms(&a), axioms(&c));
    assert!(axioms(&c).contains("# seed 4\n"));
}

#[test]
fn estimates_match_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"kind":"variational"}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(phidim(&["run", &cfg, "--out-dir", a.to_str().unwrap()]).status.success());
    assert!(phidim(&["run", &cfg, "--out-dir", b.to_str().unwrap(), "--threads", "3"]).status.success());
    for name in ["estimate-quasi.csv", "estimate-windowed.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}
