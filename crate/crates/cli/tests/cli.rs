use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_travflow"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> PathBuf {
    root().join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// The annulus config with a smaller scatter budget, an absolute norms
/// path and output under `dir`.
fn small_annulus(dir: &Path, entries: usize) -> PathBuf {
    let text = std::fs::read_to_string(config("annulus.cfg")).unwrap();
    let norms = root().join("crates/core/data/norms.json");
    let text = text
        .replace("entries = 100000", &format!("entries = {entries}"))
        .replace("\"../crates/core/data/norms.json\"", &format!("{:?}", norms.display().to_string()))
        .replace("\"../out/annulus\"", "\"out\"");
    let path = dir.join("annulus.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn omega_enum_lists_six_patterns() {
    let o = run(&["omega-enum", "--max-reduced-norm", "2"]);
    assert!(o.status.success());
    let mut lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    lines.sort();
    let mut want = vec!["(1,1)", "(2)", "(1,2,1)", "(1,2,2,1)", "(1,3)", "(3,1)"];
    want.sort();
    assert_eq!(lines, want);
}

#[test]
fn flow_trace_tangent_chord() {
    let cfg = config("annulus.cfg");
    let o = run(&[
        "flow-trace",
        "--config",
        cfg.to_str().unwrap(),
        "--entry",
        "(-1.7320508,1) dir (1,0)",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("pattern 121\n"));
}

#[test]
fn verify_bounds_amenable_case() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_annulus(dir.path(), 10);
    let norms = root().join("crates/core/data/norms.json");
    let o = run(&[
        "verify-bounds",
        "--config",
        cfg.to_str().unwrap(),
        "--j",
        "1",
        "--norms",
        norms.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rhs_manifold"]["rank"]["exact"], 0);
    assert_eq!(v["rhs_double"]["rank"]["exact"], 0);
    assert_eq!(v["satisfied"], true);
    assert!(dir.path().join("out/bounds-j1.json").exists());
}

#[test]
fn report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_annulus(dir.path(), 2000);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&["report", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let files = |d: &Path| -> Vec<(PathBuf, Vec<u8>)> {
        let mut v = Vec::new();
        let mut stack = vec![d.to_path_buf()];
        while let Some(p) = stack.pop() {
            for e in std::fs::read_dir(&p).unwrap() {
                let e = e.unwrap().path();
                if e.is_dir() {
                    stack.push(e);
                } else {
                    v.push((e.strip_prefix(d).unwrap().to_path_buf(), std::fs::read(&e).unwrap()));
                }
            }
        }
        v.sort();
        v
    };
    let (fa, fb) = (files(&a), files(&b));
    assert!(fa.iter().any(|(p, _)| p == Path::new("report.json")));
    assert!(fa.iter().any(|(p, _)| p == Path::new("counts.csv")));
    assert_eq!(fa, fb);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["header"]["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(report["header"]["seed"], 20240917);
}

#[test]
fn config_errors_exit_with_two() {
    let o = run(&["stratify", "--config", "/nonexistent/x.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_annulus(dir.path(), 10);
    let text = std::fs::read_to_string(&cfg).unwrap() + "\n[extra]\nx = 1\n";
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["stratify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degenerate_boundary_contact_exits_with_three() {
    // a rotation field is tangent to both boundary circles everywhere
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("rotation.cfg");
    std::fs::write(
        &cfg,
        r#"
name = "rotation"
[domain]
vars = ["x", "y"]
z = "(x^2 + y^2 - 4) * (x^2 + y^2 - 1)"
bbox = [[-2.5, 2.5], [-2.5, 2.5]]
[field]
kind = "explicit"
components = ["-y", "x"]
[tolerances]
t_max = 50.0
[scatter]
entries = 50
"#,
    )
    .unwrap();
    let o = run(&["scatter", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn stratification_defect_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let src = root().join("crates/core/data/models/torus-trivial.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(src).unwrap()).unwrap();
    let cell = v["cells"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|c| c["dim"] == 2)
        .unwrap();
    cell["stratum"] = "2".into();
    cell["depth"] = 1.into();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&[
        "mho-build",
        "--file",
        path.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn mho_build_shipped_model() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["mho-build", "--model", "e2-circle", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("e2-circle double: ranks [4, 4, 0], basis rule [4, 4, 0]"));
    assert!(dir.path().join("mho/e2-circle-interior.json").exists());
    let o = run(&["mho-build", "--model", "no-such-model"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn model_classify_divisors() {
    let o = run(&["model-classify", "--pattern", "2", "--deform", "1:0=0.01"]);
    assert_eq!(stdout(&o).trim(), "empty divisor");
    let o = run(&["model-classify", "--pattern", "121", "--reachable"]);
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), ["(1,1)", "(1,2,1)"]);
}
