use std::path::Path;
use std::process::{Command, Output};

const POLES: &str = r#"
generators = ["aak", "interpolation:uniform", "interpolation:pade"]
precision = "f64"

[function]
kind = "rational_pole_sum"
polar_points = [[0.5, 0.0], [-0.2, 0.6], [0.1, -0.7]]
parameters = [[1.0, 0.0], [0.5, 0.5], [0.25, 0.0]]

[sweep]
n_min = 1
n_max = 8
"#;

const F64_TOO_DEEP: &str = r#"
generators = ["aak"]
precision = "f64"

[function]
kind = "two_branch_sqrt"
branch_points = [[0.9, 0.0], [-0.9, 0.0]]

[section]
max_raises = 0
min_size = 8
per_degree = 1

[sweep]
n_min = 1
n_max = 60
"#;

fn aaklab(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("exp.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_aaklab"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let ok = aaklab(dir.path(), POLES, &["validate"]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("ok: rational_pole_sum with 3 generators"));

    let typo = aaklab(dir.path(), &POLES.replace("n_max", "n_mux"), &["validate"]);
    assert_eq!(typo.status.code(), Some(2));
    assert!(stderr(&typo).contains("n_mux"));

    let empty = aaklab(dir.path(), &POLES.replace("n_max = 8", "n_max = 0"), &["run"]);
    assert_eq!(empty.status.code(), Some(2));
    assert!(stderr(&empty).contains("sweep: empty n range"));
    assert!(!dir.path().join("out").exists());

    let missing = Command::new(env!("CARGO_BIN_EXE_aaklab")).arg("run").output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn run_writes_outputs_and_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let first = aaklab(dir.path(), POLES, &["run", "--jobs", "2"]);
    assert!(first.status.success(), "{}", stderr(&first));
    for f in ["summary.json", "checks.csv", "rates.csv", "rates.schema.csv", "plot_rates.csv", "diagnostics/aak.csv", "poles/aak/n003.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "complete");
    assert_eq!(summary["capacity"], serde_json::Value::Null);
    let rates = std::fs::read_to_string(out.join("rates.csv")).unwrap();
    assert_eq!(rates.lines().count(), 1 + 3 * 8);
    let poles = std::fs::read_to_string(out.join("poles/aak/n003.csv")).unwrap();
    assert_eq!(poles.lines().count(), 1 + 3);
    assert!(!stderr(&first).contains("cache hit"));

    let before = std::fs::read(out.join("summary.json")).unwrap();
    let again = aaklab(dir.path(), POLES, &["run"]);
    assert!(again.status.success());
    assert_eq!(std::fs::read(out.join("summary.json")).unwrap(), before);
    assert_eq!(again.stdout, first.stdout);
    let log = stderr(&again);
    assert_eq!(log.lines().count(), 3 * 8);
    assert!(log.lines().all(|l| l.starts_with("cache hit: ")), "{log}");

    let off = aaklab(dir.path(), POLES, &["run", "--cache", "off"]);
    assert!(!stderr(&off).contains("cache hit"));
    assert_eq!(std::fs::read(out.join("summary.json")).unwrap(), before);
}

#[test]
fn numerical_failure_exits_3_with_partial_results() {
    let dir = tempfile::tempdir().unwrap();
    let o = aaklab(dir.path(), F64_TOO_DEEP, &["run", "--cache", "off"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("error: stage aak n="), "{err}");
    assert!(err.contains("exp.toml"));
    let out = dir.path().join("out");
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "failed");
    let progress = std::fs::read_to_string(out.join("poles/aak/progress.csv")).unwrap();
    assert!(progress.contains(",complete") && progress.contains(",failed"));
    assert!(out.join("poles/aak/n005.csv").exists());
}

#[test]
fn cut_verb_prints_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "generators = [\"aak\"]\n[function]\nkind = \"two_branch_sqrt\"\nbranch_points = [[0.5, 0.0], [-0.5, 0.0]]\n[sweep]\nn_min = 1\nn_max = 4\n";
    let o = aaklab(dir.path(), cfg, &["cut"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cap: f64 = String::from_utf8_lossy(&o.stdout).trim().strip_prefix("capacity ").unwrap().parse().unwrap();
    assert!((cap - 0.725544161609597).abs() < 1e-9, "{cap}");
    let doc = std::fs::read_to_string(dir.path().join("out/cut.txt")).unwrap();
    assert!(doc.starts_with("kind=cut\n"));
}
