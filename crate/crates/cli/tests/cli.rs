use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_extremalflow")).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["run", "--grid", "51", "--sigma", "0.1", "--out", "res", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let res = dir.path().join("res");
    let json: String = std::fs::read_to_string(res.join("summary.json")).unwrap();
    assert!(json.contains("\"category\": \"ConvergeLower\""), "{json}");
    assert!(res.join("diagnostics.csv").exists());
    assert!(res.join("snapshots_0000.csv").exists());
}

#[test]
fn summary_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "grid_n = 51\nsigma = -0.5\n").unwrap();
    for d in ["a", "b"] {
        let out = bin(&["run", "--config", "c.toml", "--out", d], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(dir.path().join("a/summary.json")).unwrap();
    let b = std::fs::read(dir.path().join("b/summary.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["run", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.toml"));

    std::fs::write(dir.path().join("wide.toml"), "half_span = 1.5\n").unwrap();
    let out = bin(&["verify", "--config", "wide.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1/A"));

    let out = bin(&["run", "--grid", "100"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "grid_n = 51\nsigmas = [-1.0, 0.0, 60.0]\n").unwrap();
    let out = bin(&["sweep", "--config", "c.toml", "--out", ".", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "sigma,category,t_event,final_sgn,event,blowup");
    assert!(lines[1].contains("ConvergeLower"));
    assert!(lines[3].contains("Escape"));
}

#[test]
fn bisect_rejects_a_bad_bracket() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "grid_n = 51\nbisect_lo = 0.0\nbisect_hi = 0.1\n").unwrap();
    let out = bin(&["bisect", "--config", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bracket"));
}

#[test]
fn bisect_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "grid_n = 51\nbisect_lo = 0.1\nbisect_hi = 60.0\nbisect_width = 0.5\n").unwrap();
    let out = bin(&["bisect", "--config", "c.toml", "--out", ".", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json = std::fs::read_to_string(dir.path().join("bracket.json")).unwrap();
    let v: Vec<f64> = ["\"lo\": ", "\"hi\": "]
        .iter()
        .map(|k| {
            let rest = &json[json.find(k).unwrap() + k.len()..];
            rest[..rest.find(',').unwrap()].parse().unwrap()
        })
        .collect();
    assert!(v[1] - v[0] <= 0.5 && v[0] > 0.1);
}

#[test]
fn coarse_verify_keeps_the_order_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["verify", "--grid", "17"], dir.path());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("PASS [ 2]")), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 10);
    assert_eq!(out.status.code(), Some(3));
}
