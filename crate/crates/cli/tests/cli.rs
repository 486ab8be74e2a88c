use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schatten-lab"))
        .args(args)
        .env_remove("SCHATTEN_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    format!("--out={}", dir.display())
}

#[test]
fn list_prints_sorted_registry() {
    let out = lab(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names.len(), 8);
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(text.lines().all(|l| l.split_whitespace().count() > 1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lab(&[]).status.code(), Some(2));
    assert_eq!(lab(&["no-such-experiment"]).status.code(), Some(2));
    assert_eq!(lab(&["riesz", "--alpha=high"]).status.code(), Some(2));
    assert_eq!(lab(&["riesz", "--colour=red"]).status.code(), Some(2));
    assert_eq!(lab(&["riesz", "--bogus-flag"]).status.code(), Some(2));
    // accepted by the schema but rejected by the Riesz kernel
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        lab(&["riesz", "--alpha=1.5", &out_arg(dir.path())]).status.code(),
        Some(2)
    );
    let threads = Command::new(env!("CARGO_BIN_EXE_schatten-lab"))
        .args(["russo", "--trials=1", "--size=4"])
        .env("SCHATTEN_LAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn outputs_and_status_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = lab(&["riesz", "--N=128", "--k_max=50", &out_arg(dir.path())]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let spectrum = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let plot = std::fs::read_to_string(dir.path().join("plotdata.csv")).unwrap();
    assert!(spectrum.starts_with("k,s_k\n1,"));
    assert_eq!(spectrum.lines().count(), 129);
    assert!(plot.starts_with("log_k,log_s_k\n0,"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "riesz");
    assert_eq!(report["status"], "consistent");
    assert_eq!(report["parameters"]["N"], "128");

    // A zero tolerance cannot absorb the finite-size bias of the fitted exponent.
    let violated = lab(&["riesz", "--N=128", "--k_max=50", "--tolerance=0", &out_arg(dir.path())]);
    assert_eq!(violated.status.code(), Some(3));

    let inconclusive = lab(&["lattice-schatten", "--gamma=1.0", "--R=200", &out_arg(dir.path())]);
    assert_eq!(inconclusive.status.code(), Some(4));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# small lattice\nexperiment = lattice-schatten\nR = 150\ngamma = 1.0\nseed = 4\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let out = lab(&["--config", cfg.to_str().unwrap(), "--gamma=2.5", &out_arg(&a)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(a.join("report.json")).unwrap();

    let b = dir.path().join("b");
    let flags = lab(&[
        "lattice-schatten",
        "--R=150",
        "--gamma=2.5",
        "--seed",
        "4",
        &out_arg(&b),
    ]);
    assert_eq!(flags.status.code(), Some(0));
    assert_eq!(report, std::fs::read_to_string(b.join("report.json")).unwrap());
}

#[test]
fn report_keys_are_sorted() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        lab(&["torus-trace", "--N=32", &out_arg(dir.path())]).status.code(),
        Some(0)
    );
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    assert_eq!(
        top,
        ["citation", "experiment", "parameters", "result", "seed", "status"]
    );
}
