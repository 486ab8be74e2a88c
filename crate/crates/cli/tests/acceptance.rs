//! End-to-end acceptance run: each criterion prints one PASS/FAIL line with
//! its runtime, and the test fails if any criterion does.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schatten_cli::{execute, ExperimentConfig};
use schatten_core::kernel::build_convolution_kernel;
use schatten_core::Complex64;
use serde_json::Value;

type Checked = Result<String, String>;

fn run(experiment: &str, params: &[(&str, &str)]) -> (String, Value) {
    let overrides: BTreeMap<String, String> = params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let config = ExperimentConfig::resolve(Some(experiment), None, overrides, Some(0), None).expect("valid config");
    let out = execute(&config).expect("experiment runs");
    let report: Value = serde_json::from_str(&out.report_json).unwrap();
    (report["status"].as_str().unwrap().to_owned(), report)
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn require(ok: bool, what: String) -> Result<String, String> {
    if ok {
        Ok(what)
    } else {
        Err(what)
    }
}

fn circulant_oracle() -> Checked {
    let mut worst = 0.0f64;
    let mut sizes = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = rng.random_range(8..=256usize) * if seed % 5 == 0 { 2 } else { 1 };
        sizes.push(modes);
        let c: Vec<Complex64> = (0..2 * modes + 1)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let conv = build_convolution_kernel(&c).map_err(|e| e.to_string())?;
        let s = conv.kernel.spectrum().map_err(|e| e.to_string())?;
        for (a, b) in s.values().iter().zip(conv.exact_spectrum.values()) {
            worst = worst.max((a - b).abs());
        }
    }
    let largest = sizes.iter().max().unwrap();
    require(
        worst <= 1e-9,
        format!("max |s_k - |c_k|| = {worst:.2e} over 20 sequences (up to {largest} modes)"),
    )
}

fn lattice_consistency() -> Checked {
    let (status, rep) = run("lattice-schatten", &[("gamma", "2.3")]);
    let m = &rep["result"]["membership"];
    let fit = f(&m["measured_tail"]["exponent"]);
    let tau = f(&m["predicted_decay_tau"]);
    let ok = status == "consistent"
        && m["condition_norms"]["transformed_l2"].is_number()
        && (fit - 2.3).abs() <= 0.02 * 2.3
        && fit >= 2.1
        && fit >= tau;
    let (status1, rep1) = run("lattice-schatten", &[("gamma", "1.0")]);
    let drift = f(&rep1["result"]["membership"]["condition_drift"]);
    let ok1 = status1 == "inconclusive" && drift > 0.05;
    require(
        ok && ok1,
        format!(
            "gamma 2.3: {status}, fit {fit:.4}, tau {tau:.4}; gamma 1.0: {status1}, drift {:.1}%",
            100.0 * drift
        ),
    )
}

fn sharpness_gap() -> Checked {
    let mut gaps = Vec::new();
    let mut ok = true;
    for eps in [0.4, 0.2, 0.1] {
        let gamma = format!("{}", 2.1 + eps);
        let (status, rep) = run("lattice-schatten", &[("gamma", &gamma)]);
        let gap = f(&rep["result"]["exponent_minus_tau"]);
        ok &= status == "consistent" && (gap - eps).abs() <= 0.05;
        gaps.push(gap);
    }
    ok &= gaps.windows(2).all(|w| w[0] > w[1]);
    require(ok, format!("fit - tau for eps 0.4, 0.2, 0.1: {gaps:.4?}"))
}

fn averaged_trace() -> Checked {
    let (s1, smooth) = run("torus-trace", &[("kernel", "exp-cos"), ("N", "256")]);
    let tr = &smooth["result"]["trace_report"];
    let gap = (f(&tr["diagonal_trace"][0]) - f(&tr["eigen_trace"][0]))
        .hypot(f(&tr["diagonal_trace"][1]) - f(&tr["eigen_trace"][1]));
    let (s2, zeroed) = run(
        "torus-trace",
        &[("kernel", "zeroed-diagonal"), ("R", "512"), ("levels", "3")],
    );
    let z = &zeroed["result"];
    let raw = f(&z["diagonal_relative_gap"]);
    let averaged = f(&z["averaged_relative_gap"]);
    let flagged = z["trace_report"]["discrepancy_flags"]
        .as_array()
        .is_some_and(|a| a.iter().any(|v| v == "diagonal-pathology"));
    require(
        s1 == "consistent" && gap <= 1e-6 && s2 == "consistent" && raw >= 0.99 && averaged <= 0.02 && flagged,
        format!("smooth |diag - eig| = {gap:.2e}; zeroed raw gap {raw:.3}, averaged gap {averaged:.4}, pathology flagged {flagged}"),
    )
}

fn counting_exponents() -> Checked {
    let p = |rep: &Value| f(&rep["result"]["counting_fit"]["exponent_p"]);
    let (_, a2) = run("oscillator-counting", &[("a", "2")]);
    let (_, a4) = run("oscillator-counting", &[("a", "4")]);
    let (_, k2) = run("higher-oscillator", &[("k", "2"), ("ell", "1")]);
    let (_, k1) = run("higher-oscillator", &[("k", "1"), ("ell", "2"), ("L", "8")]);
    let mismatch = f(&k1["result"]["second_order_relative_mismatch"]);
    let (p2, p4, pk) = (p(&a2), p(&a4), p(&k2));
    require(
        (p2 - 1.0).abs() <= 0.05 && (p4 - 0.75).abs() <= 0.075 && (pk - 0.75).abs() <= 0.075 && mismatch <= 1e-8,
        format!("a=2: {p2:.4}, a=4: {p4:.4}, (k,l)=(2,1): {pk:.4}, (1,2) vs a=4 mismatch {mismatch:.1e}"),
    )
}

fn riesz() -> Checked {
    let (status, rep) = run("riesz", &[("alpha", "0.5"), ("intervals", "0:1"), ("N", "256")]);
    let r = &rep["result"];
    let s1 = f(&r["largest_singular_value"]);
    let min = f(&r["min_eigenvalue"]);
    let fit = f(&r["tail_fit"]["exponent"]);
    let spread = f(&r["scaled_max"]) / f(&r["scaled_min"]);
    require(
        status == "consistent" && min >= -1e-10 * s1 && (fit - 0.5).abs() <= 0.05,
        format!("min eigenvalue {min:.2e}, fitted exponent {fit:.4}, s_k k^0.5 spread {spread:.3} over k 10..100"),
    )
}

fn violations(v: &Value) -> u64 {
    match v {
        Value::Object(m) if m.contains_key("violations") => m["violations"].as_u64().unwrap_or(u64::MAX),
        Value::Object(m) => m.values().map(violations).sum(),
        _ => 0,
    }
}

fn inequality_suite() -> Checked {
    let (status, rep) = run(
        "inequality-suite",
        &[
            ("trials", "100"),
            ("weyl_p", "1,1.5,2"),
            ("russo_p", "1.25,1.5,1.9"),
            ("russo_size", "32"),
        ],
    );
    let r = &rep["result"];
    let count = |key: &str| violations(&r[key]);
    let total = ["weyl", "fan", "product_norm", "russo"]
        .iter()
        .map(|k| count(k))
        .sum::<u64>();
    require(
        status == "consistent" && total == 0,
        format!(
            "violations: Weyl {}, Fan {}, product {}, Russo {} (100 trials each)",
            count("weyl"),
            count("fan"),
            count("product_norm"),
            count("russo")
        ),
    )
}

fn carleman() -> Checked {
    let (s16, b16) = run("carleman", &[("B", "16"), ("p", "1.9")]);
    let checks = &b16["result"]["checks"];
    let sup = b16["result"]["sup_norms"]
        .as_array()
        .unwrap()
        .iter()
        .map(f)
        .fold(0.0, f64::max);
    let inc = f(&b16["result"]["max_increment_relative_error"]);
    let (s12, b12) = run("carleman", &[("B", "12"), ("svd_modes", "4096")]);
    let svd = &b12["result"]["svd"];
    let dev = f(&svd["max_deviation"]);
    println!(
        "  carleman SVD capped at {} of {} frequencies (matrix {})",
        svd["retained_modes"], svd["max_frequency"], svd["matrix_dimension"]
    );
    require(
        s16 == "consistent"
            && sup < 2.4
            && checks["l2_cauchy"] == true
            && checks["lp_monotone"] == true
            && inc <= 0.01
            && s12 == "consistent"
            && dev <= 1e-9,
        format!("B=16: max sup {sup:.4}, increment error {inc:.1e}; B=12 SVD deviation {dev:.1e}"),
    )
}

fn sobolev() -> Checked {
    let (status, rep) = run(
        "inequality-suite",
        &[("trials", "0"), ("sobolev_n", "512"), ("mu", "0.5,1,2")],
    );
    let rows = rep["result"]["sobolev_inclusions"].as_array().unwrap();
    let worst = rows
        .iter()
        .flat_map(|r| [f(&r["lower"]), f(&r["upper"])])
        .fold(0.0, f64::max);
    require(
        status == "consistent" && rows.len() == 9 && rows.iter().all(|r| r["holds"] == true),
        format!("9 order pairs on a 512x512 grid, largest constant {worst:.6}"),
    )
}

const REDUCED: &[(&str, &[&str])] = &[
    ("carleman", &["--B=8", "--svd_modes=64"]),
    ("higher-oscillator", &["--N=512", "--L=20"]),
    (
        "inequality-suite",
        &["--trials=6", "--size=8", "--russo_size=8", "--sobolev_n=32"],
    ),
    ("lattice-schatten", &["--R=200"]),
    ("oscillator-counting", &["--N=512"]),
    ("riesz", &["--N=128", "--k_max=50"]),
    ("russo", &["--trials=6", "--size=8"]),
    ("torus-trace", &["--N=64"]),
];

fn run_binary(dir: &Path, name: &str, args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(format!("{name}-{threads}"));
    let status = Command::new(env!("CARGO_BIN_EXE_schatten-lab"))
        .arg(name)
        .args(args)
        .arg("--seed=11")
        .arg(format!("--out={}", out.display()))
        .env("SCHATTEN_LAB_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !matches!(status.status.code(), Some(0 | 3 | 4)) {
        return Err(format!("{name} exited with {:?}", status.status.code()));
    }
    std::fs::read(out.join("report.json")).map_err(|e| e.to_string())
}

fn determinism() -> Checked {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut differing = Vec::new();
    for (name, args) in REDUCED {
        let first = run_binary(dir.path(), name, args, "1")?;
        let second = run_binary(dir.path(), name, args, "2")?;
        if first != second {
            differing.push(*name);
        }
    }
    require(
        differing.is_empty(),
        format!("{} experiments re-run, reports differing: {differing:?}", REDUCED.len()),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(u32, &str, u64, fn() -> Checked); 10] = [
        (1, "circulant oracle", 30, circulant_oracle),
        (2, "lattice membership", 20, lattice_consistency),
        (3, "sharpness gap", 60, sharpness_gap),
        (4, "averaged trace", 60, averaged_trace),
        (5, "counting exponents", 180, counting_exponents),
        (6, "riesz potential", 10, riesz),
        (7, "inequality suite", 60, inequality_suite),
        (8, "carleman barrier", 240, carleman),
        (9, "sobolev inclusions", 5, sobolev),
        (10, "determinism", 120, determinism),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= Duration::from_secs(budget);
        let (pass, detail) = match outcome {
            Ok(d) => (in_budget, d),
            Err(d) => (false, d),
        };
        println!(
            "criterion {id:>2} {name:<20} {} ({:.1} s of {budget} s) {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
