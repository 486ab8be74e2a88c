use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use schatten_core::conditions::russo_bound;
use schatten_core::multiplier::sobolev_inclusion_constants;
use schatten_core::spectral::{eigenvalues, fan_check, product_norm_check, singular_values, weyl_check};
use schatten_core::{Complex64, DiscretizedKernel, Grid, LabError, Mat, Verdict};
use serde::Serialize;
use serde_json::{json, Value};

use super::{lab, parallel_map, trial_rng, Outcome, Params};
use crate::{thread_limit, to_value, CliError};

/// Violation count and smallest relative margin `(rhs - lhs) / |rhs|` of one inequality.
#[derive(Debug, Clone, Copy, Serialize)]
struct Tally {
    checks: usize,
    violations: usize,
    worst_relative_margin: f64,
}

impl Tally {
    fn new() -> Self {
        Self {
            checks: 0,
            violations: 0,
            worst_relative_margin: f64::INFINITY,
        }
    }

    fn add(&mut self, lhs: f64, rhs: f64, holds: bool) {
        self.checks += 1;
        if !holds {
            self.violations += 1;
        }
        let margin = (rhs - lhs) / rhs.abs().max(f64::MIN_POSITIVE);
        self.worst_relative_margin = self.worst_relative_margin.min(margin);
    }
}

fn complex_matrix(rng: &mut ChaCha8Rng, n: usize) -> Mat<Complex64> {
    Mat::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_kernel(rng: &mut ChaCha8Rng, size: usize) -> Result<DiscretizedKernel, LabError> {
    let grid = Grid::lattice_box(1, 0, size as i64 - 1)?;
    DiscretizedKernel::new(grid.clone(), grid, complex_matrix(rng, size))
}

fn check_exponents(ps: &[f64]) -> Result<(), CliError> {
    match ps.iter().find(|p| !(**p > 1.0 && **p < 2.0)) {
        Some(p) => Err(CliError::Usage(format!("Russo exponent {p} is not in (1, 2)"))),
        None => Ok(()),
    }
}

/// Russo's bound over seeded random kernels; returns one tally per exponent.
fn russo_tallies(seed: u64, trials: usize, size: usize, ps: &[f64]) -> Result<BTreeMap<String, Tally>, LabError> {
    let threads = thread_limit().unwrap_or(1);
    let per_trial = parallel_map(trials, threads, |t| -> Result<Vec<(f64, f64, bool)>, LabError> {
        let k = random_kernel(&mut trial_rng(seed, t), size)?;
        ps.iter()
            .map(|&p| russo_bound(&k, p).map(|r| (r.measured, r.bound, r.holds)))
            .collect()
    });
    let mut tallies: BTreeMap<String, Tally> = ps.iter().map(|p| (p.to_string(), Tally::new())).collect();
    for trial in per_trial {
        for (p, (lhs, rhs, holds)) in ps.iter().zip(trial?) {
            tallies
                .get_mut(&p.to_string())
                .expect("tally exists")
                .add(lhs, rhs, holds);
        }
    }
    Ok(tallies)
}

fn verdict(tallies: &[&Tally]) -> Verdict {
    if tallies.iter().all(|t| t.violations == 0) {
        Verdict::Consistent
    } else {
        Verdict::Violated
    }
}

pub fn run_russo(params: &Params<'_>, seed: u64) -> Result<Outcome, CliError> {
    let (trials, size) = (params.count("trials")?, params.count("size")?);
    let ps = params.list("p")?;
    check_exponents(&ps)?;
    if size == 0 {
        return Err(CliError::Usage("size must be positive".into()));
    }
    let tallies = russo_tallies(seed, trials, size, &ps).map_err(lab("russo"))?;
    let spectrum = random_kernel(&mut trial_rng(seed, 0), size)
        .and_then(|k| k.spectrum())
        .map_err(lab("russo"))?;
    Ok(Outcome {
        status: verdict(&tallies.values().collect::<Vec<_>>()),
        result: json!({ "by_exponent": to_value(&tallies) }),
        spectrum: Some(spectrum),
    })
}

struct TrialResult {
    weyl: Vec<(f64, f64, bool)>,
    fan: (f64, bool),
    product: (f64, f64, bool),
}

fn suite_trial(seed: u64, t: usize, n: usize, weyl_p: &[f64]) -> Result<TrialResult, LabError> {
    let mut rng = trial_rng(seed, t);
    let a = complex_matrix(&mut rng, n);
    let b = complex_matrix(&mut rng, n);
    let eig = eigenvalues(a.as_ref())?;
    let s = singular_values(a.as_ref())?;
    let weyl = weyl_p
        .iter()
        .map(|&p| weyl_check(&eig, &s, p).map(|c| (c.lhs, c.rhs, c.holds)))
        .collect::<Result<_, _>>()?;
    let fan = fan_check(a.as_ref(), b.as_ref())?;
    let (p, q) = (rng.random_range(0.5..4.0), rng.random_range(0.5..4.0));
    let prod = product_norm_check(a.as_ref(), b.as_ref(), p, q)?;
    Ok(TrialResult {
        weyl,
        fan: (fan.worst_margin, fan.holds),
        product: (prod.check.lhs, prod.check.rhs, prod.check.holds),
    })
}

pub fn run_suite(params: &Params<'_>, seed: u64) -> Result<Outcome, CliError> {
    let err = lab("inequality-suite");
    let trials = params.count("trials")?;
    let n = params.count("size")?;
    let weyl_p = params.list("weyl_p")?;
    let russo_p = params.list("russo_p")?;
    check_exponents(&russo_p)?;
    let russo_size = params.count("russo_size")?;
    let sobolev_n = params.count("sobolev_n")?;
    let mu = params.list("mu")?;
    if n == 0 || russo_size == 0 {
        return Err(CliError::Usage("matrix sizes must be positive".into()));
    }

    let threads = thread_limit()?;
    let results = parallel_map(trials, threads, |t| suite_trial(seed, t, n, &weyl_p));
    let mut weyl: BTreeMap<String, Tally> = weyl_p.iter().map(|p| (p.to_string(), Tally::new())).collect();
    let (mut fan_violations, mut fan_worst) = (0usize, f64::INFINITY);
    let mut product = Tally::new();
    for r in results {
        let r = r.map_err(&err)?;
        for (p, (lhs, rhs, holds)) in weyl_p.iter().zip(r.weyl) {
            weyl.get_mut(&p.to_string()).expect("tally exists").add(lhs, rhs, holds);
        }
        fan_violations += usize::from(!r.fan.1);
        fan_worst = fan_worst.min(r.fan.0);
        product.add(r.product.0, r.product.1, r.product.2);
    }
    // Distinct stream offset so Russo kernels differ from the matrices above.
    let russo = russo_tallies(seed ^ 0x5255_5353_4f00_0000, trials, russo_size, &russo_p).map_err(&err)?;

    let mut sobolev = Vec::new();
    let mut sobolev_ok = true;
    for &m1 in &mu {
        for &m2 in &mu {
            let c = sobolev_inclusion_constants(sobolev_n, m1, m2).map_err(&err)?;
            // Both pointwise inequalities hold with constant one.
            let holds = c.lower <= 1.0 + 1e-12 && c.upper <= 1.0 + 1e-12;
            sobolev_ok &= holds;
            let mut v = to_value(&c);
            v["holds"] = Value::Bool(holds);
            sobolev.push(v);
        }
    }

    let mut all: Vec<&Tally> = weyl.values().chain(russo.values()).collect();
    all.push(&product);
    let status = match verdict(&all) {
        Verdict::Consistent if !sobolev_ok || fan_violations > 0 => Verdict::Violated,
        v => v,
    };
    Ok(Outcome {
        status,
        result: json!({
            "weyl": to_value(&weyl),
            "fan": json!({
                "checks": trials,
                "violations": fan_violations,
                "worst_absolute_margin": fan_worst,
            }),
            "product_norm": to_value(&product),
            "russo": to_value(&russo),
            "sobolev_inclusions": sobolev,
        }),
        spectrum: None,
    })
}
