use std::collections::BTreeMap;

use schatten_core::multiplier::{discretize_anharmonic, discretize_higher_anharmonic, fit_counting};
use schatten_core::{DiagonalSymbol, LabError, Verdict};
use serde_json::{json, Value};

use super::{all_hold, lab, Outcome, Params};
use crate::{to_value, CliError};

/// Counting fit of a discretized oscillator compared with `expected`.
fn counting_outcome(
    name: &'static str,
    symbol: &DiagonalSymbol,
    expected: f64,
    tolerance: f64,
    mut checks: BTreeMap<&'static str, bool>,
    mut extra: serde_json::Map<String, Value>,
) -> Result<Outcome, CliError> {
    let err = lab(name);
    let spectrum = Some(symbol.inverse_spectrum().map_err(&err)?);
    extra.insert("trusted_eigenvalues".into(), json!(symbol.trusted_eigenvalues().len()));
    extra.insert("trusted_max".into(), json!(symbol.trusted_max()));
    let fit = match fit_counting(symbol, symbol.trusted_max()) {
        Ok(fit) => fit,
        // Too few trusted eigenvalues: the box or grid is too small to decide.
        Err(LabError::Degenerate(msg)) => {
            extra.insert("checks".into(), json!(checks));
            extra.insert("note".into(), json!(format!("counting fit skipped: {msg}")));
            return Ok(Outcome {
                status: match all_hold(&checks) {
                    Verdict::Consistent => Verdict::Inconclusive,
                    v => v,
                },
                result: Value::Object(extra),
                spectrum,
            });
        }
        Err(e) => return Err(err(e)),
    };
    let relative_error = (fit.exponent_p - expected).abs() / expected;
    checks.insert("counting_exponent", relative_error <= tolerance);
    extra.insert("counting_fit".into(), to_value(&fit));
    extra.insert("expected_exponent".into(), json!(expected));
    extra.insert("relative_error".into(), json!(relative_error));
    extra.insert("checks".into(), json!(checks));
    Ok(Outcome {
        status: all_hold(&checks),
        result: Value::Object(extra),
        spectrum,
    })
}

/// `-d²/dx² + |x|^a`; the counting exponent is `1/2 + 1/a`.
pub fn run_anharmonic(params: &Params<'_>, _seed: u64) -> Result<Outcome, CliError> {
    let err = lab("oscillator-counting");
    let a = params.real("a")?;
    let harmonic = a == 2.0;
    let l = params.real_or_auto("L")?.unwrap_or(if harmonic { 25.0 } else { 8.0 });
    let tolerance = params
        .real_or_auto("tolerance")?
        .unwrap_or(if harmonic { 0.05 } else { 0.1 });
    let n = params.count("N")?;
    let symbol = discretize_anharmonic(a, l, n).map_err(&err)?;

    let mut extra = serde_json::Map::new();
    extra.insert("L".into(), json!(l));
    extra.insert("tolerance".into(), json!(tolerance));
    if harmonic {
        // Exact levels 2k+1 of the harmonic oscillator.
        let worst = symbol
            .eigenvalues()
            .iter()
            .take(20)
            .enumerate()
            .map(|(k, v)| (v - (2 * k + 1) as f64).abs() / (2 * k + 1) as f64)
            .fold(0.0, f64::max);
        extra.insert("low_level_relative_error".into(), json!(worst));
    }
    counting_outcome(
        "oscillator-counting",
        &symbol,
        0.5 + 1.0 / a,
        tolerance,
        BTreeMap::new(),
        extra,
    )
}

/// `(-d²/dx²)^k + |x|^{2ℓ}`; the counting exponent is `1/(2k) + 1/(2ℓ)`.
pub fn run_higher(params: &Params<'_>, _seed: u64) -> Result<Outcome, CliError> {
    let err = lab("higher-oscillator");
    let (k, ell) = (params.count("k")?, params.count("ell")?);
    let l = params.real("L")?;
    let n = params.count("N")?;
    let tolerance = params.real("tolerance")?;
    let match_tol = params.real("match_tol")?;
    let to_u32 = |key: &str, v: usize| u32::try_from(v).map_err(|_| CliError::Usage(format!("{key}={v} is too large")));
    let symbol = discretize_higher_anharmonic(to_u32("k", k)?, to_u32("ell", ell)?, l, n).map_err(&err)?;

    let mut checks = BTreeMap::new();
    let mut extra = serde_json::Map::new();
    if k == 1 {
        let second_order = discretize_anharmonic(2.0 * ell as f64, l, n).map_err(&err)?;
        let mismatch = symbol
            .eigenvalues()
            .iter()
            .zip(second_order.eigenvalues())
            .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
            .fold(0.0, f64::max);
        checks.insert("matches_second_order", mismatch <= match_tol);
        extra.insert("second_order_relative_mismatch".into(), json!(mismatch));
    }
    let expected = 0.5 / k as f64 + 0.5 / ell as f64;
    counting_outcome("higher-oscillator", &symbol, expected, tolerance, checks, extra)
}
