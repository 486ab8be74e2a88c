use std::collections::BTreeMap;

use schatten_core::kernel::build_riesz_kernel;
use schatten_core::spectral::{fit_tail_exponent_range, hermitian_eigenvalues};
use serde_json::json;

use super::{all_hold, lab, Outcome, Params};
use crate::{to_value, CliError};

pub fn run(params: &Params<'_>, _seed: u64) -> Result<Outcome, CliError> {
    let err = lab("riesz");
    let alpha = params.real("alpha")?;
    let intervals = params.intervals("intervals")?;
    let n = params.count("N")?;
    let (k_min, k_max) = (params.count("k_min")?, params.count("k_max")?);
    let tolerance = params.real("tolerance")?;
    let bounded_ratio = params.real("bounded_ratio")?;

    if k_min == 0 || k_min > k_max {
        return Err(CliError::Usage(format!("fit window {k_min}..={k_max} is empty")));
    }
    let kernel = build_riesz_kernel(alpha, &intervals, n).map_err(&err)?;
    let eig = hermitian_eigenvalues(kernel.operator_matrix().as_ref()).map_err(&err)?;
    let spectrum = kernel.spectrum().map_err(&err)?;
    let s1 = spectrum.largest();
    let min_eigenvalue = eig.first().copied().unwrap_or(0.0);
    let fit = fit_tail_exponent_range(&spectrum, k_min, k_max).map_err(&err)?;
    let k_max = k_max.min(spectrum.len());

    // s_k k^α over the fit window should stay within a fixed band.
    let scaled: Vec<f64> = spectrum.values()[k_min - 1..k_max]
        .iter()
        .enumerate()
        .map(|(i, s)| s * ((k_min + i) as f64).powf(alpha))
        .collect();
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);

    let mut checks = BTreeMap::new();
    checks.insert("positive", min_eigenvalue >= -1e-10 * s1);
    checks.insert("decay_exponent", (fit.exponent - alpha).abs() <= tolerance * alpha);
    checks.insert("scaled_bounded", lo > 0.0 && hi / lo <= bounded_ratio);
    Ok(Outcome {
        status: all_hold(&checks),
        result: json!({
            "checks": checks,
            "largest_singular_value": s1,
            "min_eigenvalue": min_eigenvalue,
            "tail_fit": to_value(&fit),
            "expected_exponent": alpha,
            "scaled_min": lo,
            "scaled_max": hi,
        }),
        spectrum: Some(spectrum),
    })
}
