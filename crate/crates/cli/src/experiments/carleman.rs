use std::collections::BTreeMap;

use schatten_core::carleman::{
    block_lp_mass, carleman_coefficients, carleman_operator, doubling_drift, sup_norm_estimate, MAX_LEVEL,
};
use schatten_core::conditions::DIVERGENCE_DRIFT;
use schatten_core::SingularSpectrum;
use serde_json::{json, Value};

use super::{all_hold, lab, Outcome, Params};
use crate::{to_value, CliError};

/// Largest dense SVD attempted, matching the core cap on matrix dimension.
const MAX_SVD_MODES: usize = 2047;

pub fn run(params: &Params<'_>, _seed: u64) -> Result<Outcome, CliError> {
    let err = lab("carleman");
    let blocks = params.count("B")?;
    if !(3..MAX_LEVEL as usize).contains(&blocks) {
        return Err(CliError::Usage(format!("B must lie in 3..{MAX_LEVEL}, got {blocks}")));
    }
    let blocks = blocks as u32;
    let p = params.real("p")?;
    let sup_bound = params.real("sup_bound")?;
    let cauchy_from = params.count("cauchy_from")?;
    let cauchy_tol = params.real("cauchy_tol")?;
    let increment_tol = params.real("increment_tol")?;
    let drift_blocks = u32::try_from(params.count("drift_blocks")?)
        .map_err(|_| CliError::Usage("drift_blocks is too large".into()))?;
    let svd_modes = params.count("svd_modes")?;
    let svd_tol = params.real("svd_tol")?;

    let c = carleman_coefficients(blocks).map_err(&err)?;
    let mut checks = BTreeMap::new();

    // Sup norm of every partial sum, sampled at eight points per top frequency.
    let mut sups = Vec::new();
    for b in 1..=blocks {
        let part = c.truncated(b);
        let samples = (8 * part.max_frequency()).next_power_of_two();
        sups.push(sup_norm_estimate(&part, samples).map_err(&err)?);
    }
    checks.insert("sup_bounded", sups.iter().all(|&s| s < sup_bound));

    let l2: Vec<f64> = c.lp_partial_sums(2.0).iter().map(|s| s.sqrt()).collect();
    let cauchy: Vec<f64> = l2
        .windows(2)
        .skip(cauchy_from.saturating_sub(1))
        .map(|w| w[1] - w[0])
        .collect();
    checks.insert("l2_cauchy", cauchy.iter().all(|&d| d < cauchy_tol));

    let lp = c.lp_partial_sums(p);
    checks.insert("lp_monotone", lp.windows(2).all(|w| w[1] > w[0]));
    let increment_error = (1..=blocks)
        .map(|n| {
            let measured = if n == 1 {
                lp[0]
            } else {
                lp[n as usize - 1] - lp[n as usize - 2]
            };
            let exact = block_lp_mass(n, p);
            (measured - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    checks.insert("increments_match_closed_form", increment_error <= increment_tol);

    // Doubling drift of the closed-form series, with p = 2 as the convergent control.
    let drift = doubling_drift(p, drift_blocks);
    let control = doubling_drift(2.0, drift_blocks);
    checks.insert(
        "drift_classifies",
        (drift > DIVERGENCE_DRIFT) == (p < 2.0) && control <= DIVERGENCE_DRIFT,
    );

    let mut svd = Value::Null;
    let mut spectrum = None;
    if svd_modes > 0 {
        let modes = svd_modes.min(MAX_SVD_MODES).min(c.max_frequency());
        let op = carleman_operator(&c, modes).map_err(&err)?;
        let measured = op.kernel.spectrum().map_err(&err)?;
        let deviation = measured
            .values()
            .iter()
            .zip(op.exact_spectrum.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        checks.insert("svd_matches_exact", deviation <= svd_tol);
        svd = json!({
            "requested_modes": svd_modes,
            "retained_modes": modes,
            "max_frequency": c.max_frequency(),
            "capped": modes < c.max_frequency(),
            "matrix_dimension": 2 * modes + 1,
            "max_deviation": deviation,
        });
        spectrum = Some(measured);
    }
    let spectrum = match spectrum {
        Some(s) => s,
        None => SingularSpectrum::new(
            c.coefficients().iter().map(|z| z.norm()).collect(),
            "coefficient-moduli",
        )
        .map_err(&err)?,
    };

    let table = c.divergence_table(&[p, 2.0]);
    Ok(Outcome {
        status: all_hold(&checks),
        result: json!({
            "checks": checks,
            "sup_norms": sups,
            "l2_norms": l2,
            "l2_increments_after_cauchy_from": cauchy,
            "max_increment_relative_error": increment_error,
            "divergence_table": to_value(&table),
            "closed_form_drift": { "p": drift, "control_p2": control, "blocks": drift_blocks },
            "svd": svd,
        }),
        spectrum: Some(spectrum),
    })
}
