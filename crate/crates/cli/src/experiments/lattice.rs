use schatten_core::conditions::{verify_membership, MembershipOptions};
use schatten_core::kernel::build_lattice_kernel;
use schatten_core::multiplier::lattice_weight_symbol;
use schatten_core::Grid;
use serde_json::json;

use super::{lab, Outcome, Params};
use crate::{to_value, CliError};

/// Diagonal kernel `(1+|k|)^{-γ}` on `[-R, R]` with lattice weights of order
/// `α` in `x` and `β` in `y`.
pub fn run(params: &Params<'_>, _seed: u64) -> Result<Outcome, CliError> {
    let err = lab("lattice-schatten");
    let gamma = params.real("gamma")?;
    let (alpha, beta) = (params.real("alpha")?, params.real("beta")?);
    let r = params.count("R")?;
    let k_max = params.count("k_max")?;
    let options = MembershipOptions {
        q: params.real("q")?,
        k_min: params.count("k_min")?,
        k_max: (k_max > 0).then_some(k_max),
        exponent_tolerance: params.real("tolerance")?,
    };

    let decay = |k: i64| (1.0 + k.unsigned_abs() as f64).powf(-gamma);
    let kernel = build_lattice_kernel(|a, b| if a == b { decay(a[0]) } else { 0.0 }, 1, 1, r).map_err(&err)?;
    let grid = Grid::lattice(1, r).map_err(&err)?;
    let ex = lattice_weight_symbol(alpha, &grid).map_err(&err)?;
    let ey = lattice_weight_symbol(beta, &grid).map_err(&err)?;
    let mut report = verify_membership(&kernel, Some(&ey), Some(&ex), &options).map_err(&err)?;

    let gap = match (report.measured_tail, report.predicted_decay_tau) {
        (Some(fit), Some(tau)) => Some(fit.exponent - tau),
        _ => None,
    };
    let spectrum = report.spectrum.take();
    Ok(Outcome {
        status: report.verdict,
        result: json!({
            "membership": to_value(&report),
            "exponent_minus_tau": gap,
        }),
        spectrum,
    })
}
