use std::collections::BTreeMap;

use schatten_core::kernel::{build_lattice_kernel_on, build_torus_kernel};
use schatten_core::trace::{averaged_trace, averaged_trace_for_operator, relative_gap};
use schatten_core::{Grid, TraceFlag, Verdict};
use serde_json::json;

use super::{lab, Outcome, Params};
use crate::{to_value, CliError};

fn level(params: &Params<'_>, auto: u32) -> Result<u32, CliError> {
    match params.real_or_auto("levels")? {
        None => Ok(auto),
        Some(v) if v >= 0.0 && v.fract() == 0.0 && v <= 30.0 => Ok(v as u32),
        Some(v) => Err(CliError::Usage(format!("levels={v} is not a level in 0..=30"))),
    }
}

pub fn run(params: &Params<'_>, _seed: u64) -> Result<Outcome, CliError> {
    let err = lab("torus-trace");
    let kind = params.text("kernel")?;
    let tolerance = params.real("tolerance")?;

    let (report, spectrum) = if kind == "zeroed-diagonal" {
        // The all-ones kernel with its diagonal removed still represents the
        // rank-one operator; only averaged diagonals see its trace.
        let r = i64::try_from(params.count("R")?).map_err(|_| CliError::Usage("R is too large".into()))?;
        let grid = Grid::lattice_box(1, -r, r - 1).map_err(&err)?;
        let ones = build_lattice_kernel_on(|_, _| 1.0, grid.clone(), grid.clone()).map_err(&err)?;
        let zeroed =
            build_lattice_kernel_on(|a, b| if a == b { 0.0 } else { 1.0 }, grid.clone(), grid).map_err(&err)?;
        let report = averaged_trace_for_operator(&zeroed, &ones, level(params, 3)?).map_err(&err)?;
        (report, ones.spectrum().map_err(&err)?)
    } else {
        let n = params.count("N")?;
        let kernel = if kind == "exp-cos" {
            build_torus_kernel(|x, y| (x[0] - y[0]).cos().exp(), 1, 1, n)
        } else {
            build_torus_kernel(|x, y| (x[0] - y[0]).cos(), 1, 1, n)
        }
        .map_err(&err)?;
        let auto = n.checked_ilog2().unwrap_or(0);
        let report = averaged_trace(&kernel, level(params, auto)?).map_err(&err)?;
        (report, kernel.spectrum().map_err(&err)?)
    };

    let finest = report.finest_averaged_trace().unwrap_or(report.diagonal_trace);
    let diagonal_gap = relative_gap(report.diagonal_trace, report.eigen_trace);
    let averaged_gap = relative_gap(finest, report.eigen_trace);
    let mut checks = BTreeMap::new();
    let status = if kind == "zeroed-diagonal" {
        checks.insert("diagonal_misses", diagonal_gap >= 0.99);
        checks.insert(
            "pathology_flagged",
            report.discrepancy_flags.contains(&TraceFlag::DiagonalPathology),
        );
        if report.discrepancy_flags.contains(&TraceFlag::NonConvergentAveraging) {
            // Cells too coarse for the averaged diagonal to settle.
            Verdict::Inconclusive
        } else {
            super::all_hold(&checks)
        }
    } else {
        checks.insert(
            "diagonal_agrees",
            (report.diagonal_trace - report.eigen_trace).norm() <= tolerance,
        );
        checks.insert("averaged_agrees", (finest - report.eigen_trace).norm() <= tolerance);
        super::all_hold(&checks)
    };
    Ok(Outcome {
        status,
        result: json!({
            "checks": checks,
            "trace_report": to_value(&report),
            "finest_averaged_trace": to_value(&finest),
            "diagonal_relative_gap": diagonal_gap,
            "averaged_relative_gap": averaged_gap,
        }),
        spectrum: Some(spectrum),
    })
}
