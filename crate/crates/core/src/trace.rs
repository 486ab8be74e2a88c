//! Diagonal, cell-averaged and eigenvalue traces of square kernels.
//!
//! On a grid the averaged kernel at level `j` replaces `K` on each product of
//! dyadic cells by its weighted mean. Its diagonal recovers the trace even when
//! the sampled diagonal of `K` is unrepresentative of the operator.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{input, parameter, Result};
use crate::kernel::DiscretizedKernel;
use crate::spectral::eigenvalues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceFlag {
    /// The sampled diagonal misses the eigenvalue trace while the finest
    /// averaged diagonal recovers it.
    DiagonalPathology,
    /// The finest averaged diagonal still misses the eigenvalue trace.
    NonConvergentAveraging,
}

/// Relative disagreement above which the sampled diagonal is called pathological.
pub const PATHOLOGY_TOLERANCE: f64 = 0.01;
/// Relative disagreement the finest averaged trace may show and still count as agreeing.
pub const AVERAGING_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub diagonal_trace: C64,
    /// `(j, trace of the level-j averaged kernel)` for `j = 1..=j_max`.
    pub averaged_trace_by_level: Vec<(u32, C64)>,
    pub eigen_trace: C64,
    pub discrepancy_flags: BTreeSet<TraceFlag>,
}

impl TraceReport {
    /// `j,trace` rows with the real part of each averaged trace.
    pub fn levels_csv(&self) -> String {
        let mut out = String::from("j,trace\n");
        for (j, t) in &self.averaged_trace_by_level {
            let _ = writeln!(out, "{j},{}", t.re);
        }
        out
    }

    pub fn finest_averaged_trace(&self) -> Option<C64> {
        self.averaged_trace_by_level.last().map(|(_, t)| *t)
    }
}

fn require_square(k: &DiscretizedKernel) -> Result<()> {
    if k.is_square() {
        Ok(())
    } else {
        Err(input("traces need identical row and column grids"))
    }
}

/// `Σ_i w_i K(x_i, x_i)`.
pub fn diagonal_trace(k: &DiscretizedKernel) -> Result<C64> {
    require_square(k)?;
    let w = k.row_grid().weights();
    Ok((0..w.len()).map(|i| k.values()[(i, i)] * w[i]).sum())
}

/// Sum of the eigenvalues of the weighted operator matrix.
pub fn eigen_trace(k: &DiscretizedKernel) -> Result<C64> {
    require_square(k)?;
    Ok(eigenvalues(k.operator_matrix().as_ref())?.into_iter().sum())
}

/// Replaces `K` on every product of level-`j` cells by its weighted mean.
/// Level `j` splits the (one-dimensional) grid into `2^j` runs of consecutive points.
pub fn dyadic_average(k: &DiscretizedKernel, j: u32) -> Result<DiscretizedKernel> {
    require_square(k)?;
    let grid = k.row_grid();
    if grid.dimension() != 1 {
        return Err(parameter("dyadic cells are implemented for one-dimensional grids"));
    }
    let n = grid.len();
    let cells = 1usize
        .checked_shl(j)
        .filter(|&c| c <= n && n % c == 0)
        .ok_or_else(|| parameter(format!("{n} grid points cannot be split into 2^{j} equal cells")))?;
    let m = n / cells;
    let w = grid.weights();
    let v = k.values();
    let mut out = Mat::<C64>::zeros(n, n);
    for ci in 0..cells {
        for cj in 0..cells {
            let (rows, cols) = (ci * m..(ci + 1) * m, cj * m..(cj + 1) * m);
            let first = v[(rows.start, cols.start)];
            let constant = cols.clone().all(|c| rows.clone().all(|r| v[(r, c)] == first));
            let mean = if constant {
                first
            } else {
                let mut sum = C64::new(0.0, 0.0);
                for c in cols.clone() {
                    for r in rows.clone() {
                        sum += v[(r, c)] * (w[r] * w[c]);
                    }
                }
                let wr: f64 = w[rows.clone()].iter().sum();
                let wc: f64 = w[cols.clone()].iter().sum();
                sum / (wr * wc)
            };
            for c in cols.clone() {
                for r in rows.clone() {
                    out[(r, c)] = mean;
                }
            }
        }
    }
    Ok(k.with_values(out))
}

/// Traces of `K` itself together with its averaged diagonals for `j = 1..=j_max`.
pub fn averaged_trace(k: &DiscretizedKernel, j_max: u32) -> Result<TraceReport> {
    averaged_trace_for_operator(k, k, j_max)
}

/// As [`averaged_trace`], with the diagonal estimates taken from `representative`
/// and the eigenvalue trace from `operator`. The two must live on the same grid;
/// this models a kernel modified on the diagonal (a null set in the continuum)
/// that still represents the unmodified operator.
pub fn averaged_trace_for_operator(
    representative: &DiscretizedKernel,
    operator: &DiscretizedKernel,
    j_max: u32,
) -> Result<TraceReport> {
    require_square(operator)?;
    if representative.row_grid() != operator.row_grid() {
        return Err(input("representative and operator kernels use different grids"));
    }
    let diagonal = diagonal_trace(representative)?;
    let eigen = eigen_trace(operator)?;
    let mut levels = Vec::with_capacity(j_max as usize);
    for j in 1..=j_max {
        levels.push((j, diagonal_trace(&dyadic_average(representative, j)?)?));
    }

    let mut flags = BTreeSet::new();
    let finest = levels.last().map(|(_, t)| *t).unwrap_or(diagonal);
    let finest_agrees = relative_gap(finest, eigen) <= AVERAGING_TOLERANCE;
    if !finest_agrees {
        flags.insert(TraceFlag::NonConvergentAveraging);
    } else if relative_gap(diagonal, eigen) > PATHOLOGY_TOLERANCE {
        flags.insert(TraceFlag::DiagonalPathology);
    }
    Ok(TraceReport {
        diagonal_trace: diagonal,
        averaged_trace_by_level: levels,
        eigen_trace: eigen,
        discrepancy_flags: flags,
    })
}

/// `|a - b| / |b|`, zero when both vanish.
pub fn relative_gap(a: C64, b: C64) -> f64 {
    let diff = (a - b).norm();
    if diff == 0.0 {
        0.0
    } else {
        diff / b.norm()
    }
}
