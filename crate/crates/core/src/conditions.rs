//! Predicted Schatten indices and decay exponents, sufficient-condition norms
//! and membership verdicts.

use std::collections::BTreeMap;

use faer::Mat;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{input, parameter, LabError, Result};
use crate::kernel::{adjoint_kernel, hilbert_schmidt_norm, mixed_norm, DiscretizedKernel, Grid, GridKind};
use crate::multiplier::{aliased_frequency, apply_symbol, fft_nd, inverse_schatten_threshold, Axis, DiagonalSymbol};
use crate::spectral::{fit_tail_exponent_range, schatten_norm, SingularSpectrum, TailFit, INEQUALITY_TOLERANCE};

fn reciprocal(p: Option<f64>, name: &str) -> Result<f64> {
    match p {
        None => Ok(0.0),
        Some(p) if p > 0.0 => Ok(1.0 / p),
        Some(p) => Err(parameter(format!("{name} must be positive, got {p}"))),
    }
}

/// `r = 1/(1/2 + 1/p₁ + 1/p₂)`, omitting absent terms.
pub fn predict_r_main(p1: Option<f64>, p2: Option<f64>) -> Result<f64> {
    if p1.is_none() && p2.is_none() {
        return Err(parameter("at least one of p1, p2 is required"));
    }
    Ok(1.0 / (0.5 + reciprocal(p1, "p1")? + reciprocal(p2, "p2")?))
}

fn conjugate_of(q: f64) -> Result<f64> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(parameter(format!("q must lie in (1, 2], got {q}")));
    }
    Ok(q / (q - 1.0))
}

/// `r = 1/(1/q' + 1/p₁ + 1/p₂)` for kernels in `L^{q'}(L^q)`. With no
/// `p` terms this is `q'`, which exceeds 2 for `q < 2`.
pub fn predict_r_mixed(q: f64, p1: Option<f64>, p2: Option<f64>) -> Result<f64> {
    let qc = conjugate_of(q)?;
    Ok(1.0 / (1.0 / qc + reciprocal(p1, "p1")? + reciprocal(p2, "p2")?))
}

/// Decay exponent `τ = 1/q' + 1/p₁ + 1/p₂` with `q' = 2` by default.
pub fn predict_decay(p1: Option<f64>, p2: Option<f64>, qprime: Option<f64>) -> Result<f64> {
    if p1.is_none() && p2.is_none() {
        return Err(parameter("at least one of p1, p2 is required"));
    }
    let qc = qprime.unwrap_or(2.0);
    if !(qc >= 2.0) {
        return Err(parameter(format!("q' must be >= 2, got {qc}")));
    }
    Ok(1.0 / qc + reciprocal(p1, "p1")? + reciprocal(p2, "p2")?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RussoReport {
    pub p: f64,
    pub p_conjugate: f64,
    /// `(‖K‖_{p,p'} ‖K*‖_{p,p'})^{1/2}`.
    pub bound: f64,
    /// `‖T‖_{S_{p'}}`.
    pub measured: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Checks `‖T‖_{S_{p'}} ≤ (‖K‖_{p,p'} ‖K*‖_{p,p'})^{1/2}` for `1 < p < 2`.
pub fn russo_bound(k: &DiscretizedKernel, p: f64) -> Result<RussoReport> {
    if !(p > 1.0 && p < 2.0) {
        return Err(parameter(format!("p must lie in (1, 2), got {p}")));
    }
    if !k.is_square() {
        return Err(input("the Russo bound needs the same grid on both axes"));
    }
    let pc = p / (p - 1.0);
    let bound = (mixed_norm(k, p, pc)? * mixed_norm(&adjoint_kernel(k), p, pc)?).sqrt();
    let measured = schatten_norm(&k.spectrum()?, pc)?;
    Ok(RussoReport {
        p,
        p_conjugate: pc,
        bound,
        measured,
        margin: bound - measured,
        holds: INEQUALITY_TOLERANCE.admits(measured, bound),
    })
}

/// Weighted lattice norm together with its growth under radius doubling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeCondition {
    /// `(Σ (1+|k|)^{2α} (1+|l|)^{2β} |K(k,l)|²)^{1/2}` over the whole box.
    pub norm: f64,
    /// Relative growth of the squared sum from the half-radius box to the full box.
    pub drift: f64,
}

/// Relative drift above which a condition sum is treated as divergent.
pub const DIVERGENCE_DRIFT: f64 = 0.05;

fn half_box_mask(grid: &Grid) -> Vec<bool> {
    let lo = grid.origin();
    let hi = lo + grid.axis_points() as i64 - 1;
    let half = (lo.abs().min(hi.abs()) / 2) as f64;
    grid.points()
        .iter()
        .map(|p| p.iter().all(|c| c.abs() <= half))
        .collect()
}

/// `Σ rᵢ cⱼ |K_ij|²` over the whole box and over the half-radius sub-box.
fn weighted_mass(k: &DiscretizedKernel, rw: &[f64], cw: &[f64]) -> (f64, f64) {
    let (rm, cm) = (half_box_mask(k.row_grid()), half_box_mask(k.col_grid()));
    let v = k.values();
    let (mut full, mut half) = (0.0, 0.0);
    for j in 0..v.ncols() {
        for i in 0..v.nrows() {
            let t = rw[i] * cw[j] * v[(i, j)].norm_sqr();
            full += t;
            if rm[i] && cm[j] {
                half += t;
            }
        }
    }
    (full, half)
}

/// Spectral energy of a torus kernel, in total and over the modes with every
/// frequency component at most half the largest represented frequency.
fn torus_band_energy(k: &DiscretizedKernel) -> (f64, f64) {
    let (rg, cg) = (k.row_grid(), k.col_grid());
    let mut planner = FftPlanner::new();
    let v = k.values();
    let (rows, cols) = (v.nrows(), v.ncols());
    let mut t = Mat::<C64>::zeros(rows, cols);
    let mut buf = vec![C64::new(0.0, 0.0); rows];
    for j in 0..cols {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = v[(i, j)];
        }
        fft_nd(&mut buf, rg.dimension(), rg.axis_points(), &mut planner, false);
        for (i, b) in buf.iter().enumerate() {
            t[(i, j)] = *b;
        }
    }
    let mut buf = vec![C64::new(0.0, 0.0); cols];
    let low = |grid: &Grid| -> Vec<bool> {
        let n = grid.axis_points();
        let half = ((n.div_ceil(2) - 1) / 2) as i64;
        (0..grid.len())
            .map(|mut idx| {
                (0..grid.dimension()).all(|_| {
                    let xi = aliased_frequency(idx % n, n);
                    idx /= n;
                    xi.abs() <= half
                })
            })
            .collect()
    };
    let (rl, cl) = (low(rg), low(cg));
    let (mut full, mut band) = (0.0, 0.0);
    for i in 0..rows {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = t[(i, j)];
        }
        fft_nd(&mut buf, cg.dimension(), cg.axis_points(), &mut planner, false);
        for (j, b) in buf.iter().enumerate() {
            let e = b.norm_sqr();
            full += e;
            if rl[i] && cl[j] {
                band += e;
            }
        }
    }
    (full, band)
}

fn relative_drift(full: f64, half: f64) -> f64 {
    if full == 0.0 {
        0.0
    } else {
        (full - half) / full
    }
}

/// `(Σ_{k,l} (1+|k|)^{2α}(1+|l|)^{2β}|K(k,l)|²)^{1/2}` with `k` the row site
/// and `l` the column site.
pub fn lattice_condition_norm(k: &DiscretizedKernel, alpha: f64, beta: f64) -> Result<LatticeCondition> {
    if !(alpha >= 0.0 && beta >= 0.0) {
        return Err(parameter(format!("weights must be >= 0, got ({alpha}, {beta})")));
    }
    if k.row_grid().kind() != GridKind::Lattice || k.col_grid().kind() != GridKind::Lattice {
        return Err(LabError::Incompatible("lattice condition needs lattice grids".into()));
    }
    let weight = |p: &[f64], e: f64| (1.0 + p.iter().map(|c| c * c).sum::<f64>().sqrt()).powf(2.0 * e);
    let rw: Vec<f64> = k.row_grid().points().iter().map(|p| weight(p, alpha)).collect();
    let cw: Vec<f64> = k.col_grid().points().iter().map(|p| weight(p, beta)).collect();
    let (full, half) = weighted_mass(k, &rw, &cw);
    Ok(LatticeCondition {
        norm: full.sqrt(),
        drift: relative_drift(full, half),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipOptions {
    /// Kernel integrability exponent in `(1, 2]`; 2 means plain `L²`.
    pub q: f64,
    /// First singular value index used by the tail fit (1-based).
    pub k_min: usize,
    pub k_max: Option<usize>,
    /// Allowed shortfall of the measured exponent below the prediction.
    pub exponent_tolerance: f64,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        Self {
            q: 2.0,
            k_min: 10,
            k_max: None,
            exponent_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub predicted_r: Option<f64>,
    pub predicted_decay_tau: Option<f64>,
    /// Fitted counting exponents of the supplied symbols (`p1` for the `y`
    /// symbol, `p2` for the `x` symbol).
    pub counting_exponents: BTreeMap<String, f64>,
    /// Finite measured norms only; non-finite ones are reported in `notes`.
    pub condition_norms: BTreeMap<String, f64>,
    /// Growth of the transformed kernel's squared norm from half to full
    /// resolution: the half-radius box on lattices, the half-frequency band on tori.
    pub condition_drift: Option<f64>,
    pub measured_tail: Option<TailFit>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub spectrum: Option<SingularSpectrum>,
}

/// Compares the singular value decay of `K` with the rate predicted from the
/// counting exponents of `e1` (acting in `y`) and `e2` (acting in `x`),
/// provided the transformed kernel `(E₂)_x(E₁)_y K` satisfies the
/// integrability hypothesis.
pub fn verify_membership(
    k: &DiscretizedKernel,
    e1: Option<&DiagonalSymbol>,
    e2: Option<&DiagonalSymbol>,
    options: &MembershipOptions,
) -> Result<MembershipReport> {
    let qc = conjugate_of(options.q)?;
    let mut report = MembershipReport {
        predicted_r: None,
        predicted_decay_tau: None,
        counting_exponents: BTreeMap::new(),
        condition_norms: BTreeMap::new(),
        condition_drift: None,
        measured_tail: None,
        verdict: Verdict::Inconclusive,
        notes: Vec::new(),
        spectrum: None,
    };

    let mut transformed = k.clone();
    if let Some(e) = e1 {
        transformed = apply_symbol(&transformed, e, Axis::Y)?;
    }
    if let Some(e) = e2 {
        transformed = apply_symbol(&transformed, e, Axis::X)?;
    }

    let mut hypothesis = true;
    let mut record = |report: &mut MembershipReport, name: &str, value: f64| {
        if value.is_finite() {
            report.condition_norms.insert(name.to_owned(), value);
        } else {
            hypothesis = false;
            report.notes.push(format!("condition-failed: {name} is not finite"));
        }
    };
    record(&mut report, "kernel_l2", hilbert_schmidt_norm(k));
    if options.q == 2.0 {
        record(&mut report, "transformed_l2", hilbert_schmidt_norm(&transformed));
    } else {
        let q = options.q;
        record(&mut report, "transformed_mixed", mixed_norm(&transformed, q, qc)?);
        record(
            &mut report,
            "transformed_adjoint_mixed",
            mixed_norm(&adjoint_kernel(&transformed), q, qc)?,
        );
    }
    let kinds = (k.row_grid().kind(), k.col_grid().kind());
    let masses = match kinds {
        (GridKind::Lattice, GridKind::Lattice) => Some(weighted_mass(
            &transformed,
            transformed.row_grid().weights(),
            transformed.col_grid().weights(),
        )),
        (GridKind::Torus, GridKind::Torus) => Some(torus_band_energy(&transformed)),
        _ => None,
    };
    if let Some((full, half)) = masses {
        let drift = relative_drift(full, half);
        report.condition_drift = Some(drift);
        if !(drift <= DIVERGENCE_DRIFT) {
            hypothesis = false;
            report.notes.push(format!(
                "condition-failed: transformed norm grows by {:.1}% from half to full resolution (divergent)",
                100.0 * drift
            ));
        }
    }

    let mut thresholds = [None, None];
    for (slot, (name, e)) in [("p1", e1), ("p2", e2)].into_iter().enumerate() {
        if let Some(e) = e {
            match inverse_schatten_threshold(e) {
                Ok(p) => {
                    report.counting_exponents.insert(name.to_owned(), p);
                    thresholds[slot] = Some(p);
                }
                Err(err) => report.notes.push(format!("{name}: counting fit failed: {err}")),
            }
        }
    }
    if thresholds.iter().all(Option::is_none) {
        report.notes.push("no usable symbol; no prediction made".to_owned());
    } else {
        report.predicted_r = Some(predict_r_mixed(options.q, thresholds[0], thresholds[1])?);
        report.predicted_decay_tau = Some(predict_decay(thresholds[0], thresholds[1], Some(qc))?);
    }

    let spectrum = k.spectrum()?;
    match fit_tail_exponent_range(&spectrum, options.k_min, options.k_max.unwrap_or(usize::MAX)) {
        Ok(fit) => report.measured_tail = Some(fit),
        Err(err) => report.notes.push(format!("tail fit failed: {err}")),
    }
    report.spectrum = Some(spectrum);

    report.verdict = match (hypothesis, report.predicted_decay_tau, report.measured_tail) {
        (true, Some(tau), Some(fit)) => {
            if fit.exponent >= tau - options.exponent_tolerance {
                Verdict::Consistent
            } else {
                report.notes.push(format!(
                    "measured exponent {:.4} below predicted {:.4}",
                    fit.exponent, tau
                ));
                Verdict::Violated
            }
        }
        _ => Verdict::Inconclusive,
    };
    Ok(report)
}
