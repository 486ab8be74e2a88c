//! Dense singular/eigen computations, Schatten quasi-norms and the classical
//! operator inequalities (Weyl, Fan, Hölder-type products) as numerical checks.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{input, parameter, LabError, Result};
use crate::fit::{least_squares, LineFit};

/// Values below this fraction of `s_1` are considered numerically zero in fits.
pub const ZERO_FLOOR: f64 = 1e-12;

/// Minimum number of points a tail fit accepts.
pub const MIN_FIT_POINTS: usize = 8;

mod sealed {
    pub trait Sealed {}
    impl Sealed for f64 {}
    impl Sealed for num_complex::Complex64 {}
}

/// Matrix entry types the dense routines accept: `f64` and `Complex64`.
pub trait Scalar: Copy + Send + Sync + std::fmt::Debug + PartialEq + 'static + sealed::Sealed {
    fn modulus(self) -> f64;
    fn is_finite_entry(self) -> bool;
    fn to_complex(self) -> C64;
    fn conjugate(self) -> Self;
    fn zero() -> Self;

    #[doc(hidden)]
    fn dense_singular_values(m: MatRef<'_, Self>) -> Result<Vec<f64>>;
    #[doc(hidden)]
    fn dense_eigenvalues(m: MatRef<'_, Self>) -> Result<Vec<C64>>;
    #[doc(hidden)]
    fn dense_hermitian_eigenvalues(m: MatRef<'_, Self>) -> Result<Vec<f64>>;
    #[doc(hidden)]
    fn product(a: MatRef<'_, Self>, b: MatRef<'_, Self>) -> Mat<Self>;
}

fn numeric(detail: impl std::fmt::Debug) -> LabError {
    LabError::Numeric {
        module: "spectral-core",
        detail: format!("{detail:?}"),
    }
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite_entry(self) -> bool {
        self.is_finite()
    }
    fn to_complex(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn conjugate(self) -> Self {
        self
    }
    fn zero() -> Self {
        0.0
    }
    fn dense_singular_values(m: MatRef<'_, Self>) -> Result<Vec<f64>> {
        m.singular_values().map_err(numeric)
    }
    fn dense_eigenvalues(m: MatRef<'_, Self>) -> Result<Vec<C64>> {
        m.eigenvalues().map_err(numeric)
    }
    fn dense_hermitian_eigenvalues(m: MatRef<'_, Self>) -> Result<Vec<f64>> {
        m.self_adjoint_eigenvalues(Side::Lower).map_err(numeric)
    }
    fn product(a: MatRef<'_, Self>, b: MatRef<'_, Self>) -> Mat<Self> {
        a * b
    }
}

impl Scalar for C64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite_entry(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn to_complex(self) -> C64 {
        self
    }
    fn conjugate(self) -> Self {
        self.conj()
    }
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn dense_singular_values(m: MatRef<'_, Self>) -> Result<Vec<f64>> {
        m.singular_values().map_err(numeric)
    }
    fn dense_eigenvalues(m: MatRef<'_, Self>) -> Result<Vec<C64>> {
        m.eigenvalues().map_err(numeric)
    }
    fn dense_hermitian_eigenvalues(m: MatRef<'_, Self>) -> Result<Vec<f64>> {
        m.self_adjoint_eigenvalues(Side::Lower).map_err(numeric)
    }
    fn product(a: MatRef<'_, Self>, b: MatRef<'_, Self>) -> Mat<Self> {
        a * b
    }
}

/// Non-increasing sequence of singular values with a free-form provenance label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    source: String,
}

impl SingularSpectrum {
    /// Sorts `values` non-increasingly; rejects negative or non-finite entries.
    pub fn new(mut values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(input(format!("singular value {bad} is negative or not finite")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            values,
            source: source.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `s_1`, or zero for an empty spectrum.
    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    /// Keeps the leading `n` values.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            values: self.values[..n.min(self.values.len())].to_vec(),
            source: self.source.clone(),
        }
    }

    /// CSV with header `k,s_k`, one value per line, `k` starting at 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,s_k\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, v));
        }
        out
    }

    /// Parses the format written by [`SingularSpectrum::to_csv`].
    pub fn from_csv(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "k,s_k" => {}
            other => return Err(input(format!("expected header `k,s_k`, found {other:?}"))),
        }
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (_, v) = line
                .split_once(',')
                .ok_or_else(|| input(format!("line {}: missing comma", lineno + 2)))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| input(format!("line {}: {e}", lineno + 2)))?;
            values.push(v);
        }
        Self::new(values, source)
    }

    /// Log-log pairs `(ln k, ln s_k)` over strictly positive values, for decay plots.
    pub fn log_log_pairs(&self) -> Vec<(f64, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, v)| (((i + 1) as f64).ln(), v.ln()))
            .collect()
    }
}

fn check_finite<T: Scalar>(m: MatRef<'_, T>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite_entry() {
                return Err(input(format!("matrix entry ({i}, {j}) is not finite")));
            }
        }
    }
    Ok(())
}

fn diagonal_entries<T: Scalar>(m: MatRef<'_, T>) -> Option<Vec<T>> {
    let zero = T::zero();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j && m[(i, j)] != zero {
                return None;
            }
        }
    }
    Some((0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).collect())
}

fn is_hermitian<T: Scalar>(m: MatRef<'_, T>) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    for j in 0..m.ncols() {
        for i in j..m.nrows() {
            if m[(i, j)] != m[(j, i)].conjugate() {
                return false;
            }
        }
    }
    true
}

/// All `min(rows, cols)` singular values, sorted non-increasingly.
///
/// Exactly diagonal matrices short-circuit to the sorted moduli of the diagonal.
pub fn singular_values<T: Scalar>(m: MatRef<'_, T>) -> Result<SingularSpectrum> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(input("matrix is empty"));
    }
    check_finite(m)?;
    if let Some(diag) = diagonal_entries(m) {
        let values = diag.into_iter().map(Scalar::modulus).collect();
        return SingularSpectrum::new(values, "diagonal");
    }
    let values = T::dense_singular_values(m)?.into_iter().map(|v| v.max(0.0)).collect();
    SingularSpectrum::new(values, "dense-svd")
}

/// Eigenvalues of a square matrix (any order). Exactly Hermitian input uses
/// the self-adjoint solver.
pub fn eigenvalues<T: Scalar>(m: MatRef<'_, T>) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() {
        return Err(input(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    check_finite(m)?;
    if is_hermitian(m) {
        return Ok(T::dense_hermitian_eigenvalues(m)?
            .into_iter()
            .map(|v| C64::new(v, 0.0))
            .collect());
    }
    T::dense_eigenvalues(m)
}

/// Eigenvalues of a self-adjoint matrix, ascending. Only the lower triangle is read.
pub fn hermitian_eigenvalues<T: Scalar>(m: MatRef<'_, T>) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(input("self-adjoint eigenvalues need a square matrix"));
    }
    check_finite(m)?;
    let mut ev = T::dense_hermitian_eigenvalues(m)?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn matmul<T: Scalar>(a: MatRef<'_, T>, b: MatRef<'_, T>) -> Result<Mat<T>> {
    if a.ncols() != b.nrows() {
        return Err(input(format!(
            "cannot multiply {}x{} by {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(T::product(a, b))
}

/// `(Σ s_k^p)^{1/p}`; `p = ∞` gives `s_1`.
pub fn schatten_norm(s: &SingularSpectrum, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(parameter(format!("Schatten index must be positive, got {p}")));
    }
    let top = s.largest();
    if p.is_infinite() || top == 0.0 {
        return Ok(top);
    }
    let sum: f64 = s.values().iter().map(|v| (v / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

/// `Σ s_k^p`, the p-th power of the Schatten quasi-norm.
pub fn schatten_power_sum(s: &SingularSpectrum, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 || p.is_infinite() {
        return Err(parameter(format!(
            "power sum index must be finite and positive, got {p}"
        )));
    }
    Ok(s.values().iter().map(|v| v.powf(p)).sum())
}

/// Absolute-plus-relative slack for floating comparisons of the form `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        INEQUALITY_TOLERANCE
    }
}

/// 1e-9 absolute plus 1e-9 relative to the larger side.
pub const INEQUALITY_TOLERANCE: Tolerance = Tolerance {
    absolute: 1e-9,
    relative: 1e-9,
};

impl Tolerance {
    pub fn slack(&self, lhs: f64, rhs: f64) -> f64 {
        self.absolute + self.relative * lhs.abs().max(rhs.abs())
    }

    pub fn admits(&self, lhs: f64, rhs: f64) -> bool {
        lhs <= rhs + self.slack(lhs, rhs)
    }
}

/// Outcome of a single inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; negative values within tolerance still count as holding.
    pub margin: f64,
    pub holds: bool,
}

impl CheckReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            margin: rhs - lhs,
            holds: INEQUALITY_TOLERANCE.admits(lhs, rhs),
        }
    }
}

/// Weyl's inequality `Σ|λ_n|^p ≤ Σ s_n^p` for eigenvalues and singular values of one matrix.
pub fn weyl_check(eigenvalues: &[C64], s: &SingularSpectrum, p: f64) -> Result<CheckReport> {
    if p.is_nan() || p <= 0.0 || p.is_infinite() {
        return Err(parameter(format!("Weyl exponent must be finite and positive, got {p}")));
    }
    if eigenvalues.len() != s.len() {
        return Err(input(format!(
            "{} eigenvalues but {} singular values",
            eigenvalues.len(),
            s.len()
        )));
    }
    let lhs = eigenvalues.iter().map(|l| l.norm().powf(p)).sum();
    let rhs = schatten_power_sum(s, p)?;
    Ok(CheckReport::new(lhs, rhs))
}

/// Result of checking `s_{k+l-1}(BC) ≤ s_k(B) s_l(C)` over all admissible pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FanReport {
    pub pairs_checked: usize,
    /// Smallest `s_k(B)s_l(C) - s_{k+l-1}(BC)` seen.
    pub worst_margin: f64,
    /// 1-based `(k, l)` attaining the worst margin.
    pub worst_pair: (usize, usize),
    pub holds: bool,
}

pub fn fan_check<T: Scalar>(b: MatRef<'_, T>, c: MatRef<'_, T>) -> Result<FanReport> {
    let bc = matmul(b, c)?;
    let sb = singular_values(b)?;
    let sc = singular_values(c)?;
    let sbc = singular_values(bc.as_ref())?;
    let (sb, sc, sbc) = (sb.values(), sc.values(), sbc.values());

    let mut report = FanReport {
        pairs_checked: 0,
        worst_margin: f64::INFINITY,
        worst_pair: (1, 1),
        holds: true,
    };
    for (k, &bk) in sb.iter().enumerate() {
        for (l, &cl) in sc.iter().enumerate() {
            let Some(&lhs) = sbc.get(k + l) else { break };
            let rhs = bk * cl;
            report.pairs_checked += 1;
            if rhs - lhs < report.worst_margin {
                report.worst_margin = rhs - lhs;
                report.worst_pair = (k + 1, l + 1);
            }
            if !INEQUALITY_TOLERANCE.admits(lhs, rhs) {
                report.holds = false;
            }
        }
    }
    Ok(report)
}

/// `‖AB‖_{S_r} ≤ 2^{1/r} ‖A‖_{S_q} ‖B‖_{S_p}` with `1/r = 1/p + 1/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductNormReport {
    pub r: f64,
    pub check: CheckReport,
}

pub fn product_norm_check<T: Scalar>(a: MatRef<'_, T>, b: MatRef<'_, T>, p: f64, q: f64) -> Result<ProductNormReport> {
    for (name, v) in [("p", p), ("q", q)] {
        if v.is_nan() || v <= 0.0 {
            return Err(parameter(format!("{name} must be positive, got {v}")));
        }
    }
    let r = 1.0 / (1.0 / p + 1.0 / q);
    let ab = matmul(a, b)?;
    let lhs = schatten_norm(&singular_values(ab.as_ref())?, r)?;
    let rhs = 2f64.powf(1.0 / r) * schatten_norm(&singular_values(a)?, q)? * schatten_norm(&singular_values(b)?, p)?;
    Ok(ProductNormReport {
        r,
        check: CheckReport::new(lhs, rhs),
    })
}

/// Least-squares power-law fit `s_k ≈ e^{intercept} k^{-exponent}` to a spectrum tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit {
    /// Decay magnitude (positive for decaying spectra).
    pub exponent: f64,
    pub intercept: f64,
    /// RMS of the log-log residuals.
    pub residual: f64,
    pub k_min: usize,
    /// Last index used.
    pub k_max: usize,
    pub points: usize,
    /// Set when a log-linear model (geometric decay) fits markedly better than a power law.
    pub super_polynomial: bool,
}

/// Fits over every index `k ≥ k_min` whose value is above the numerical-zero floor.
pub fn fit_tail_exponent(s: &SingularSpectrum, k_min: usize) -> Result<TailFit> {
    fit_tail_exponent_range(s, k_min, usize::MAX)
}

/// As [`fit_tail_exponent`], restricted to `k_min ≤ k ≤ k_max`.
pub fn fit_tail_exponent_range(s: &SingularSpectrum, k_min: usize, k_max: usize) -> Result<TailFit> {
    if k_min == 0 {
        return Err(parameter("k_min is 1-based and must be positive"));
    }
    let floor = ZERO_FLOOR * s.largest();
    let (ks, vals): (Vec<f64>, Vec<f64>) = s
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| (i + 1, v))
        .filter(|&(k, v)| k >= k_min && k <= k_max && v > floor && v > 0.0)
        .map(|(k, v)| (k as f64, v.ln()))
        .unzip();
    if ks.len() < MIN_FIT_POINTS {
        return Err(LabError::Degenerate(format!(
            "tail fit needs {MIN_FIT_POINTS} positive values at k >= {k_min}, found {}",
            ks.len()
        )));
    }
    let logk: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let LineFit { slope, intercept, rms } = least_squares(&logk, &vals);
    let semilog = least_squares(&ks, &vals);
    Ok(TailFit {
        exponent: -slope,
        intercept,
        residual: rms,
        k_min,
        k_max: *ks.last().unwrap() as usize,
        points: ks.len(),
        super_polynomial: semilog.slope < 0.0 && semilog.rms < 0.5 * rms,
    })
}

/// Converts a real matrix to complex entries.
pub fn complexify(m: MatRef<'_, f64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| C64::new(m[(i, j)], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spectrum(v: &[f64]) -> SingularSpectrum {
        SingularSpectrum::new(v.to_vec(), "test").unwrap()
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { [3.0, 1.0, 2.0][i] } else { 0.0 });
        assert_eq!(singular_values(m.as_ref()).unwrap().values(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn nilpotent_jordan_block() {
        let m = Mat::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { 1.0 } else { 0.0 });
        let s = singular_values(m.as_ref()).unwrap();
        assert_abs_diff_eq!(s.values()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.values()[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rectangular_returns_min_dimension() {
        let m = Mat::from_fn(5, 3, |i, j| (i + 2 * j) as f64);
        assert_eq!(singular_values(m.as_ref()).unwrap().len(), 3);
    }

    #[test]
    fn non_finite_entry_is_input_error() {
        let m = Mat::from_fn(2, 2, |i, j| if i == j { f64::NAN } else { 1.0 });
        assert!(matches!(singular_values(m.as_ref()), Err(LabError::Input(_))));
        let e = Mat::<f64>::zeros(0, 3);
        assert!(matches!(singular_values(e.as_ref()), Err(LabError::Input(_))));
    }

    #[test]
    fn schatten_examples() {
        assert_abs_diff_eq!(
            schatten_norm(&spectrum(&[3.0, 4.0]), 2.0).unwrap(),
            5.0,
            epsilon = 1e-14
        );
        for p in [0.3, 1.0, 2.5, f64::INFINITY] {
            assert_abs_diff_eq!(schatten_norm(&spectrum(&[1.7]), p).unwrap(), 1.7, epsilon = 1e-14);
        }
        let geo: Vec<f64> = (0..16).map(|k| 0.5f64.powi(k)).collect();
        assert_abs_diff_eq!(
            schatten_norm(&spectrum(&geo), 1.0).unwrap(),
            2.0 * (1.0 - 2f64.powi(-16)),
            epsilon = 1e-14
        );
        assert_eq!(schatten_norm(&spectrum(&[4.0, 3.0]), f64::INFINITY).unwrap(), 4.0);
        assert!(matches!(
            schatten_norm(&spectrum(&[1.0]), 0.0),
            Err(LabError::Parameter(_))
        ));
        assert!(matches!(
            schatten_norm(&spectrum(&[1.0]), -1.0),
            Err(LabError::Parameter(_))
        ));
    }

    #[test]
    fn spectrum_rejects_bad_values() {
        assert!(SingularSpectrum::new(vec![1.0, -0.5], "x").is_err());
        assert!(SingularSpectrum::new(vec![f64::INFINITY], "x").is_err());
        assert_eq!(spectrum(&[3.0, 4.0]).values(), &[4.0, 3.0]);
    }

    #[test]
    fn spectrum_csv_round_trip() {
        let s = spectrum(&[0.25, 1.0, 1e-17]);
        let text = s.to_csv();
        assert!(text.starts_with("k,s_k\n1,1\n"));
        assert_eq!(SingularSpectrum::from_csv(&text, "test").unwrap(), s);
    }

    #[test]
    fn weyl_nilpotent_and_normal() {
        let zeros = [C64::new(0.0, 0.0); 2];
        let r = weyl_check(&zeros, &spectrum(&[1.0, 0.0]), 1.0).unwrap();
        assert!(r.holds);
        assert_eq!((r.lhs, r.rhs), (0.0, 1.0));

        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(0.0, 2.0),
            (1, 1) => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        let eig = eigenvalues(m.as_ref()).unwrap();
        let s = singular_values(m.as_ref()).unwrap();
        for p in [0.5, 1.0, 2.0, 3.7] {
            let r = weyl_check(&eig, &s, p).unwrap();
            assert!(r.holds);
            assert_abs_diff_eq!(r.lhs, r.rhs, epsilon = 1e-12);
        }
        assert!(matches!(weyl_check(&eig[..1], &s, 1.0), Err(LabError::Input(_))));
    }

    #[test]
    fn fan_diagonal_enumeration() {
        let b = Mat::from_fn(2, 2, |i, j| if i == j { [2.0, 1.0][i] } else { 0.0 });
        let c = Mat::from_fn(2, 2, |i, j| if i == j { [3.0, 1.0][i] } else { 0.0 });
        let r = fan_check(b.as_ref(), c.as_ref()).unwrap();
        // s(BC) = [6, 1]; pairs (1,1): 6 <= 6, (1,2): 1 <= 2, (2,1): 1 <= 3.
        assert_eq!(r.pairs_checked, 3);
        assert!(r.holds);
        assert_abs_diff_eq!(r.worst_margin, 0.0, epsilon = 1e-14);
        assert_eq!(r.worst_pair, (1, 1));
    }

    #[test]
    fn fan_identity_factor_is_tight() {
        let id = Mat::<f64>::identity(4, 4);
        let c = Mat::from_fn(4, 4, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0);
        let r = fan_check(id.as_ref(), c.as_ref()).unwrap();
        assert!(r.holds);
        assert_abs_diff_eq!(r.worst_margin, 0.0, epsilon = 1e-12);
        let bad = Mat::<f64>::zeros(3, 2);
        assert!(matches!(fan_check(bad.as_ref(), c.as_ref()), Err(LabError::Input(_))));
    }

    #[test]
    fn product_norm_identity() {
        let id = Mat::<f64>::identity(4, 4);
        let r = product_norm_check(id.as_ref(), id.as_ref(), 2.0, 2.0).unwrap();
        assert_abs_diff_eq!(r.r, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.check.lhs, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.check.rhs, 8.0, epsilon = 1e-12);
        assert!(r.check.holds);
        assert!(matches!(
            product_norm_check(id.as_ref(), id.as_ref(), 0.0, 2.0),
            Err(LabError::Parameter(_))
        ));
    }

    #[test]
    fn product_norm_rank_one_closed_form() {
        // A = u v^T, B = v w^T: AB = |v|^2 u w^T has one singular value |v|^2 |u| |w|.
        let u = [1.0, -2.0, 0.5];
        let v = [0.3, 1.0, 2.0];
        let w = [2.0, 0.0, -1.0];
        let norm = |x: &[f64]| x.iter().map(|t| t * t).sum::<f64>().sqrt();
        let a = Mat::from_fn(3, 3, |i, j| u[i] * v[j]);
        let b = Mat::from_fn(3, 3, |i, j| v[i] * w[j]);
        let r = product_norm_check(a.as_ref(), b.as_ref(), 1.0, 2.0).unwrap();
        let expected = norm(&v).powi(2) * norm(&u) * norm(&w);
        // Rounding-level singular values enter the r = 2/3 quasi-norm at about 1e-11 relative.
        assert_abs_diff_eq!(r.check.lhs, expected, epsilon = 1e-9 * expected);
        let rhs = 2f64.powf(1.0 / r.r) * norm(&u) * norm(&v) * norm(&v) * norm(&w);
        assert_abs_diff_eq!(r.check.rhs, rhs, epsilon = 1e-12);
        assert!(r.check.holds);
    }

    #[test]
    fn tail_fit_exact_power_law() {
        let s = spectrum(&(1..=200).map(|k| (k as f64).powi(-2)).collect::<Vec<_>>());
        let fit = fit_tail_exponent(&s, 10).unwrap();
        assert_abs_diff_eq!(fit.exponent, 2.0, epsilon = 1e-6);
        assert!(!fit.super_polynomial);
        assert_eq!((fit.k_min, fit.k_max, fit.points), (10, 200, 191));
    }

    #[test]
    fn tail_fit_perturbed_power_law() {
        let v: Vec<f64> = (1..=400)
            .map(|k| {
                let k = k as f64;
                (1.0 + 0.01 * k.sin()) / k
            })
            .collect();
        let fit = fit_tail_exponent(&spectrum(&v), 10).unwrap();
        assert!((fit.exponent - 1.0).abs() < 0.02, "{fit:?}");
        assert!(!fit.super_polynomial);
    }

    #[test]
    fn tail_fit_flags_geometric_decay() {
        let s = spectrum(&(1..=60).map(|k| 0.5f64.powi(k)).collect::<Vec<_>>());
        let early = fit_tail_exponent(&s, 5).unwrap();
        let late = fit_tail_exponent(&s, 20).unwrap();
        assert!(early.super_polynomial && late.super_polynomial);
        assert!(late.exponent > early.exponent);
        // Values below 1e-12 s_1 (k > 40) are ignored.
        assert!(late.k_max <= 40);
    }

    #[test]
    fn tail_fit_degenerate() {
        let s = spectrum(&[1.0, 0.5, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(fit_tail_exponent(&s, 1), Err(LabError::Degenerate(_))));
        assert!(matches!(fit_tail_exponent(&s, 0), Err(LabError::Parameter(_))));
    }
}
