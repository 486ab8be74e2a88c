//! Diagonal operators `E`: lattice weights, torus Bessel-potential multipliers
//! and discretized anharmonic oscillators, plus eigenvalue counting fits.

use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{input, parameter, LabError, Result};
use crate::fit::least_squares;
use crate::kernel::{DiscretizedKernel, Grid, GridKind};
use crate::spectral::{hermitian_eigenvalues, SingularSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisTag {
    LatticeSite,
    FourierMode,
    OscillatorEigenfunction,
}

impl BasisTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BasisTag::LatticeSite => "lattice-site",
            BasisTag::FourierMode => "fourier-mode",
            BasisTag::OscillatorEigenfunction => "oscillator-eigenfunction",
        }
    }
}

/// Which kernel variable a symbol acts on: `x` indexes rows, `y` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Eigenvalues of an operator diagonal in a tagged basis.
///
/// Lattice and Fourier symbols are aligned with the point order of the grid
/// they were built for; oscillator symbols are sorted ascending. Eigenvalues
/// up to `trusted_max` are considered faithful to the continuum operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSymbol {
    basis_tag: BasisTag,
    eigenvalues: Vec<f64>,
    label: String,
    dimension: usize,
    trusted_max: f64,
}

impl DiagonalSymbol {
    /// A symbol from explicit eigenvalues, all of them trusted.
    pub fn from_eigenvalues(basis_tag: BasisTag, eigenvalues: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let top = eigenvalues.iter().copied().fold(0.0, f64::max);
        Self::build(basis_tag, eigenvalues, label.into(), 1, top)
    }

    fn build(
        basis_tag: BasisTag,
        eigenvalues: Vec<f64>,
        label: String,
        dimension: usize,
        trusted_max: f64,
    ) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(input("symbol has no eigenvalues"));
        }
        if let Some(i) = eigenvalues.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(input(format!(
                "symbol eigenvalue {i} is {} (must be positive)",
                eigenvalues[i]
            )));
        }
        Ok(Self {
            basis_tag,
            eigenvalues,
            label,
            dimension,
            trusted_max,
        })
    }

    pub fn basis_tag(&self) -> BasisTag {
        self.basis_tag
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn trusted_max(&self) -> f64 {
        self.trusted_max
    }

    /// Trusted eigenvalues in ascending order.
    pub fn trusted_eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .eigenvalues
            .iter()
            .copied()
            .filter(|&x| x <= self.trusted_max)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Singular values of `E⁻¹` over the trusted range.
    pub fn inverse_spectrum(&self) -> Result<SingularSpectrum> {
        SingularSpectrum::new(
            self.trusted_eigenvalues().iter().map(|x| x.recip()).collect(),
            "inverse-symbol",
        )
    }

    /// CSV `index,eigenvalue` preceded by comment lines naming the basis and label.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# basis_tag: {}", self.basis_tag.as_str());
        let _ = writeln!(out, "# label: {}", self.label);
        out.push_str("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "{i},{v}");
        }
        out
    }
}

/// `(1+|k|)^α` at every site of a lattice grid, `|k|` Euclidean.
pub fn lattice_weight_symbol(alpha: f64, grid: &Grid) -> Result<DiagonalSymbol> {
    if !(alpha >= 0.0) {
        return Err(parameter(format!("weight exponent must be >= 0, got {alpha}")));
    }
    if grid.kind() != GridKind::Lattice {
        return Err(LabError::Incompatible("lattice weights need a lattice grid".into()));
    }
    let eig = grid
        .points()
        .iter()
        .map(|p| (1.0 + p.iter().map(|c| c * c).sum::<f64>().sqrt()).powf(alpha))
        .collect();
    // Every site with |k| <= radius of the inscribed ball is present.
    let lo = grid.origin();
    let hi = lo + grid.axis_points() as i64 - 1;
    let radius = lo.abs().min(hi.abs()) as f64;
    let trusted = (1.0 + radius).powf(alpha);
    DiagonalSymbol::build(
        BasisTag::LatticeSite,
        eig,
        format!("(1+|k|)^{alpha} on Z^{}", grid.dimension()),
        grid.dimension(),
        trusted,
    )
}

/// Integer frequency of DFT index `m` on an `n`-point axis, in `-⌊n/2⌋..⌈n/2⌉-1`.
pub fn aliased_frequency(m: usize, n: usize) -> i64 {
    if m < n.div_ceil(2) {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// `(1+|ξ|²)^{μ/2}` for every DFT mode of a torus grid, in the grid's
/// lexicographic order.
pub fn torus_bessel_symbol(mu: f64, grid: &Grid) -> Result<DiagonalSymbol> {
    if !(mu >= 0.0) {
        return Err(parameter(format!("Bessel order must be >= 0, got {mu}")));
    }
    if grid.kind() != GridKind::Torus {
        return Err(LabError::Incompatible("Bessel multipliers need a torus grid".into()));
    }
    let n = grid.axis_points();
    let d = grid.dimension();
    let eig = (0..grid.len())
        .map(|mut idx| {
            let mut norm2 = 0.0;
            for _ in 0..d {
                let xi = aliased_frequency(idx % n, n) as f64;
                norm2 += xi * xi;
                idx /= n;
            }
            (1.0 + norm2).powf(mu / 2.0)
        })
        .collect();
    let radius = (n.div_ceil(2) - 1) as f64;
    DiagonalSymbol::build(
        BasisTag::FourierMode,
        eig,
        format!("(1+|xi|^2)^({mu}/2) on T^{d}"),
        d,
        (1.0 + radius * radius).powf(mu / 2.0),
    )
}

struct OscillatorGrid {
    h: f64,
    x: Vec<f64>,
}

fn oscillator_grid(l: f64, n: usize) -> Result<OscillatorGrid> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(parameter(format!("half-width must be positive, got {l}")));
    }
    if n < 64 {
        return Err(parameter(format!("oscillator discretization needs N >= 64, got {n}")));
    }
    let h = 2.0 * l / (n + 1) as f64;
    let x = (0..n).map(|i| -l + (i + 1) as f64 * h).collect();
    Ok(OscillatorGrid { h, x })
}

fn oscillator_symbol(matrix: Mat<f64>, boundary_potential: f64, n: usize, label: String) -> Result<DiagonalSymbol> {
    let eig = hermitian_eigenvalues(matrix.as_ref())?;
    // Lower quarter, further restricted to eigenvalues well below the wall height.
    let cap = boundary_potential / 3.0;
    let count = eig.iter().take(n / 4).take_while(|&&v| v <= cap).count();
    // With no eigenvalue below the cap nothing is trusted and counting fits fail.
    let trusted = if count == 0 { 0.0 } else { eig[count - 1] };
    DiagonalSymbol::build(BasisTag::OscillatorEigenfunction, eig, label, 1, trusted)
}

/// Eigenvalues of the central-difference discretization of `-d²/dx² + |x|^a`
/// on `[-L, L]` with Dirichlet ends, ascending.
pub fn discretize_anharmonic(a: f64, l: f64, n: usize) -> Result<DiagonalSymbol> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(parameter(format!("potential exponent must be positive, got {a}")));
    }
    let g = oscillator_grid(l, n)?;
    let inv_h2 = 1.0 / (g.h * g.h);
    let mut m = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 2.0 * inv_h2 + g.x[i].abs().powf(a);
        if i + 1 < n {
            m[(i, i + 1)] = -inv_h2;
            m[(i + 1, i)] = -inv_h2;
        }
    }
    oscillator_symbol(m, l.powf(a), n, format!("-d^2/dx^2 + |x|^{a} on [-{l}, {l}], N={n}"))
}

/// Eigenvalues of `(-Δ_h)^k + |x|^{2ℓ}` with `Δ_h` the Dirichlet
/// central-difference Laplacian on `[-L, L]`.
pub fn discretize_higher_anharmonic(k: u32, ell: u32, l: f64, n: usize) -> Result<DiagonalSymbol> {
    if k == 0 || ell == 0 {
        return Err(parameter(format!("k and ell must be >= 1, got ({k}, {ell})")));
    }
    let g = oscillator_grid(l, n)?;
    let inv_h2 = 1.0 / (g.h * g.h);
    let (diag, off) = (2.0 * inv_h2, -inv_h2);
    let mut p = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        p[(i, i)] = diag;
        if i + 1 < n {
            p[(i, i + 1)] = off;
            p[(i + 1, i)] = off;
        }
    }
    for power in 1..k as usize {
        // P·T for tridiagonal T; row i of P has nonzeros only within |i-j| <= power.
        let mut next = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            let lo = i.saturating_sub(power + 1);
            let hi = (i + power + 1).min(n - 1);
            for j in lo..=hi {
                let mut v = p[(i, j)] * diag;
                if j > 0 {
                    v += p[(i, j - 1)] * off;
                }
                if j + 1 < n {
                    v += p[(i, j + 1)] * off;
                }
                next[(i, j)] = v;
            }
        }
        p = next;
    }
    for i in 0..n {
        p[(i, i)] += g.x[i].abs().powi(2 * ell as i32);
    }
    oscillator_symbol(
        p,
        l.powi(2 * ell as i32),
        n,
        format!("(-d^2/dx^2)^{k} + |x|^{} on [-{l}, {l}], N={n}", 2 * ell),
    )
}

/// Worst-case constants in the pointwise multiplier inclusions
/// `(1+|ξ|²+|η|²)^{min(μ₁,μ₂)/2} ≤ c_lo·(1+|ξ|²)^{μ₂/2}(1+|η|²)^{μ₁/2}` and
/// `(1+|ξ|²)^{μ₂/2}(1+|η|²)^{μ₁/2} ≤ c_hi·(1+|ξ|²+|η|²)^{(μ₁+μ₂)/2}`
/// over the frequency grid `ξ, η ∈ -⌊n/2⌋..⌈n/2⌉-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InclusionConstants {
    pub mu1: f64,
    pub mu2: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn sobolev_inclusion_constants(n: usize, mu1: f64, mu2: f64) -> Result<InclusionConstants> {
    if !(mu1 >= 0.0 && mu2 >= 0.0) {
        return Err(parameter(format!("orders must be >= 0, got ({mu1}, {mu2})")));
    }
    if n == 0 {
        return Err(parameter("frequency grid is empty"));
    }
    let (mut lower, mut upper) = (0.0f64, 0.0f64);
    let low = mu1.min(mu2);
    for a in 0..n {
        let xi2 = (aliased_frequency(a, n) as f64).powi(2);
        for b in 0..n {
            let eta2 = (aliased_frequency(b, n) as f64).powi(2);
            let mixed = (1.0 + xi2).powf(mu2 / 2.0) * (1.0 + eta2).powf(mu1 / 2.0);
            let total = 1.0 + xi2 + eta2;
            lower = lower.max(total.powf(low / 2.0) / mixed);
            upper = upper.max(mixed / total.powf((mu1 + mu2) / 2.0));
        }
    }
    Ok(InclusionConstants { mu1, mu2, lower, upper })
}

fn check_compatible(symbol: &DiagonalSymbol, grid: &Grid) -> Result<()> {
    let ok = match symbol.basis_tag {
        BasisTag::LatticeSite => grid.kind() == GridKind::Lattice,
        BasisTag::FourierMode => grid.kind() == GridKind::Torus && grid.dimension() == symbol.dimension,
        BasisTag::OscillatorEigenfunction => false,
    };
    if !ok || symbol.eigenvalues.len() != grid.len() {
        return Err(LabError::Incompatible(format!(
            "{} symbol with {} eigenvalues does not fit a {} grid of {} points",
            symbol.basis_tag.as_str(),
            symbol.eigenvalues.len(),
            grid.kind().as_str(),
            grid.len()
        )));
    }
    Ok(())
}

/// In-place multi-dimensional DFT of a lexicographically ordered `n^d` array.
pub(crate) fn fft_nd(buf: &mut [C64], d: usize, n: usize, planner: &mut FftPlanner<f64>, inverse: bool) {
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![C64::new(0.0, 0.0); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..buf.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (t, v) in line.iter_mut().enumerate() {
                    *v = buf[base + t * stride];
                }
                fft.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    buf[base + t * stride] = *v;
                }
            }
        }
    }
}

/// Applies `E` to the kernel as a function of `x` (each column) or `y`
/// (each row).
pub fn apply_symbol(k: &DiscretizedKernel, e: &DiagonalSymbol, axis: Axis) -> Result<DiscretizedKernel> {
    let grid = match axis {
        Axis::X => k.row_grid(),
        Axis::Y => k.col_grid(),
    };
    check_compatible(e, grid)?;
    let v = k.values();
    let (rows, cols) = (v.nrows(), v.ncols());
    let lam = &e.eigenvalues;
    let out = match e.basis_tag {
        BasisTag::LatticeSite => match axis {
            Axis::X => Mat::from_fn(rows, cols, |i, j| v[(i, j)] * lam[i]),
            Axis::Y => Mat::from_fn(rows, cols, |i, j| v[(i, j)] * lam[j]),
        },
        _ => {
            let (d, n) = (grid.dimension(), grid.axis_points());
            let scale = 1.0 / grid.len() as f64;
            let mut planner = FftPlanner::new();
            let mut out = Mat::<C64>::zeros(rows, cols);
            let lines = if axis == Axis::X { cols } else { rows };
            let mut buf = vec![C64::new(0.0, 0.0); grid.len()];
            for l in 0..lines {
                for (t, b) in buf.iter_mut().enumerate() {
                    *b = if axis == Axis::X { v[(t, l)] } else { v[(l, t)] };
                }
                fft_nd(&mut buf, d, n, &mut planner, false);
                for (b, &w) in buf.iter_mut().zip(lam) {
                    *b *= w * scale;
                }
                fft_nd(&mut buf, d, n, &mut planner, true);
                for (t, b) in buf.iter().enumerate() {
                    if axis == Axis::X {
                        out[(t, l)] = *b;
                    } else {
                        out[(l, t)] = *b;
                    }
                }
            }
            out
        }
    };
    Ok(k.with_values(out))
}

/// Fitted bound `N(λ) ≤ C(1+λ)^p` on the eigenvalue counting function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingFit {
    pub exponent_p: f64,
    /// Fitted constant inflated by 5%, raised further if the recheck needed it.
    pub constant_c: f64,
    pub lambda_range: (f64, f64),
    pub residual: f64,
    /// Whether the 5%-inflated constant already bounded every sampled count.
    pub inflated_bound_held: bool,
}

/// Minimum number of trusted eigenvalues for a counting fit.
pub const MIN_COUNTING_POINTS: usize = 50;

/// Least-squares fit of `log N(λ)` against `log(1+λ)` over the upper decade
/// of trusted eigenvalues not exceeding `lambda_max`.
pub fn fit_counting(e: &DiagonalSymbol, lambda_max: f64) -> Result<CountingFit> {
    let eig: Vec<f64> = e
        .trusted_eigenvalues()
        .into_iter()
        .filter(|&v| v <= lambda_max)
        .collect();
    if eig.len() < MIN_COUNTING_POINTS {
        return Err(LabError::Degenerate(format!(
            "{} trusted eigenvalues below {lambda_max}, need {MIN_COUNTING_POINTS}",
            eig.len()
        )));
    }
    // (λ, N(λ)) at each distinct eigenvalue.
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in eig.iter().enumerate() {
        let count = (i + 1) as f64;
        match samples.last_mut() {
            Some(last) if last.0 == v => last.1 = count,
            _ => samples.push((v, count)),
        }
    }
    let top = samples.last().unwrap().0;
    let window: Vec<&(f64, f64)> = samples.iter().filter(|(v, _)| *v >= top / 10.0).collect();
    if window.len() < 2 {
        return Err(LabError::Degenerate(format!(
            "only {} distinct eigenvalues in [{}, {top}]",
            window.len(),
            top / 10.0
        )));
    }
    let xs: Vec<f64> = window.iter().map(|(v, _)| (1.0 + v).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|(_, n)| n.ln()).collect();
    let fit = least_squares(&xs, &ys);
    let p = fit.slope;
    if !(p > 0.0) {
        return Err(LabError::Degenerate(format!("counting exponent {p} is not positive")));
    }
    let inflated = 1.05 * fit.intercept.exp();
    let worst = samples.iter().map(|(v, n)| n / (1.0 + v).powf(p)).fold(0.0, f64::max);
    Ok(CountingFit {
        exponent_p: p,
        constant_c: inflated.max(worst),
        lambda_range: (window[0].0, top),
        residual: fit.rms,
        inflated_bound_held: worst <= inflated,
    })
}

/// The fitted counting exponent over all trusted eigenvalues: `E⁻¹ ∈ S_q`
/// is expected for every `q` above it.
pub fn inverse_schatten_threshold(e: &DiagonalSymbol) -> Result<f64> {
    Ok(fit_counting(e, e.trusted_max)?.exponent_p)
}
