//! Sampled integral kernels on tori, integer lattices and unions of intervals.
//!
//! A [`DiscretizedKernel`] stores kernel samples `K(x_i, y_j)` together with
//! the quadrature weights of both grids. The operator acting on
//! `L²(μ₁) → L²(μ₂)` is represented by `diag(√w₂)·K·diag(√w₁)`, whose singular
//! values approximate those of the integral operator.

use std::f64::consts::PI;
use std::fmt::Write as _;

use faer::Mat;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{input, parameter, LabError, Result};
use crate::spectral::{singular_values, SingularSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Torus,
    Lattice,
    IntervalUnion,
}

impl GridKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::Torus => "torus",
            GridKind::Lattice => "lattice",
            GridKind::IntervalUnion => "interval-union",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "torus" => Ok(GridKind::Torus),
            "lattice" => Ok(GridKind::Lattice),
            "interval-union" => Ok(GridKind::IntervalUnion),
            other => Err(input(format!("unknown grid kind `{other}`"))),
        }
    }
}

/// Quadrature nodes and weights of one measure space. Points are stored in
/// lexicographic order (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    kind: GridKind,
    dimension: usize,
    /// Points per axis for tori and lattices; total points for interval unions.
    axis_points: usize,
    /// Smallest lattice coordinate per axis (zero for other kinds).
    origin: i64,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

fn lexicographic(dimension: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(dimension as u32);
    (0..total).map(move |mut idx| {
        let mut digits = vec![0; dimension];
        for d in (0..dimension).rev() {
            digits[d] = idx % n;
            idx /= n;
        }
        digits
    })
}

impl Grid {
    /// Uniform grid on `[0, 2π)^dimension` with `n` points per axis.
    pub fn torus(dimension: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(parameter(format!("torus dimension must be 1 or 2, got {dimension}")));
        }
        if n == 0 {
            return Err(parameter("torus grid needs at least one point per axis"));
        }
        let h = 2.0 * PI / n as f64;
        let points: Vec<Vec<f64>> = lexicographic(dimension, n)
            .map(|m| m.into_iter().map(|i| i as f64 * h).collect())
            .collect();
        let weights = vec![h.powi(dimension as i32); points.len()];
        Ok(Self {
            kind: GridKind::Torus,
            dimension,
            axis_points: n,
            origin: 0,
            points,
            weights,
        })
    }

    /// Integer box `[-r, r]^dimension` with counting measure.
    pub fn lattice(dimension: usize, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(parameter("lattice truncation radius must be at least 1"));
        }
        Self::lattice_box(dimension, -(r as i64), r as i64)
    }

    /// Integer box `[lo, hi]^dimension` with counting measure.
    pub fn lattice_box(dimension: usize, lo: i64, hi: i64) -> Result<Self> {
        if dimension == 0 {
            return Err(parameter("lattice dimension must be positive"));
        }
        if hi < lo {
            return Err(parameter(format!("empty lattice box [{lo}, {hi}]")));
        }
        let n = (hi - lo + 1) as usize;
        let points: Vec<Vec<f64>> = lexicographic(dimension, n)
            .map(|m| m.into_iter().map(|i| (lo + i as i64) as f64).collect())
            .collect();
        let weights = vec![1.0; points.len()];
        Ok(Self {
            kind: GridKind::Lattice,
            dimension,
            axis_points: n,
            origin: lo,
            points,
            weights,
        })
    }

    /// Midpoint grid on a union of disjoint intervals with `n` cells in total,
    /// distributed in proportion to interval length.
    pub fn intervals(intervals: &[(f64, f64)], n: usize) -> Result<Self> {
        if intervals.is_empty() {
            return Err(input("no intervals given"));
        }
        let mut iv = intervals.to_vec();
        for &(a, b) in &iv {
            if !(a.is_finite() && b.is_finite()) || b <= a {
                return Err(input(format!("interval ({a}, {b}) is empty or not finite")));
            }
        }
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        for pair in iv.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(input(format!(
                    "intervals ({}, {}) and ({}, {}) overlap",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1
                )));
            }
        }
        if n < iv.len() {
            return Err(parameter(format!("{n} points cannot cover {} intervals", iv.len())));
        }
        let total: f64 = iv.iter().map(|(a, b)| b - a).sum();
        // Largest-remainder apportionment, at least one cell per interval.
        let ideal: Vec<f64> = iv.iter().map(|(a, b)| (b - a) / total * n as f64).collect();
        let mut counts: Vec<usize> = ideal.iter().map(|x| (x.floor() as usize).max(1)).collect();
        while counts.iter().sum::<usize>() > n {
            let i = (0..counts.len())
                .filter(|&i| counts[i] > 1)
                .min_by(|&i, &j| (ideal[i] - counts[i] as f64).total_cmp(&(ideal[j] - counts[j] as f64)))
                .expect("n >= number of intervals");
            counts[i] -= 1;
        }
        while counts.iter().sum::<usize>() < n {
            let i = (0..counts.len())
                .max_by(|&i, &j| (ideal[i] - counts[i] as f64).total_cmp(&(ideal[j] - counts[j] as f64)))
                .unwrap();
            counts[i] += 1;
        }
        let mut points = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (&(a, b), &m) in iv.iter().zip(&counts) {
            let h = (b - a) / m as f64;
            for i in 0..m {
                points.push(vec![a + (i as f64 + 0.5) * h]);
                weights.push(h);
            }
        }
        Ok(Self {
            kind: GridKind::IntervalUnion,
            dimension: 1,
            axis_points: n,
            origin: 0,
            points,
            weights,
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Points per axis (torus, lattice) or total points (interval union).
    pub fn axis_points(&self) -> usize {
        self.axis_points
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total measure.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn lattice_site(&self, i: usize) -> Vec<i64> {
        self.points[i].iter().map(|&c| c as i64).collect()
    }
}

/// Kernel samples on a pair of grids: rows follow the `x` variable (`Ω₂`),
/// columns the `y` variable (`Ω₁`).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedKernel {
    row_grid: Grid,
    col_grid: Grid,
    values: Mat<C64>,
}

impl DiscretizedKernel {
    pub fn new(row_grid: Grid, col_grid: Grid, values: Mat<C64>) -> Result<Self> {
        if values.nrows() != row_grid.len() || values.ncols() != col_grid.len() {
            return Err(input(format!(
                "kernel values are {}x{} but grids have {} and {} points",
                values.nrows(),
                values.ncols(),
                row_grid.len(),
                col_grid.len()
            )));
        }
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                let v = values[(i, j)];
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(input(format!(
                        "kernel sample at x={:?}, y={:?} is not finite",
                        row_grid.points[i], col_grid.points[j]
                    )));
                }
            }
        }
        Ok(Self {
            row_grid,
            col_grid,
            values,
        })
    }

    pub fn row_grid(&self) -> &Grid {
        &self.row_grid
    }

    pub fn col_grid(&self) -> &Grid {
        &self.col_grid
    }

    pub fn values(&self) -> &Mat<C64> {
        &self.values
    }

    pub fn into_values(self) -> Mat<C64> {
        self.values
    }

    /// Same grid on both sides.
    pub fn is_square(&self) -> bool {
        self.row_grid == self.col_grid
    }

    /// `diag(√w₂)·K·diag(√w₁)`.
    pub fn operator_matrix(&self) -> Mat<C64> {
        let rw: Vec<f64> = self.row_grid.weights.iter().map(|w| w.sqrt()).collect();
        let cw: Vec<f64> = self.col_grid.weights.iter().map(|w| w.sqrt()).collect();
        Mat::from_fn(self.values.nrows(), self.values.ncols(), |i, j| {
            self.values[(i, j)] * (rw[i] * cw[j])
        })
    }

    /// Singular values of the operator matrix.
    pub fn spectrum(&self) -> Result<SingularSpectrum> {
        singular_values(self.operator_matrix().as_ref())
    }

    pub(crate) fn with_values(&self, values: Mat<C64>) -> Self {
        Self {
            row_grid: self.row_grid.clone(),
            col_grid: self.col_grid.clone(),
            values,
        }
    }

    /// Text form: header lines describing both grids, then the values as
    /// row-major CSV with each entry written as `re,im`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let join = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let pts = |g: &Grid| {
            g.points
                .iter()
                .map(|p| p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let _ = writeln!(
            out,
            "kind,{},{}",
            self.row_grid.kind.as_str(),
            self.col_grid.kind.as_str()
        );
        let _ = writeln!(out, "dimension,{},{}", self.row_grid.dimension, self.col_grid.dimension);
        let _ = writeln!(
            out,
            "resolution,{},{}",
            self.row_grid.axis_points, self.col_grid.axis_points
        );
        let _ = writeln!(out, "origin,{},{}", self.row_grid.origin, self.col_grid.origin);
        let _ = writeln!(out, "row_weights,{}", join(&self.row_grid.weights));
        let _ = writeln!(out, "col_weights,{}", join(&self.col_grid.weights));
        let _ = writeln!(out, "row_points,{}", pts(&self.row_grid));
        let _ = writeln!(out, "col_points,{}", pts(&self.col_grid));
        let _ = writeln!(out, "values,{},{}", self.values.nrows(), self.values.ncols());
        for i in 0..self.values.nrows() {
            let row: Vec<String> = (0..self.values.ncols())
                .map(|j| {
                    let v = self.values[(i, j)];
                    format!("{},{}", v.re, v.im)
                })
                .collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Parses the format written by [`DiscretizedKernel::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut field = |name: &str| -> Result<Vec<String>> {
            let line = lines.next().ok_or_else(|| input(format!("missing `{name}` line")))?;
            let mut parts = line.split(',');
            if parts.next() != Some(name) {
                return Err(input(format!("expected `{name}` line, found `{line}`")));
            }
            Ok(parts.map(str::to_owned).collect())
        };
        let num = |s: &str| -> Result<f64> { s.trim().parse().map_err(|e| input(format!("`{s}`: {e}"))) };
        let int = |s: &str| -> Result<i64> { s.trim().parse().map_err(|e| input(format!("`{s}`: {e}"))) };
        let pair = |v: Vec<String>, name: &str| -> Result<[String; 2]> {
            <[String; 2]>::try_from(v).map_err(|_| input(format!("`{name}` needs two entries")))
        };

        let kinds = pair(field("kind")?, "kind")?;
        let dims = pair(field("dimension")?, "dimension")?;
        let res = pair(field("resolution")?, "resolution")?;
        let origins = pair(field("origin")?, "origin")?;
        let weights = [field("row_weights")?, field("col_weights")?];
        let points = [field("row_points")?, field("col_points")?];
        let shape = pair(field("values")?, "values")?;

        let mut grids = Vec::with_capacity(2);
        for side in 0..2 {
            let w: Vec<f64> = weights[side].iter().map(|s| num(s)).collect::<Result<_>>()?;
            let p: Vec<Vec<f64>> = points[side]
                .iter()
                .map(|s| s.split(';').map(num).collect::<Result<Vec<f64>>>())
                .collect::<Result<_>>()?;
            if w.len() != p.len() || w.iter().any(|x| !(*x > 0.0)) {
                return Err(input("grid weights must be positive and match the points"));
            }
            grids.push(Grid {
                kind: GridKind::parse(&kinds[side])?,
                dimension: int(&dims[side])? as usize,
                axis_points: int(&res[side])? as usize,
                origin: int(&origins[side])?,
                points: p,
                weights: w,
            });
        }
        let (rows, cols) = (int(&shape[0])? as usize, int(&shape[1])? as usize);
        let mut values = Mat::<C64>::zeros(rows, cols);
        for i in 0..rows {
            let line = lines.next().ok_or_else(|| input(format!("missing value row {i}")))?;
            let nums: Vec<f64> = line.split(',').map(num).collect::<Result<_>>()?;
            if nums.len() != 2 * cols {
                return Err(input(format!(
                    "value row {i} has {} fields, expected {}",
                    nums.len(),
                    2 * cols
                )));
            }
            for j in 0..cols {
                values[(i, j)] = C64::new(nums[2 * j], nums[2 * j + 1]);
            }
        }
        let col = grids.pop().unwrap();
        let row = grids.pop().unwrap();
        Self::new(row, col, values)
    }
}

fn sample<F, T>(row_grid: Grid, col_grid: Grid, f: F) -> Result<DiscretizedKernel>
where
    F: Fn(usize, usize) -> T,
    T: Into<C64>,
{
    let values = Mat::from_fn(row_grid.len(), col_grid.len(), |i, j| f(i, j).into());
    DiscretizedKernel::new(row_grid, col_grid, values)
}

/// Samples `f(x, y)` on uniform torus grids with `n` points per axis.
pub fn build_torus_kernel<F, T>(f: F, row_dimension: usize, col_dimension: usize, n: usize) -> Result<DiscretizedKernel>
where
    F: Fn(&[f64], &[f64]) -> T,
    T: Into<C64>,
{
    if n < 4 {
        return Err(parameter(format!("torus kernels need N >= 4, got {n}")));
    }
    let rows = Grid::torus(row_dimension, n)?;
    let cols = Grid::torus(col_dimension, n)?;
    let (rp, cp) = (rows.points.clone(), cols.points.clone());
    sample(rows, cols, |i, j| f(&rp[i], &cp[j]))
}

/// Samples `f(k, l)` on the integer boxes `[-r, r]^d`.
pub fn build_lattice_kernel<F, T>(
    f: F,
    row_dimension: usize,
    col_dimension: usize,
    r: usize,
) -> Result<DiscretizedKernel>
where
    F: Fn(&[i64], &[i64]) -> T,
    T: Into<C64>,
{
    build_lattice_kernel_on(f, Grid::lattice(row_dimension, r)?, Grid::lattice(col_dimension, r)?)
}

/// Samples `f(k, l)` on arbitrary lattice grids.
pub fn build_lattice_kernel_on<F, T>(f: F, row_grid: Grid, col_grid: Grid) -> Result<DiscretizedKernel>
where
    F: Fn(&[i64], &[i64]) -> T,
    T: Into<C64>,
{
    if row_grid.kind != GridKind::Lattice || col_grid.kind != GridKind::Lattice {
        return Err(LabError::Incompatible("lattice kernels need lattice grids".into()));
    }
    let rs: Vec<Vec<i64>> = (0..row_grid.len()).map(|i| row_grid.lattice_site(i)).collect();
    let cs: Vec<Vec<i64>> = (0..col_grid.len()).map(|j| col_grid.lattice_site(j)).collect();
    sample(row_grid, col_grid, |i, j| f(&rs[i], &cs[j]))
}

/// A convolution kernel together with the spectrum its circulant structure predicts.
#[derive(Debug, Clone)]
pub struct ConvolutionKernel {
    pub kernel: DiscretizedKernel,
    /// Sorted moduli of the coefficients.
    pub exact_spectrum: SingularSpectrum,
}

/// Kernel `K(θ, φ) = ϰ(θ - φ)` with `ϰ(x) = (2π)^{-1} Σ_{|k|≤N} c_k e^{ikx}`,
/// sampled on the torus grid of `2N + 1` points. The operator `f ↦ f * ϰ`
/// has eigenvalue `c_k` on `e^{ikθ}`.
///
/// `coefficients[i]` holds `c_{i - N}`.
pub fn build_convolution_kernel(coefficients: &[C64]) -> Result<ConvolutionKernel> {
    let m = coefficients.len();
    if m % 2 == 0 {
        return Err(input(format!(
            "coefficients must be indexed -N..N (odd length), got {m}"
        )));
    }
    if let Some(k) = coefficients
        .iter()
        .position(|c| !(c.re.is_finite() && c.im.is_finite()))
    {
        return Err(input(format!(
            "coefficient c_{} is not finite",
            k as i64 - (m / 2) as i64
        )));
    }
    let n = (m / 2) as i64;
    // ϰ(2π t/m) = (2π)^{-1} Σ_k c_k e^{2πi k t/m}: an unnormalized inverse DFT.
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for (i, &c) in coefficients.iter().enumerate() {
        let k = i as i64 - n;
        buf[k.rem_euclid(m as i64) as usize] = c;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / (2.0 * PI);
    let kappa: Vec<C64> = buf.into_iter().map(|v| v * scale).collect();

    let grid = Grid::torus(1, m)?;
    let values = Mat::from_fn(m, m, |i, j| kappa[(i + m - j) % m]);
    let kernel = DiscretizedKernel::new(grid.clone(), grid, values)?;
    let exact_spectrum = SingularSpectrum::new(coefficients.iter().map(|c| c.norm()).collect(), "circulant-moduli")?;
    Ok(ConvolutionKernel { kernel, exact_spectrum })
}

/// `c_{α,n} = 2^{α-n} π^{-n/2} Γ(α/2) / Γ((n-α)/2)`.
pub fn riesz_constant(alpha: f64, n: usize) -> f64 {
    let n = n as f64;
    2f64.powf(alpha - n) * PI.powf(-n / 2.0) * gamma(alpha / 2.0) / gamma((n - alpha) / 2.0)
}

/// One-dimensional Riesz potential kernel `c_{α,1} |x - y|^{α-1}` on a union of
/// intervals. Off-diagonal entries are point samples; each diagonal entry is
/// the exact average of the singular kernel over its cell.
pub fn build_riesz_kernel(alpha: f64, intervals: &[(f64, f64)], n: usize) -> Result<DiscretizedKernel> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(parameter(format!("Riesz order must lie in (0, 1), got {alpha}")));
    }
    let grid = Grid::intervals(intervals, n)?;
    let c = riesz_constant(alpha, 1);
    let x: Vec<f64> = grid.points.iter().map(|p| p[0]).collect();
    let h = grid.weights.clone();
    sample(grid.clone(), grid, |i, j| {
        if i == j {
            // (1/h) ∫_{-h/2}^{h/2} |t|^{α-1} dt = (2/α)(h/2)^α / h
            c * (2.0 / alpha) * (h[i] / 2.0).powf(alpha) / h[i]
        } else {
            c * (x[i] - x[j]).abs().powf(alpha - 1.0)
        }
    })
}

/// `(Σ_ij w₂ᵢ w₁ⱼ |K_ij|²)^{1/2}`.
pub fn hilbert_schmidt_norm(k: &DiscretizedKernel) -> f64 {
    let (rw, cw) = (&k.row_grid.weights, &k.col_grid.weights);
    let mut sum = 0.0;
    for j in 0..k.values.ncols() {
        let mut col = 0.0;
        for i in 0..k.values.nrows() {
            col += rw[i] * k.values[(i, j)].norm_sqr();
        }
        sum += cw[j] * col;
    }
    sum.sqrt()
}

/// `(∫(∫|K(x,y)|^p dμ(x))^{q/p} dμ(y))^{1/q}`: inner norm over rows (`x`),
/// outer over columns (`y`). Either exponent may be `∞`.
pub fn mixed_norm(k: &DiscretizedKernel, p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(parameter(format!("mixed norm exponents must be >= 1, got ({p}, {q})")));
    }
    let (rw, cw) = (&k.row_grid.weights, &k.col_grid.weights);
    let inner: Vec<f64> = (0..k.values.ncols())
        .map(|j| {
            let col = (0..k.values.nrows()).map(|i| (rw[i], k.values[(i, j)].norm()));
            lp_norm(col, p)
        })
        .collect();
    Ok(lp_norm(cw.iter().copied().zip(inner), q))
}

fn lp_norm(items: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    let items: Vec<(f64, f64)> = items.collect();
    let top = items.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    if p.is_infinite() || top == 0.0 {
        return top;
    }
    let sum: f64 = items.iter().map(|(w, v)| w * (v / top).powf(p)).sum();
    top * sum.powf(1.0 / p)
}

/// `K*(x, y) = conj(K(y, x))`, with the grids swapped.
pub fn adjoint_kernel(k: &DiscretizedKernel) -> DiscretizedKernel {
    let values = Mat::from_fn(k.values.ncols(), k.values.nrows(), |i, j| k.values[(j, i)].conj());
    DiscretizedKernel {
        row_grid: k.col_grid.clone(),
        col_grid: k.row_grid.clone(),
        values,
    }
}
