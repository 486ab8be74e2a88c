//! Fixed inputs shared by the benchmarks.

use schatten_core::kernel::{build_lattice_kernel, build_torus_kernel};
use schatten_core::{Complex64, DiscretizedKernel};

/// `exp(cos(x - y))` on an `n`-point torus.
pub fn smooth_torus_kernel(n: usize) -> DiscretizedKernel {
    build_torus_kernel(|x, y| (x[0] - y[0]).cos().exp(), 1, 1, n).expect("valid torus size")
}

/// Diagonal lattice kernel `(1+|k|)^{-gamma}` on `[-r, r]`.
pub fn diagonal_lattice_kernel(r: usize, gamma: f64) -> DiscretizedKernel {
    let d = |k: i64| (1.0 + k.unsigned_abs() as f64).powf(-gamma);
    build_lattice_kernel(|a, b| if a == b { d(a[0]) } else { 0.0 }, 1, 1, r).expect("valid radius")
}

/// Deterministic coefficients `c_k = e^{ik}/(1+|k|)` for `k = -modes..=modes`.
pub fn decaying_coefficients(modes: usize) -> Vec<Complex64> {
    (-(modes as i64)..=modes as i64)
        .map(|k| Complex64::from_polar(1.0 / (1.0 + k.unsigned_abs() as f64), k as f64))
        .collect()
}
