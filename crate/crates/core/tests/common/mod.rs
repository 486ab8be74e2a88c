#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schatten_core::{Complex64, Mat};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn real_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn complex_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat<Complex64> {
    Mat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn to_nalgebra(m: &Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn from_nalgebra(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Orthogonal factor of the QR decomposition of a random Gaussian-like matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Mat<f64> {
    let g = to_nalgebra(&real_matrix(rng, n, n));
    from_nalgebra(&g.qr().q())
}
