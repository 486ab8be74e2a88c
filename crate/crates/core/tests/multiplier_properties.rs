mod common;

use common::*;
use rand::Rng;
use schatten_core::kernel::{build_torus_kernel, DiscretizedKernel};
use schatten_core::multiplier::*;
use schatten_core::spectral::schatten_norm;
use schatten_core::Grid;

#[test]
fn symbol_application_commutes_across_axes() {
    let mut r = rng(41);
    for trial in 0..50 {
        let (k, ex, ey) = if trial % 2 == 0 {
            let radius = r.random_range(1..=12);
            let g = Grid::lattice(1, radius).unwrap();
            let n = g.len();
            let k = DiscretizedKernel::new(g.clone(), g.clone(), complex_matrix(&mut r, n, n)).unwrap();
            let ex = lattice_weight_symbol(r.random_range(0.0..2.0), &g).unwrap();
            let ey = lattice_weight_symbol(r.random_range(0.0..2.0), &g).unwrap();
            (k, ex, ey)
        } else {
            let n = r.random_range(4..=24);
            let (a, b) = (r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
            let k = build_torus_kernel(move |x, y| (a * x[0]).sin() * (y[0] + b).cos() + a * b, 1, 1, n).unwrap();
            let g = k.row_grid().clone();
            let ex = torus_bessel_symbol(r.random_range(0.0..2.0), &g).unwrap();
            let ey = torus_bessel_symbol(r.random_range(0.0..2.0), &g).unwrap();
            (k, ex, ey)
        };
        let xy = apply_symbol(&apply_symbol(&k, &ex, Axis::X).unwrap(), &ey, Axis::Y).unwrap();
        let yx = apply_symbol(&apply_symbol(&k, &ey, Axis::Y).unwrap(), &ex, Axis::X).unwrap();
        let diff = (xy.values() - yx.values()).norm_max();
        assert!(diff <= 1e-10, "trial {trial}: {diff}");
    }
}

#[test]
fn two_dimensional_torus_symbol_round_trip() {
    let k = build_torus_kernel(|x, y| (x[0] - 2.0 * x[1]).cos() * (y[0] + y[1]).sin(), 2, 2, 8).unwrap();
    let e = torus_bessel_symbol(2.0, k.row_grid()).unwrap();
    // cos(ξ·x) with ξ = (1, -2) is an eigenfunction with eigenvalue 1 + 1 + 4.
    let out = apply_symbol(&k, &e, Axis::X).unwrap();
    let scaled = schatten_core::Mat::from_fn(64, 64, |i, j| k.values()[(i, j)] * 6.0);
    let diff = (out.values() - &scaled).norm_max();
    assert!(diff < 1e-10, "{diff}");
}

#[test]
fn sobolev_inclusions_on_frequency_grid() {
    let orders = [0.5, 1.0, 2.0];
    for &mu1 in &orders {
        for &mu2 in &orders {
            let c = sobolev_inclusion_constants(64, mu1, mu2).unwrap();
            assert!(c.lower <= 1.0 + 1e-12, "{c:?}");
            assert!(c.upper <= 1.0 + 1e-12, "{c:?}");
        }
    }
}

#[test]
fn oscillator_spectra_ordered_by_potential() {
    // On [-1, 1] the potential |x|^a decreases in a, and so does every eigenvalue.
    let spectra: Vec<Vec<f64>> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&a| discretize_anharmonic(a, 1.0, 256).unwrap().eigenvalues()[..64].to_vec())
        .collect();
    for pair in spectra.windows(2) {
        for (hi, lo) in pair[0].iter().zip(&pair[1]) {
            assert!(*lo <= hi + 1e-8);
        }
    }
}

fn inverse_norm_change(small: &DiagonalSymbol, large: &DiagonalSymbol) -> f64 {
    let q = inverse_schatten_threshold(small).unwrap() + 0.2;
    let a = schatten_norm(&small.inverse_spectrum().unwrap(), q).unwrap();
    let b = schatten_norm(&large.inverse_spectrum().unwrap(), q).unwrap();
    assert!(a.is_finite() && b.is_finite());
    (b - a).abs() / b
}

#[test]
fn inverse_schatten_norms_stable_under_doubling() {
    let lat = |r| lattice_weight_symbol(1.0, &Grid::lattice(1, r).unwrap()).unwrap();
    assert!(inverse_norm_change(&lat(1000), &lat(2000)) < 0.05);
    let tor = |n| torus_bessel_symbol(1.0, &Grid::torus(1, n).unwrap()).unwrap();
    assert!(inverse_norm_change(&tor(512), &tor(1024)) < 0.05);
    let small = discretize_anharmonic(2.0, 25.0, 2048).unwrap();
    let large = discretize_anharmonic(2.0, 25.0 * 2f64.sqrt(), 2048).unwrap();
    assert!(large.trusted_eigenvalues().len() >= 2 * small.trusted_eigenvalues().len() - 2);
    assert!(inverse_norm_change(&small, &large) < 0.05);
}
