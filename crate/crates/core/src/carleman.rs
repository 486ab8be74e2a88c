//! Bounded convolution kernels whose Fourier coefficients lie in `ℓ²` but in
//! no `ℓ^p` with `p < 2`.
//!
//! Block `n` occupies frequencies `[2^n, 2^{n+1})` and carries the
//! Rudin–Shapiro polynomial `P_n` scaled by `2^{-n/2} n^{-2}`. Since
//! `sup|P_n| ≤ 2^{(n+1)/2}`, each block contributes at most `√2 n^{-2}` to the
//! sup norm, while its `ℓ^p` mass is `2^{n(1-p/2)} n^{-2p}`.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{parameter, Result};
use crate::kernel::{build_convolution_kernel, ConvolutionKernel};

/// Largest Rudin–Shapiro level accepted (`2^26` coefficients per polynomial).
pub const MAX_LEVEL: u32 = 26;

/// Rudin–Shapiro pair `(P_n, Q_n)` of length `2^n`, built from
/// `P_1 = (1, 1)`, `Q_1 = (1, -1)` by `P_{n+1} = (P_n, Q_n)`, `Q_{n+1} = (P_n, -Q_n)`.
pub fn rudin_shapiro(n: u32) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > MAX_LEVEL {
        return Err(parameter(format!(
            "Rudin-Shapiro level must be in 1..={MAX_LEVEL}, got {n}"
        )));
    }
    let (mut p, mut q) = (vec![1.0, 1.0], vec![1.0, -1.0]);
    for _ in 1..n {
        let next_p: Vec<f64> = p.iter().chain(&q).copied().collect();
        let next_q: Vec<f64> = p.iter().copied().chain(q.iter().map(|v| -v)).collect();
        p = next_p;
        q = next_q;
    }
    Ok((p, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    RudinShapiroBlocks,
}

/// Fourier coefficients `c_k`, `k = 0..2^{B+1}`, of the block construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    coefficients: Vec<C64>,
    block_count: u32,
    construction: Construction,
}

/// Common modulus `2^{-n/2} n^{-2}` of the coefficients in block `n`.
pub fn block_modulus(n: u32) -> f64 {
    2f64.powf(-(n as f64) / 2.0) / (n as f64).powi(2)
}

/// Closed-form `ℓ^p` mass of block `n`: `2^{n(1-p/2)} n^{-2p}`.
pub fn block_lp_mass(n: u32, p: f64) -> f64 {
    let n_f = n as f64;
    2f64.powf(n_f * (1.0 - p / 2.0)) * n_f.powf(-2.0 * p)
}

/// `Σ_{n=1}^{B} 2^{n(1-p/2)} n^{-2p}`.
pub fn closed_form_lp_sum(p: f64, blocks: u32) -> f64 {
    (1..=blocks).map(|n| block_lp_mass(n, p)).sum()
}

/// Relative growth `(S(2B) - S(B)) / S(2B)` of the closed-form block series.
pub fn doubling_drift(p: f64, blocks: u32) -> f64 {
    let (s, s2) = (closed_form_lp_sum(p, blocks), closed_form_lp_sum(p, 2 * blocks));
    (s2 - s) / s2
}

/// Builds blocks `1..=B`.
pub fn carleman_coefficients(blocks: u32) -> Result<CoefficientSequence> {
    if blocks < 3 {
        return Err(parameter(format!("need at least 3 blocks, got {blocks}")));
    }
    let (p, _) = rudin_shapiro(blocks)?;
    let len = 1usize << (blocks + 1);
    let mut coefficients = vec![C64::new(0.0, 0.0); len];
    for n in 1..=blocks {
        let start = 1usize << n;
        let scale = block_modulus(n);
        // P_n is the leading 2^n entries of P_B.
        for (i, &sign) in p[..start].iter().enumerate() {
            coefficients[start + i] = C64::new(sign * scale, 0.0);
        }
    }
    Ok(CoefficientSequence {
        coefficients,
        block_count: blocks,
        construction: Construction::RudinShapiroBlocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub blocks: u32,
    pub p: f64,
    pub partial_sum: f64,
}

impl CoefficientSequence {
    /// `c_k` for `k = 0..=max_frequency`.
    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn block_count(&self) -> u32 {
        self.block_count
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn max_frequency(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Coefficients of block `n` (frequencies `2^n..2^{n+1}`).
    pub fn block(&self, n: u32) -> &[C64] {
        let start = 1usize << n;
        &self.coefficients[start..2 * start]
    }

    /// The sequence restricted to its first `blocks` blocks.
    pub fn truncated(&self, blocks: u32) -> Self {
        let blocks = blocks.min(self.block_count);
        Self {
            coefficients: self.coefficients[..1usize << (blocks + 1)].to_vec(),
            block_count: blocks,
            construction: self.construction,
        }
    }

    /// `Σ_{n ≤ b} Σ_{k ∈ block n} |c_k|^p` for `b = 1..=B`.
    pub fn lp_partial_sums(&self, p: f64) -> Vec<f64> {
        let mut acc = 0.0;
        (1..=self.block_count)
            .map(|n| {
                acc += self.block(n).iter().map(|c| c.norm().powf(p)).sum::<f64>();
                acc
            })
            .collect()
    }

    /// Rows `(b, p, Σ_{n≤b}|c|^p)` for every block count and exponent.
    pub fn divergence_table(&self, exponents: &[f64]) -> Vec<DivergenceRow> {
        let sums: Vec<Vec<f64>> = exponents.iter().map(|&p| self.lp_partial_sums(p)).collect();
        let mut rows = Vec::new();
        for b in 0..self.block_count as usize {
            for (i, &p) in exponents.iter().enumerate() {
                rows.push(DivergenceRow {
                    blocks: b as u32 + 1,
                    p,
                    partial_sum: sums[i][b],
                });
            }
        }
        rows
    }

    /// CSV `frequency,re,im` over the nonzero coefficients.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frequency,re,im\n");
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.norm() != 0.0 {
                let _ = writeln!(out, "{k},{},{}", c.re, c.im);
            }
        }
        out
    }
}

pub fn divergence_csv(rows: &[DivergenceRow]) -> String {
    let mut out = String::from("B,p,partial_sum\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.blocks, r.p, r.partial_sum);
    }
    out
}

/// Values of `Σ_k c_k e^{ikθ}` at `θ = 2πm/M`, `m = 0..M`.
fn circle_values(coefficients: &[C64], m: usize) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for (k, &c) in coefficients.iter().enumerate() {
        buf[k % m] += c;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

/// `max_m |Σ_k c_k e^{2πikm/M}|` over `M` uniform samples; `M` must be at
/// least four times the highest frequency.
pub fn sup_norm_estimate(c: &CoefficientSequence, samples: usize) -> Result<f64> {
    trig_sup(&c.coefficients, samples)
}

/// As [`sup_norm_estimate`] for raw coefficients `c_0, c_1, ...`.
pub fn trig_sup(coefficients: &[C64], samples: usize) -> Result<f64> {
    let top = coefficients.len().saturating_sub(1);
    if samples == 0 || samples < 4 * top {
        return Err(parameter(format!(
            "{samples} samples undersample frequency {top} (need at least {})",
            4 * top.max(1)
        )));
    }
    Ok(circle_values(coefficients, samples)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max))
}

/// Convolution operator retaining frequencies `0..=modes` of the sequence
/// (the kernel grid has `2·modes + 1` points).
pub fn carleman_operator(c: &CoefficientSequence, modes: usize) -> Result<ConvolutionKernel> {
    if modes == 0 || modes > c.max_frequency() {
        return Err(parameter(format!(
            "retained modes must be in 1..={}, got {modes}",
            c.max_frequency()
        )));
    }
    let mut two_sided = vec![C64::new(0.0, 0.0); 2 * modes + 1];
    two_sided[modes..].copy_from_slice(&c.coefficients[..=modes]);
    build_convolution_kernel(&two_sided)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rudin_shapiro_base_and_recursion() {
        let (p, q) = rudin_shapiro(1).unwrap();
        assert_eq!(p, vec![1.0, 1.0]);
        assert_eq!(q, vec![1.0, -1.0]);
        let (p2, q2) = rudin_shapiro(2).unwrap();
        assert_eq!(p2, vec![1.0, 1.0, 1.0, -1.0]);
        assert_eq!(q2, vec![1.0, 1.0, -1.0, 1.0]);
        assert!(rudin_shapiro(0).is_err());
        assert!(rudin_shapiro(MAX_LEVEL + 1).is_err());
    }

    #[test]
    fn rudin_shapiro_identity_on_circle() {
        for n in [1, 3, 6, 9] {
            let (p, q) = rudin_shapiro(n).unwrap();
            let as_c = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();
            let pv = circle_values(&as_c(&p), 1024);
            let qv = circle_values(&as_c(&q), 1024);
            let target = 2f64.powi(n as i32 + 1);
            for (a, b) in pv.iter().zip(&qv) {
                assert!((a.norm_sqr() + b.norm_sqr() - target).abs() < 1e-9);
                assert!(a.norm() <= target.sqrt() + 1e-6);
            }
        }
    }

    #[test]
    fn block_moduli() {
        let c = carleman_coefficients(5).unwrap();
        assert!(c.block(2).iter().all(|v| (v.norm() - 0.125).abs() < 1e-15));
        assert_eq!(c.block(2).len(), 4);
        assert_eq!(c.coefficients()[0], C64::new(0.0, 0.0));
        assert_eq!(c.coefficients()[1], C64::new(0.0, 0.0));
        assert!(carleman_coefficients(2).is_err());
    }

    #[test]
    fn lp_sums_match_closed_form() {
        let c = carleman_coefficients(12).unwrap();
        for p in [1.0, 1.5, 1.9, 2.0] {
            for (b, s) in c.lp_partial_sums(p).iter().enumerate() {
                let exact = closed_form_lp_sum(p, b as u32 + 1);
                assert!((s - exact).abs() <= 1e-12 * exact);
            }
        }
        let l2 = c.lp_partial_sums(2.0);
        for b in 10..12 {
            assert!(l2[b].sqrt() - l2[b - 1].sqrt() < 1e-3);
        }
    }

    #[test]
    fn drift_separates_divergent_series() {
        assert!(doubling_drift(1.9, 1000) > 0.05);
        assert!(doubling_drift(2.0, 1000) < 0.05);
    }

    #[test]
    fn sup_norm_examples() {
        let c = carleman_coefficients(8).unwrap();
        let m = 4 * c.max_frequency();
        for n in 1..=8 {
            let mut only = vec![C64::new(0.0, 0.0); c.coefficients().len()];
            let start = 1usize << n;
            only[start..2 * start].copy_from_slice(c.block(n));
            let sup = trig_sup(&only, m).unwrap();
            assert!(sup <= 2f64.sqrt() / (n * n) as f64 + 1e-12, "block {n}: {sup}");
        }
        let full = sup_norm_estimate(&c, m).unwrap();
        assert!(full < 2f64.sqrt() * std::f64::consts::PI.powi(2) / 6.0);
        assert_eq!(trig_sup(&[C64::new(0.0, 0.0); 9], 64).unwrap(), 0.0);
        assert!(sup_norm_estimate(&c, m - 1).is_err());
    }

    #[test]
    fn single_block_operator() {
        let c = carleman_coefficients(3).unwrap();
        let mut two_sided = vec![C64::new(0.0, 0.0); 15];
        two_sided[7 + 4..].copy_from_slice(c.block(2));
        let op = build_convolution_kernel(&two_sided).unwrap();
        let svd = op.kernel.spectrum().unwrap();
        for (i, s) in svd.values().iter().enumerate() {
            let expected = if i < 4 { 0.125 } else { 0.0 };
            assert_abs_diff_eq!(*s, expected, epsilon = 1e-12);
        }

        let full = carleman_operator(&c, 7).unwrap();
        let svd = full.kernel.spectrum().unwrap();
        for (a, b) in svd.values().iter().zip(full.exact_spectrum.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(carleman_operator(&c, c.max_frequency() + 1).is_err());
    }

    #[test]
    fn csv_outputs() {
        let c = carleman_coefficients(3).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("frequency,re,im\n2,"));
        assert_eq!(csv.lines().count(), 1 + 2 + 4 + 8);
        let rows = c.divergence_table(&[1.9, 2.0]);
        assert_eq!(rows.len(), 6);
        assert!(divergence_csv(&rows).starts_with("B,p,partial_sum\n1,1.9,"));
    }
}
