//! Numerical laboratory for Schatten–von Neumann properties of integral operators.
//!
//! Kernels are sampled on tori, integer lattices and unions of intervals
//! ([`kernel`]), turned into weighted operator matrices and analysed through
//! their singular spectra ([`spectral`]). Regularity operators are realized as
//! diagonal symbols ([`multiplier`]); [`conditions`] turns their counting
//! exponents into predicted Schatten indices and decay rates and compares them
//! with measured spectra. [`trace`] cross-checks diagonal, cell-averaged and
//! eigenvalue traces, and [`carleman`] builds bounded convolution kernels whose
//! spectra escape every `S_p`, `p < 2`.

pub mod carleman;
pub mod conditions;
pub mod error;
mod fit;
pub mod kernel;
pub mod multiplier;
pub mod spectral;
pub mod trace;

pub use error::{LabError, Result};
pub use faer::{Mat, MatRef};
pub use num_complex::Complex64;

pub use carleman::CoefficientSequence;
pub use conditions::{MembershipReport, Verdict};
pub use kernel::{DiscretizedKernel, Grid, GridKind};
pub use multiplier::{Axis, BasisTag, CountingFit, DiagonalSymbol};
pub use spectral::{SingularSpectrum, TailFit, Tolerance};
pub use trace::{TraceFlag, TraceReport};
