//! The fixed set of experiments, their citations and parameter schemas.

use crate::experiments::{self, Outcome};
use crate::CliError;

/// How a parameter value is checked before a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Real,
    /// A finite number, or `auto` to let the experiment choose.
    RealOrAuto,
    Count,
    RealList,
    /// `a:b[,c:d...]`
    Intervals,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: ParamKind,
    pub default: &'static str,
    pub help: &'static str,
}

pub type Runner = fn(&experiments::Params<'_>, u64) -> Result<Outcome, CliError>;

pub struct Entry {
    pub name: &'static str,
    pub citation: &'static str,
    pub params: &'static [ParamSpec],
    pub run: Runner,
}

const fn p(key: &'static str, kind: ParamKind, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        kind,
        default,
        help,
    }
}

use ParamKind::*;

const TRACE_KERNELS: &[&str] = &["cos-diff", "exp-cos", "zeroed-diagonal"];

/// Sorted by name.
pub static REGISTRY: &[Entry] = &[
    Entry {
        name: "carleman",
        citation: "Carleman's continuous function whose Fourier coefficients lie in no l^p with p < 2",
        params: &[
            p("B", Count, "12", "number of dyadic coefficient blocks"),
            p("p", Real, "1.9", "exponent of the divergent coefficient sums"),
            p("sup_bound", Real, "2.4", "bound required of every partial-sum sup norm"),
            p("cauchy_from", Count, "10", "block count after which l^2 increments must be small"),
            p("cauchy_tol", Real, "1e-3", "largest admissible l^2 norm increment"),
            p("increment_tol", Real, "0.01", "relative tolerance of block increments against the closed form"),
            p("drift_blocks", Count, "1000", "block count for the closed-form doubling test"),
            p("svd_modes", Count, "0", "retained frequencies for the dense SVD check (0 skips it)"),
            p("svd_tol", Real, "1e-9", "absolute tolerance of SVD against exact moduli"),
        ],
        run: experiments::carleman::run,
    },
    Entry {
        name: "higher-oscillator",
        citation: "eigenvalue counting bound for higher-order anharmonic oscillators (-d^2/dx^2)^k + |x|^(2l)",
        params: &[
            p("k", Count, "2", "power of the Laplacian"),
            p("ell", Count, "1", "half the degree of the potential"),
            p("L", Real, "50", "half-width of the box"),
            p("N", Count, "2048", "interior grid points"),
            p("tolerance", Real, "0.1", "relative tolerance of the fitted counting exponent"),
            p("match_tol", Real, "1e-8", "relative tolerance against the second-order form when k = 1"),
        ],
        run: experiments::oscillator::run_higher,
    },
    Entry {
        name: "inequality-suite",
        citation: "classical singular value inequalities (Weyl, Ky Fan, quasi-norm Hölder, Russo) and mixed Sobolev multiplier inclusions",
        params: &[
            p("trials", Count, "100", "random trials per inequality"),
            p("size", Count, "24", "matrix dimension"),
            p("weyl_p", RealList, "1,1.5,2", "Weyl exponents"),
            p("russo_p", RealList, "1.25,1.5,1.9", "Russo exponents in (1, 2)"),
            p("russo_size", Count, "32", "lattice size of the Russo kernels"),
            p("sobolev_n", Count, "512", "frequency grid side for the multiplier inclusions"),
            p("mu", RealList, "0.5,1,2", "Sobolev orders, checked in all pairs"),
        ],
        run: experiments::inequalities::run_suite,
    },
    Entry {
        name: "lattice-schatten",
        citation: "lattice criterion: a weighted square-summability condition on the kernel implies S_r membership",
        params: &[
            p("gamma", Real, "2.3", "decay of the diagonal kernel (1+|k|)^-gamma"),
            p("alpha", Real, "0.8", "weight order in x"),
            p("beta", Real, "0.8", "weight order in y"),
            p("R", Count, "2000", "lattice radius"),
            p("k_min", Count, "10", "first singular value index of the tail fit"),
            p("k_max", Count, "0", "last index of the tail fit (0 uses the whole spectrum)"),
            p("q", Real, "2", "kernel integrability exponent in (1, 2]"),
            p("tolerance", Real, "0.05", "allowed shortfall of the fitted exponent below the prediction"),
        ],
        run: experiments::lattice::run,
    },
    Entry {
        name: "oscillator-counting",
        citation: "eigenvalue counting bound for anharmonic oscillators -d^2/dx^2 + |x|^a",
        params: &[
            p("a", Real, "2", "degree of the potential"),
            p("L", RealOrAuto, "auto", "half-width of the box (auto: 25 for a = 2, else 8)"),
            p("N", Count, "2048", "interior grid points"),
            p("tolerance", RealOrAuto, "auto", "relative tolerance of the fitted exponent (auto: 5% for a = 2, else 10%)"),
        ],
        run: experiments::oscillator::run_anharmonic,
    },
    Entry {
        name: "riesz",
        citation: "singular value decay of the Riesz potential on bounded sets",
        params: &[
            p("alpha", Real, "0.5", "order in (0, 1)"),
            p("intervals", Intervals, "0:1", "union of disjoint intervals"),
            p("N", Count, "256", "grid points"),
            p("k_min", Count, "10", "first index of the tail fit"),
            p("k_max", Count, "100", "last index of the tail fit"),
            p("tolerance", Real, "0.1", "relative tolerance of the fitted exponent"),
            p("bounded_ratio", Real, "2", "largest admissible spread of s_k k^alpha over the fit window"),
        ],
        run: experiments::riesz::run,
    },
    Entry {
        name: "russo",
        citation: "Russo's bound of the S_p' norm by mixed kernel norms",
        params: &[
            p("trials", Count, "100", "random kernels"),
            p("size", Count, "32", "lattice points per axis"),
            p("p", RealList, "1.25,1.5,1.9", "exponents in (1, 2)"),
        ],
        run: experiments::inequalities::run_russo,
    },
    Entry {
        name: "torus-trace",
        citation: "trace of a trace-class operator as the limit of averaged kernel diagonals",
        params: &[
            p("kernel", Choice(TRACE_KERNELS), "exp-cos", "test kernel"),
            p("N", Count, "256", "torus points (power of two)"),
            p("R", Count, "512", "lattice half-width for the zeroed-diagonal kernel"),
            p("levels", RealOrAuto, "auto", "finest averaging level (auto: all levels on the torus, 3 on the lattice)"),
            p("tolerance", Real, "1e-6", "agreement required of the smooth-kernel traces"),
        ],
        run: experiments::trace::run,
    },
];

pub fn find(name: &str) -> Result<&'static Entry, CliError> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
        CliError::Usage(format!("unknown experiment `{name}` (available: {})", names.join(", ")))
    })
}

/// One line per experiment: name and citation.
pub fn listing() -> String {
    let width = REGISTRY.iter().map(|e| e.name.len()).max().unwrap_or(0);
    REGISTRY
        .iter()
        .map(|e| format!("{:width$}  {}\n", e.name, e.citation))
        .collect()
}
