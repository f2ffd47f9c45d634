//! Unimodal eigenfunctions of the nonlocal eigenvalue problem `sigma u = a * f(u)` with a
//! bilinear nonlinearity `f`.
//!
//! The solution for a given `sigma` is assembled from the leading eigenpair of a cut-off
//! convolution operator: the cut-off `xi` is chosen so that the eigenvalue equals
//! `(sigma - zeta) / eta`, the eigenfunction is integrated once and convolved with the
//! kernel, and the result is scaled so that it crosses the kink `theta` at `xi`. A
//! positive lower slope `zeta` is first removed by a Neumann-series kernel transform.
//!
//! ```
//! use nlev_core::{solve_sigma, BilinearNonlinearity, Kernel, SolveOptions};
//!
//! let f = BilinearNonlinearity::new(0.0, 0.6, 2.5).unwrap();
//! let opts = SolveOptions { spacing: 1e-2, ..Default::default() };
//! let s = solve_sigma(&Kernel::gaussian(), &f, 1.0, &opts).unwrap();
//! assert!(s.residual_rel < 1e-8);
//! ```

pub mod asymptotics;
pub mod cutoff;
pub mod error;
pub mod export;
pub mod grid;
pub mod kernels;
pub mod kr_solver;
pub mod nonlinear;
pub mod transform;

pub use asymptotics::{
    check_cubic_law, check_kappa, check_large_sigma, check_small_sigma, eigen_tail, KappaReport,
    LargeSigmaReport, MomentData, ScalingFit, SmallSigmaReport, TailProbe,
};
pub use cutoff::{apply_A, cone_membership, rayleigh, ConeReport, Cutoff, CutoffOperator, OddProfile};
pub use error::{Error, Result};
pub use grid::{convolve, quadrature, Grid, GridFn};
pub use kernels::{Kernel, KernelMeta, ValidationReport};
pub use kr_solver::{
    eigencurve, invert_lambda, power_method, EigenCurve, EigenPair, InvertOptions, Inversion, PowerOptions,
};
pub use nonlinear::{
    residual, solve_sigma, sweep, BilinearNonlinearity, Solution, SolutionSummary, SolveOptions, SweepEntry,
};
pub use transform::{resolvent_check, transform_kernel, transform_parameters, ResolventCheck, TransformedKernel};
