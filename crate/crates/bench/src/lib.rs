//! Shared fixtures for the benchmarks.

use nlev_core::{BilinearNonlinearity, Cutoff, Kernel, SolveOptions};

/// `zeta = 0`, `theta = 0.6`, `eta = 2.5`.
pub fn pure_jump() -> BilinearNonlinearity {
    BilinearNonlinearity::new(0.0, 0.6, 2.5).expect("valid parameters")
}

/// `zeta = 1`, `theta = 0.6`, `eta = 2.5`.
pub fn with_slope() -> BilinearNonlinearity {
    BilinearNonlinearity::new(1.0, 0.6, 2.5).expect("valid parameters")
}

pub fn gaussian() -> Kernel {
    Kernel::gaussian()
}

pub fn cutoff(xi: f64, h: f64) -> Cutoff {
    Cutoff::resolved(xi, h).expect("valid cut-off")
}

/// Default tolerances at spacing `h`.
pub fn options(h: f64) -> SolveOptions {
    SolveOptions { spacing: h, ..SolveOptions::default() }
}
