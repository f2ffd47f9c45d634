//! The cut-off operator `A_xi v = chi_xi (a * (chi_xi v))` on odd profiles.
//!
//! Odd profiles are stored on the positive half-line at cell midpoints
//! `y_j = (j + 1/2) h`. Oddness then fixes `v(0) = 0` without storing it, the cut-off
//! `xi = m h` falls on a cell boundary, and the half-line action reads
//!
//! ```text
//! (A v)_k = h * sum_{j < m} [a((k - j) h) - a((k + j + 1) h)] v_j,   k < m,
//! ```
//!
//! which is a symmetric matrix. Products are evaluated matrix-free through a Toeplitz
//! product on the full odd extension.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, Toeplitz};
use crate::kernels::Kernel;

/// Fewest cells used to resolve a cut-off interval.
pub const MIN_CELLS: usize = 16;

/// Odd function sampled at the half-line midpoints `(j + 1/2) h`.
#[derive(Debug, Clone, PartialEq)]
pub struct OddProfile {
    spacing: f64,
    values: Vec<f64>,
}

impl OddProfile {
    pub fn new(spacing: f64, values: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite profile value at cell {j}")));
        }
        Ok(Self { spacing, values })
    }

    pub fn zeros(spacing: f64, cells: usize) -> Self {
        Self { spacing, values: vec![0.0; cells] }
    }

    /// Samples `f` at the midpoints; `f` is only evaluated for `x > 0`.
    pub fn from_fn(spacing: f64, cells: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..cells).map(|j| f((j as f64 + 0.5) * spacing)).collect();
        Self { spacing, values }
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    /// Right end of the sampled half-line.
    pub fn extent(&self) -> f64 {
        self.values.len() as f64 * self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing
    }

    /// Full-line samples `(x, v(x))` over `-extent..extent`, antisymmetric by construction.
    pub fn full(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.values.len();
        let mut xs = Vec::with_capacity(2 * m);
        let mut vs = Vec::with_capacity(2 * m);
        for j in (0..m).rev() {
            xs.push(-self.midpoint(j));
            vs.push(-self.values[j]);
        }
        for j in 0..m {
            xs.push(self.midpoint(j));
            vs.push(self.values[j]);
        }
        (xs, vs)
    }

    /// Values at the nodes `i h`, `i = 0..=cells`, averaging adjacent cells; the first
    /// entry is `v(0) = 0` and the profile is taken as zero past its extent.
    pub fn node_values(&self) -> Vec<f64> {
        let m = self.values.len();
        let mut out = Vec::with_capacity(m + 1);
        out.push(0.0);
        for i in 1..=m {
            let right = if i < m { self.values[i] } else { 0.0 };
            out.push(0.5 * (self.values[i - 1] + right));
        }
        out
    }

    /// Full-line `L^2` norm.
    pub fn norm_l2(&self) -> f64 {
        full_norm(&self.values, self.spacing)
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Full-line inner product.
    pub fn dot(&self, other: &OddProfile) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(full_dot(&self.values, &other.values, self.spacing))
    }

    pub fn scale(&self, s: f64) -> OddProfile {
        OddProfile { spacing: self.spacing, values: self.values.iter().map(|v| v * s).collect() }
    }

    fn check_compatible(&self, other: &OddProfile) -> Result<()> {
        if self.spacing != other.spacing || self.values.len() != other.values.len() {
            return Err(Error::IncompatibleGrid(format!(
                "profiles with {} cells at h = {} and {} cells at h = {}",
                self.values.len(),
                self.spacing,
                other.values.len(),
                other.spacing
            )));
        }
        Ok(())
    }
}

pub(crate) fn full_dot(a: &[f64], b: &[f64], h: f64) -> f64 {
    2.0 * h * crate::grid::dot(a, b)
}

pub(crate) fn full_norm(a: &[f64], h: f64) -> f64 {
    full_dot(a, a, h).sqrt()
}

/// Cut-off length `xi` resolved by `cells` midpoint cells of width `xi / cells`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoff {
    xi: f64,
    cells: usize,
}

impl Cutoff {
    pub fn with_cells(xi: f64, cells: usize) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidParameter(format!("cut-off must be positive, got {xi}")));
        }
        if cells == 0 {
            return Err(Error::InvalidParameter("cut-off needs at least one cell".into()));
        }
        Ok(Self { xi, cells })
    }

    /// Keeps `xi` exact and picks the cell width closest to `h` (at least [`MIN_CELLS`] cells).
    pub fn resolved(xi: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing must be positive, got {h}")));
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidParameter(format!("cut-off must be positive, got {xi}")));
        }
        let cells = ((xi / h).round() as usize).max(MIN_CELLS);
        Self::with_cells(xi, cells)
    }

    /// Snaps `xi` to the nearest positive node of `grid`.
    pub fn snapped(xi: f64, grid: &Grid) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidParameter(format!("cut-off must be positive, got {xi}")));
        }
        if xi > grid.half_width() + 0.5 * grid.spacing() {
            return Err(Error::OutOfRange(format!(
                "cut-off {xi} exceeds grid half-width {}",
                grid.half_width()
            )));
        }
        let cells = ((xi / grid.spacing()).round() as usize).max(1);
        Self::with_cells(cells as f64 * grid.spacing(), cells)
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn spacing(&self) -> f64 {
        self.xi / self.cells as f64
    }

    /// Same cell count at a different cut-off.
    pub fn rescaled(&self, xi: f64) -> Result<Self> {
        Self::with_cells(xi, self.cells)
    }
}

/// Discretized `A_xi` for one kernel and cut-off.
pub struct CutoffOperator {
    cutoff: Cutoff,
    /// `a(k h)` for `k = 0..2m`.
    taps: Vec<f64>,
    toeplitz: Toeplitz,
}

impl CutoffOperator {
    pub fn new(kernel: &Kernel, cutoff: Cutoff) -> Self {
        let m = cutoff.cells();
        let taps = kernel.offsets(cutoff.spacing(), 2 * m);
        let toeplitz = Toeplitz::symmetric(&taps, 2 * m);
        Self { cutoff, taps, toeplitz }
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn cells(&self) -> usize {
        self.cutoff.cells()
    }

    pub fn spacing(&self) -> f64 {
        self.cutoff.spacing()
    }

    /// `A v` for midpoint values `v` on the `m` cells inside the cut-off.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let m = self.cells();
        assert_eq!(v.len(), m, "profile length must match the cut-off cells");
        let mut full = Vec::with_capacity(2 * m);
        full.extend(v.iter().rev().map(|x| -x));
        full.extend_from_slice(v);
        let out = self.toeplitz.apply(&full);
        let h = self.spacing();
        out[m..].iter().map(|y| h * y).collect()
    }

    /// Matrix entry `h [a((k - j) h) - a((k + j + 1) h)]`.
    pub fn entry(&self, k: usize, j: usize) -> f64 {
        let h = self.spacing();
        h * (self.taps[k.abs_diff(j)] - self.taps[k + j + 1])
    }

    /// Dense row-major matrix of the operator.
    pub fn matrix(&self) -> Vec<f64> {
        let m = self.cells();
        let mut out = Vec::with_capacity(m * m);
        for k in 0..m {
            for j in 0..m {
                out.push(self.entry(k, j));
            }
        }
        out
    }
}

/// `A_xi v` for a profile that may extend beyond the cut-off; the output is zero there.
#[allow(non_snake_case)]
pub fn apply_A(kernel: &Kernel, cutoff: Cutoff, v: &OddProfile) -> Result<OddProfile> {
    let m = check_profile(cutoff, v)?;
    let op = CutoffOperator::new(kernel, cutoff);
    let mut values = op.apply(&v.values[..m]);
    values.resize(v.cells(), 0.0);
    Ok(OddProfile { spacing: v.spacing, values })
}

/// `<chi v, a * (chi v)> / ||v||^2`, i.e. `2 F_xi(v) / ||v||^2`.
pub fn rayleigh(kernel: &Kernel, cutoff: Cutoff, v: &OddProfile) -> Result<f64> {
    let m = check_profile(cutoff, v)?;
    let norm2 = v.norm_l2().powi(2);
    if norm2 == 0.0 {
        return Err(Error::ZeroProfile);
    }
    let op = CutoffOperator::new(kernel, cutoff);
    let inside = &v.values[..m];
    Ok(full_dot(inside, &op.apply(inside), v.spacing) / norm2)
}

fn check_profile(cutoff: Cutoff, v: &OddProfile) -> Result<usize> {
    let h = cutoff.spacing();
    if (v.spacing - h).abs() > 1e-12 * h {
        return Err(Error::IncompatibleGrid(format!(
            "profile spacing {} differs from cut-off spacing {h}",
            v.spacing
        )));
    }
    if v.cells() < cutoff.cells() {
        return Err(Error::OutOfRange(format!(
            "cut-off {} exceeds profile extent {}",
            cutoff.xi(),
            v.extent()
        )));
    }
    Ok(cutoff.cells())
}

/// The normalized test profile `-(2 xi)^{-1/2} sgn(x) chi_xi(x)` on `cells` cells.
pub fn test_profile(cutoff: Cutoff, cells: usize) -> OddProfile {
    let c = -(2.0 * cutoff.xi()).powf(-0.5);
    OddProfile::from_fn(cutoff.spacing(), cells, |x| if x < cutoff.xi() { c } else { 0.0 })
}

/// Membership of an odd profile in the negative cone and its refined subcone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeReport {
    /// Nonpositive on the positive half-line.
    pub in_negative_cone: bool,
    /// Strictly negative inside the cut-off, zero beyond, negative slope at the origin.
    pub in_refined_cone: bool,
    /// Largest amount by which either condition fails (0 if both hold).
    pub worst_violation: f64,
}

/// Classifies `v` with slack `1e-10 ||v||_inf`.
pub fn cone_membership(v: &OddProfile, cutoff: Cutoff) -> ConeReport {
    let tol = 1e-10 * v.norm_inf();
    let inside = ((cutoff.xi() / v.spacing).round() as usize).min(v.cells());
    let positive = v.values.iter().fold(0.0, |m: f64, &x| m.max(x));
    let outside = v.values[inside..].iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    // for inside cells the refined cone needs v < -tol; measure the shortfall
    let shortfall = v.values[..inside].iter().fold(0.0, |m: f64, &x| m.max(x + tol));
    let in_negative_cone = positive <= tol;
    let slope_ok = inside > 0 && v.values[0] < -tol;
    let in_refined_cone = in_negative_cone && outside <= tol && shortfall <= 0.0 && slope_ok;
    let worst_violation = if in_refined_cone {
        0.0
    } else {
        (positive - tol).max(outside - tol).max(shortfall).max(0.0)
    };
    ConeReport { in_negative_cone, in_refined_cone, worst_violation }
}
