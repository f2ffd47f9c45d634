//! Neumann-series kernel `a~ = (1 - mu) sum_k mu^k a^{*(k+1)}` that reduces a positive
//! lower slope to the zero-slope problem.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFn, Toeplitz};
use crate::kernels::Kernel;

/// Largest admissible `mu`.
pub const MU_MAX: f64 = 0.999;

/// `(sigma - zeta, zeta / sigma)`.
pub fn transform_parameters(sigma: f64, zeta: f64) -> Result<(f64, f64)> {
    if !(zeta >= 0.0 && zeta.is_finite()) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite sigma and zeta >= 0, got {sigma}, {zeta}")));
    }
    if !(sigma > zeta && sigma > 0.0) {
        return Err(Error::Inadmissible { sigma, lower: zeta, upper: f64::INFINITY });
    }
    Ok((sigma - zeta, zeta / sigma))
}

/// Number of series terms beyond the first needed for an `L^1` tail below `tol`.
pub fn truncation_depth(mu: f64, tol: f64) -> usize {
    if mu == 0.0 {
        return 0;
    }
    ((tol * (1.0 - mu)).ln() / mu.ln()).ceil().max(0.0) as usize
}

/// Half-width that holds the transformed kernel: the kernel's own reach widened by three
/// standard deviations of the deepest convolution power.
pub fn transform_half_width(kernel: &Kernel, mu: f64, tol: f64) -> f64 {
    let k = truncation_depth(mu, tol) as f64;
    kernel.reach() + 3.0 * (k * kernel.meta().second_moment).sqrt()
}

/// Sampled transformed kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformedKernel {
    pub base: String,
    pub mu: f64,
    #[serde(skip)]
    pub samples: GridFn,
    pub truncation_depth: usize,
    /// `mu^{K+1} / (1 - mu)`.
    pub truncation_bound: f64,
    /// Factor applied to reach unit mass.
    pub renormalization: f64,
    /// Mass lost across the grid boundary before renormalization.
    pub mass_leak: f64,
}

impl TransformedKernel {
    pub fn grid(&self) -> &Grid {
        self.samples.grid()
    }

    pub fn label(&self) -> String {
        format!("transformed({}, mu={})", self.base, self.mu)
    }

    /// Value at the origin node.
    pub fn peak(&self) -> f64 {
        self.samples.at_index(self.grid().center())
    }

    pub fn mass(&self) -> f64 {
        crate::grid::quadrature(&self.samples)
    }

    pub fn second_moment(&self) -> f64 {
        let g = self.grid();
        let v = self.samples.values();
        g.spacing() * (0..g.len()).map(|i| g.point(i).powi(2) * v[i]).sum::<f64>()
    }

    /// Five-point second difference at the origin with step `d = stride * h`.
    pub fn second_derivative_at_origin(&self, stride: usize) -> f64 {
        let c = self.grid().center();
        let v = self.samples.values();
        let d = stride as f64 * self.grid().spacing();
        let at = |k: usize| v[c + k];
        (-2.0 * at(2 * stride) + 32.0 * at(stride) - 30.0 * at(0)) / (12.0 * d * d)
    }

    /// Largest increase between consecutive samples on the positive half-line.
    pub fn unimodality_violation(&self) -> f64 {
        let v = self.samples.values();
        let c = self.grid().center();
        (c..v.len() - 1).map(|i| v[i + 1] - v[i]).fold(0.0, f64::max)
    }

    /// Linear-interpolation kernel through the samples.
    pub fn to_kernel(&self) -> Result<Kernel> {
        Kernel::from_table(self.label(), self.grid().points(), self.samples.values().to_vec())
    }
}

/// Computes `a~` on `grid` by iterated discrete convolution, truncated after `K` terms
/// with `mu^{K+1} / (1 - mu) < tol`, and renormalized to unit mass.
pub fn transform_kernel(kernel: &Kernel, mu: f64, grid: &Grid, tol: f64) -> Result<TransformedKernel> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::OutOfRange(format!("mu = {mu} is outside [0, 1)")));
    }
    if mu > MU_MAX {
        return Err(Error::OutOfRange(format!(
            "mu = {mu} exceeds {MU_MAX}; the series is too long to evaluate near sigma = zeta"
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("transform tolerance must lie in (0, 1), got {tol}")));
    }
    let n = grid.len();
    let h = grid.spacing();
    let taps = kernel.offsets(h, n);
    let base = grid_samples(&taps, grid);
    if mu == 0.0 {
        return Ok(TransformedKernel {
            base: kernel.label().to_string(),
            mu,
            samples: GridFn::new(*grid, base)?,
            truncation_depth: 0,
            truncation_bound: 0.0,
            renormalization: 1.0,
            mass_leak: 0.0,
        });
    }
    let depth = truncation_depth(mu, tol);
    let kernel_mass = h * (taps[0] + 2.0 * taps[1..].iter().sum::<f64>());
    let op = Toeplitz::symmetric(&taps, n);

    let mut power = base.clone();
    let mut sum: Vec<f64> = power.iter().map(|p| (1.0 - mu) * p).collect();
    let mut weight = 1.0 - mu;
    let mut leak = (1.0 - mu) * (kernel_mass - h * base.iter().sum::<f64>());
    for _ in 0..depth {
        let before = h * power.iter().sum::<f64>();
        power = op.apply(&power).into_iter().map(|x| h * x).collect();
        weight *= mu;
        let after = h * power.iter().sum::<f64>();
        leak += weight * (kernel_mass * before - after);
        for (s, p) in sum.iter_mut().zip(&power) {
            *s += weight * p;
        }
    }
    if leak > tol {
        return Err(Error::GridTooSmall(format!(
            "transformed kernel loses {leak:e} of its mass across |x| = {} (tolerance {tol:e})",
            grid.half_width()
        )));
    }

    // exact symmetry and removal of roundoff-level negatives
    let peak = sum.iter().fold(0.0, |m: f64, &x| m.max(x));
    let symmetric: Vec<f64> = (0..n)
        .map(|i| {
            let s = 0.5 * (sum[i] + sum[n - 1 - i]);
            if s < 0.0 && s.abs() <= 1e-14 * peak {
                0.0
            } else {
                s
            }
        })
        .collect();
    let mass = h * symmetric.iter().sum::<f64>();
    let renormalization = 1.0 / mass;
    if (renormalization - 1.0).abs() > 10.0 * tol.max(f64::EPSILON) + (1.0 - kernel_mass).abs() {
        return Err(Error::Domain(format!(
            "renormalization factor {renormalization} deviates from 1 by more than {}",
            10.0 * tol
        )));
    }
    let samples = GridFn::new(*grid, symmetric.into_iter().map(|x| x * renormalization).collect())?;
    Ok(TransformedKernel {
        base: kernel.label().to_string(),
        mu,
        samples,
        truncation_depth: depth,
        truncation_bound: mu.powi(depth as i32 + 1) / (1.0 - mu),
        renormalization,
        mass_leak: leak.max(0.0),
    })
}

/// Kernel taps laid out on the grid nodes.
fn grid_samples(taps: &[f64], grid: &Grid) -> Vec<f64> {
    let c = grid.center();
    (0..grid.len()).map(|i| taps[i.abs_diff(c)]).collect()
}

/// Discrete `a * g` with the kernel taps taken at every offset.
pub(crate) fn kernel_convolve(taps: &[f64], g: &[f64], h: f64) -> Vec<f64> {
    let op = Toeplitz::symmetric(taps, g.len());
    op.apply(g).into_iter().map(|x| h * x).collect()
}

/// Solutions of `w - mu a*w = a*g` by Picard iteration and by the series kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventCheck {
    pub direct: GridFn,
    pub series: GridFn,
    pub picard_iterations: usize,
}

impl ResolventCheck {
    /// `||direct - series|| / ||direct||`.
    pub fn relative_difference(&self) -> f64 {
        let d: f64 = self
            .direct
            .values()
            .iter()
            .zip(self.series.values())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let n = self.direct.norm_l2() / self.direct.grid().spacing().sqrt();
        if n == 0.0 {
            d
        } else {
            d / n
        }
    }
}

/// Compares the Picard solution of `w = mu a*w + a*g` with `(1 - mu)^{-1} a~ * g`.
///
/// Both are computed on a grid with the spacing of `g`, widened to hold `a~`.
pub fn resolvent_check(kernel: &Kernel, mu: f64, g: &GridFn, tol: f64) -> Result<ResolventCheck> {
    let h = g.grid().spacing();
    let width = transform_half_width(kernel, mu, tol).max(g.grid().half_width());
    let wide = Grid::with_half_points((width / h).ceil() as usize, h)?;
    let tk = transform_kernel(kernel, mu, &wide, tol)?;

    let offset = wide.half_points() - g.grid().half_points();
    let mut gw = vec![0.0; wide.len()];
    gw[offset..offset + g.grid().len()].copy_from_slice(g.values());

    let c = wide.center();
    let mut taps = kernel.offsets(h, c + 1);
    taps.resize(wide.len(), 0.0);
    let ag = kernel_convolve(&taps, &gw, h);
    let tilde_taps: Vec<f64> = (0..wide.len())
        .map(|k| if k <= c { tk.samples.values()[c + k] } else { 0.0 })
        .collect();
    let series: Vec<f64> = kernel_convolve(&tilde_taps, &gw, h).into_iter().map(|x| x / (1.0 - mu)).collect();

    let scale = ag.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let mut w = ag.clone();
    let max_iter = 100_000;
    let mut iterations = 0;
    if scale > 0.0 && mu > 0.0 {
        loop {
            iterations += 1;
            let aw = kernel_convolve(&taps, &w, h);
            let next: Vec<f64> = aw.iter().zip(&ag).map(|(x, y)| mu * x + y).collect();
            let change = next.iter().zip(&w).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
            w = next;
            if change <= 1e-10 * (1.0 - mu) * scale {
                break;
            }
            if iterations >= max_iter {
                return Err(Error::NonConvergence { iterations, residual: change });
            }
        }
    }
    Ok(ResolventCheck {
        direct: GridFn::new(wide, w)?,
        series: GridFn::new(wide, series)?,
        picard_iterations: iterations,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn parameter_examples() {
        assert_eq!(transform_parameters(2.0, 1.0).unwrap(), (1.0, 0.5));
        assert_eq!(transform_parameters(1.3, 0.0).unwrap(), (1.3, 0.0));
        assert!(matches!(transform_parameters(1.0, 1.0), Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn zero_mu_is_identity() {
        let g = Grid::new(10.0, 1e-2).unwrap();
        let t = transform_kernel(&Kernel::gaussian(), 0.0, &g, 1e-8).unwrap();
        assert_eq!(t.truncation_depth, 0);
        for (i, &v) in t.samples.values().iter().enumerate() {
            assert_eq!(v, Kernel::gaussian().sample(g.point(i)));
        }
    }

    #[test]
    fn gaussian_half_matches_closed_form() {
        let (mu, tol) = (0.5, 1e-8);
        let k = Kernel::gaussian();
        let g = Grid::new(transform_half_width(&k, mu, tol), 5e-3).unwrap();
        let t = transform_kernel(&k, mu, &g, tol).unwrap();
        assert!((t.mass() - 1.0).abs() < 1e-6);
        assert!(t.unimodality_violation() <= 1e-14 * t.peak());
        assert!(t.peak() < k.eval(0.0));
        // a^{*j}(0) = 1 / sqrt(j pi)
        let depth = t.truncation_depth;
        let partial: f64 = (0..=depth)
            .map(|j| (1.0 - mu) * mu.powi(j as i32) / ((j + 1) as f64 * PI).sqrt())
            .sum();
        let oracle = partial / (1.0 - mu.powi(depth as i32 + 1));
        assert!((t.peak() - oracle).abs() < 1e-8, "{} vs {oracle}", t.peak());
    }

    #[test]
    fn narrow_grid_reports_leak() {
        let g = Grid::new(3.0, 1e-2).unwrap();
        assert!(matches!(
            transform_kernel(&Kernel::gaussian(), 0.9, &g, 1e-8),
            Err(Error::GridTooSmall(_))
        ));
    }

    #[test]
    fn mu_cap() {
        let g = Grid::new(3.0, 1e-2).unwrap();
        assert!(matches!(transform_kernel(&Kernel::gaussian(), 0.9995, &g, 1e-8), Err(Error::OutOfRange(_))));
        assert!(matches!(transform_kernel(&Kernel::gaussian(), 1.0, &g, 1e-8), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn resolvent_examples() {
        let k = Kernel::gaussian();
        let grid = Grid::new(6.0, 1e-2).unwrap();
        let g = GridFn::from_fn(grid, |x| k.eval(x));
        let r = resolvent_check(&k, 0.5, &g, 1e-8).unwrap();
        assert!(r.relative_difference() < 1e-6, "{}", r.relative_difference());

        let r0 = resolvent_check(&k, 0.0, &g, 1e-8).unwrap();
        assert_eq!(r0.direct.values(), r0.series.values());

        let zero = GridFn::zeros(grid);
        let rz = resolvent_check(&k, 0.5, &zero, 1e-8).unwrap();
        assert!(rz.direct.values().iter().all(|&x| x == 0.0));
        assert!(rz.series.values().iter().all(|&x| x == 0.0));
    }
}
