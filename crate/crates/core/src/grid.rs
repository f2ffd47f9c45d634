//! Uniform symmetric grids, Riemann-sum quadrature and discrete convolution.
//!
//! Every integral is a plain Riemann sum with weight `h` at each node, endpoints
//! included. Convolutions are evaluated as `h * sum_j a(x_i - x_j) f(x_j)`; a direct
//! `O(n^2)` loop is the reference, and larger inputs go through an FFT with the same
//! result up to roundoff.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Inputs at or below this length use the direct summation.
const DIRECT_LIMIT: usize = 96;

/// Uniform grid `x_i = -L + i h`, `i = 0..n`, with `n = 2 round(L/h) + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    spacing: f64,
    half_points: usize,
}

impl Grid {
    /// Builds the grid; the realized half-width is `h * round(L / h)`.
    pub fn new(half_width: f64, spacing: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid needs positive half-width and spacing, got L = {half_width}, h = {spacing}"
            )));
        }
        if half_width < spacing {
            return Err(Error::InvalidParameter(format!(
                "half-width {half_width} is smaller than spacing {spacing}"
            )));
        }
        let half_points = (half_width / spacing).round() as usize;
        Ok(Self { spacing, half_points: half_points.max(1) })
    }

    /// Grid with exactly `half_points` nodes on each side of the origin.
    pub fn with_half_points(half_points: usize, spacing: f64) -> Result<Self> {
        if half_points == 0 || !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least one node per side and positive spacing, got {half_points}, {spacing}"
            )));
        }
        Ok(Self { spacing, half_points })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Realized half-width `L`.
    pub fn half_width(&self) -> f64 {
        self.half_points as f64 * self.spacing
    }

    /// Number of nodes on the positive side; the origin has index `half_points()`.
    pub fn half_points(&self) -> usize {
        self.half_points
    }

    pub fn len(&self) -> usize {
        2 * self.half_points + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn center(&self) -> usize {
        self.half_points
    }

    pub fn point(&self, i: usize) -> f64 {
        (i as f64 - self.half_points as f64) * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    fn same_as(&self, other: &Grid) -> bool {
        self.half_points == other.half_points
            && (self.spacing - other.spacing).abs() <= 1e-14 * self.spacing
    }
}

/// Samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFn {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::IncompatibleGrid(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at the node closest to `x` (origin-relative index arithmetic).
    pub fn at_index(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.spacing * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dot(&self, other: &GridFn) -> Result<f64> {
        check_same(&self.grid, &other.grid)?;
        Ok(self.grid.spacing * dot(&self.values, &other.values))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFn {
        GridFn { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, s: f64) -> GridFn {
        self.map(|v| s * v)
    }
}

fn check_same(a: &Grid, b: &Grid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::IncompatibleGrid(format!(
            "(n = {}, h = {}) vs (n = {}, h = {})",
            a.len(),
            a.spacing,
            b.len(),
            b.spacing
        )))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Riemann sum `h * sum_i f(x_i)`.
pub fn quadrature(f: &GridFn) -> f64 {
    f.grid.spacing * f.values.iter().sum::<f64>()
}

/// Discrete convolution on a shared grid; `a` is taken as zero beyond the grid.
pub fn convolve(a: &GridFn, f: &GridFn) -> Result<GridFn> {
    check_same(&a.grid, &f.grid)?;
    let n = a.grid.len();
    let c = a.grid.center();
    let taps = (0..2 * n - 1)
        .map(|k| {
            // offset k - (n - 1) relative to the origin node of `a`
            let off = k as isize - (n as isize - 1);
            let idx = c as isize + off;
            if idx >= 0 && (idx as usize) < n {
                a.values[idx as usize]
            } else {
                0.0
            }
        })
        .collect();
    let op = Toeplitz::new(taps, n);
    let mut values = op.apply(&f.values);
    let h = a.grid.spacing;
    values.iter_mut().for_each(|v| *v *= h);
    Ok(GridFn { grid: f.grid, values })
}

/// Direct-summation reference for [`convolve`].
pub fn convolve_direct(a: &GridFn, f: &GridFn) -> Result<GridFn> {
    check_same(&a.grid, &f.grid)?;
    let n = a.grid.len();
    let c = a.grid.center() as isize;
    let h = a.grid.spacing;
    let values = (0..n as isize)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n as isize {
                let idx = c + i - j;
                if idx >= 0 && idx < n as isize {
                    s += a.values[idx as usize] * f.values[j as usize];
                }
            }
            h * s
        })
        .collect();
    Ok(GridFn { grid: f.grid, values })
}

/// Toeplitz matrix-vector product `y_i = sum_j t_{i-j} x_j` for `i, j < n`.
///
/// `taps` holds `t_k` for `k = -(n-1)..=(n-1)` at index `k + n - 1`.
pub(crate) struct Toeplitz {
    n: usize,
    taps: Vec<f64>,
    spectral: Option<Spectral>,
}

struct Spectral {
    size: usize,
    taps_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Toeplitz {
    pub(crate) fn new(taps: Vec<f64>, n: usize) -> Self {
        assert_eq!(taps.len(), 2 * n - 1, "Toeplitz taps must cover offsets -(n-1)..=(n-1)");
        let spectral = (n > DIRECT_LIMIT).then(|| Spectral::new(&taps, n));
        Self { n, taps, spectral }
    }

    /// Symmetric Toeplitz from `t_k = t_{-k}`, `k = 0..n`.
    pub(crate) fn symmetric(half_taps: &[f64], n: usize) -> Self {
        assert!(half_taps.len() >= n);
        let taps = (0..2 * n - 1)
            .map(|k| half_taps[(k as isize - (n as isize - 1)).unsigned_abs()])
            .collect();
        Self::new(taps, n)
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        match &self.spectral {
            Some(s) => s.apply(x, self.n),
            None => self.apply_direct(x),
        }
    }

    pub(crate) fn apply_direct(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for (j, xj) in x.iter().enumerate() {
                    s += self.taps[i + n - 1 - j] * xj;
                }
                s
            })
            .collect()
    }
}

impl Spectral {
    fn new(taps: &[f64], n: usize) -> Self {
        let size = (2 * n - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut taps_hat = vec![Complex64::new(0.0, 0.0); size];
        for (k, &t) in taps.iter().enumerate() {
            let off = k as isize - (n as isize - 1);
            taps_hat[off.rem_euclid(size as isize) as usize] = Complex64::new(t, 0.0);
        }
        forward.process(&mut taps_hat);
        Self { size, taps_hat, forward, inverse }
    }

    fn apply(&self, x: &[f64], n: usize) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.forward.process(&mut buf);
        for (b, t) in buf.iter_mut().zip(&self.taps_hat) {
            *b *= t;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        buf[..n].iter().map(|c| c.re * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(x: f64) -> f64 {
        (-x * x).exp() / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn make_grid_examples() {
        let g = Grid::new(2.0, 1.0).unwrap();
        assert_eq!(g.points(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(Grid::new(10.0, 0.001).unwrap().len(), 20001);
        let g = Grid::new(1.05, 0.5).unwrap();
        assert_eq!(g.half_width(), 1.0);
        assert_eq!(g.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn make_grid_rejects_bad_arguments() {
        assert!(Grid::new(0.0, 0.1).is_err());
        assert!(Grid::new(1.0, -0.1).is_err());
        assert!(Grid::new(0.05, 0.1).is_err());
    }

    #[test]
    fn points_are_exactly_symmetric() {
        let g = Grid::new(3.7, 0.013).unwrap();
        let n = g.len();
        for i in 0..n {
            assert_eq!(g.point(i), -g.point(n - 1 - i));
        }
        assert_eq!(g.point(g.center()), 0.0);
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid::new(10.0, 1e-3).unwrap();
        assert_eq!(quadrature(&GridFn::zeros(g)), 0.0);
        assert!((quadrature(&GridFn::from_fn(g, gaussian)) - 1.0).abs() < 1e-6);
        let g = Grid::new(2.0, 1e-3).unwrap();
        let tent = GridFn::from_fn(g, |x| (1.0 - x.abs()).max(0.0));
        assert!((quadrature(&tent) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn convolve_examples() {
        let g = Grid::new(10.0, 1e-2).unwrap();
        let a = GridFn::from_fn(g, gaussian);
        let zero = convolve(&a, &GridFn::zeros(g)).unwrap();
        assert!(zero.values().iter().all(|&v| v.abs() < 1e-15));

        let g = Grid::new(10.0, 1e-3).unwrap();
        let a = GridFn::from_fn(g, gaussian);
        let aa = convolve(&a, &a).unwrap();
        let expect = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((aa.at_index(g.center()) - expect).abs() < 1e-5);

        let g = Grid::new(2.0, 1e-3).unwrap();
        let ind = GridFn::from_fn(g, |x| if x.abs() <= 0.5 { 1.0 } else { 0.0 });
        let chi = GridFn::from_fn(g, |x| if x.abs() <= 0.5 { 1.0 } else { 0.0 });
        let c = convolve(&ind, &chi).unwrap();
        assert!((c.at_index(g.center()) - 1.0).abs() < 1e-3 + 1e-12);
    }

    #[test]
    fn convolve_rejects_mismatched_grids() {
        let a = GridFn::zeros(Grid::new(1.0, 0.1).unwrap());
        let b = GridFn::zeros(Grid::new(1.0, 0.05).unwrap());
        assert!(matches!(convolve(&a, &b), Err(Error::IncompatibleGrid(_))));
    }

    #[test]
    fn fast_path_matches_direct() {
        for &(l, h) in &[(2.0, 0.01), (10.0, 0.005), (1.0, 0.0005)] {
            let g = Grid::new(l, h).unwrap();
            assert!(g.len() <= 4001);
            let a = GridFn::from_fn(g, gaussian);
            let f = GridFn::from_fn(g, |x| (3.0 * x).sin() * (-0.2 * x * x).exp() + 0.3);
            let fast = convolve(&a, &f).unwrap();
            let slow = convolve_direct(&a, &f).unwrap();
            let scale = slow.norm_inf();
            for (p, q) in fast.values().iter().zip(slow.values()) {
                assert!((p - q).abs() <= 1e-10 * scale, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn convolution_converges_under_refinement() {
        // smooth Lipschitz input; reference from a much finer grid
        let kernel = |x: f64| (1.0 - x.abs()).max(0.0);
        let input = |x: f64| (-(x * x)).exp();
        let eval = |h: f64| {
            let g = Grid::new(3.0, h).unwrap();
            let c = convolve(&GridFn::from_fn(g, kernel), &GridFn::from_fn(g, input)).unwrap();
            let probe = (0..=10).map(|k| k as f64 * 0.1).collect::<Vec<_>>();
            probe
                .iter()
                .map(|&x| c.at_index(g.center() + (x / h).round() as usize))
                .collect::<Vec<_>>()
        };
        let fine = eval(0.1 / 64.0);
        let err = |v: Vec<f64>| v.iter().zip(&fine).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let e1 = err(eval(0.1 / 4.0));
        let e2 = err(eval(0.1 / 8.0));
        assert!(e1 / e2 >= 1.5, "errors {e1} -> {e2}");
    }
}
