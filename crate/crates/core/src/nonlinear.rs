//! Bilinear nonlinearity and the constructive solution of `sigma u = a * f(u)`.

use serde::Serialize;

use crate::cutoff::OddProfile;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFn};
use crate::kernels::Kernel;
use crate::kr_solver::{invert_lambda, InvertOptions, PowerOptions};
use crate::transform::{kernel_convolve, transform_half_width, transform_kernel, transform_parameters};

/// `f(r) = zeta r` for `r <= theta`, `(zeta + eta)(r - theta) + zeta theta` above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BilinearNonlinearity {
    pub zeta: f64,
    pub theta: f64,
    pub eta: f64,
}

impl BilinearNonlinearity {
    pub fn new(zeta: f64, theta: f64, eta: f64) -> Result<Self> {
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(Error::InvalidParameter(format!("zeta must be >= 0, got {zeta}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta must be > 0, got {theta}")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be > 0, got {eta}")));
        }
        Ok(Self { zeta, theta, eta })
    }

    pub fn eval_f(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::Domain(format!("f is defined for r >= 0, got {r}")));
        }
        Ok(self.f(r))
    }

    pub(crate) fn f(&self, r: f64) -> f64 {
        if r <= self.theta {
            self.zeta * r
        } else {
            (self.zeta + self.eta) * (r - self.theta) + self.zeta * self.theta
        }
    }

    /// Open interval of eigenvalues with unimodal solutions.
    pub fn admissible_range(&self) -> (f64, f64) {
        (self.zeta, self.zeta + self.eta)
    }

    pub fn check_admissible(&self, sigma: f64) -> Result<()> {
        let (lower, upper) = self.admissible_range();
        if sigma > lower && sigma < upper {
            Ok(())
        } else {
            Err(Error::Inadmissible { sigma, lower, upper })
        }
    }
}

/// Discretization and tolerance settings for [`solve_sigma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub spacing: f64,
    /// Largest cut-off searched and least half-width of the solution grid.
    pub half_width: f64,
    pub tol_power: f64,
    pub tol_bisect: f64,
    pub tol_transform: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            spacing: 1e-3,
            half_width: 10.0,
            tol_power: 1e-10,
            tol_bisect: 1e-8,
            tol_transform: 1e-8,
            max_iter: 100_000,
        }
    }
}

impl SolveOptions {
    pub fn power(&self) -> PowerOptions {
        PowerOptions { tol: self.tol_power, max_iter: self.max_iter }
    }
}

/// Record of the kernel transform used for `zeta > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformRecord {
    pub mu: f64,
    pub sigma_tilde: f64,
    pub half_width: f64,
    pub truncation_depth: usize,
    pub truncation_bound: f64,
    pub renormalization: f64,
    pub mass_leak: f64,
}

/// Solved eigenfunction for one `sigma`.
#[derive(Debug, Clone)]
pub struct Solution {
    pub sigma: f64,
    pub params: BilinearNonlinearity,
    pub kernel: String,
    pub transform: Option<TransformRecord>,
    pub xi: f64,
    pub lambda: f64,
    pub lambda_target: f64,
    pub v: OddProfile,
    pub u_tilde: GridFn,
    pub tau: f64,
    pub u: GridFn,
    pub residual_rel: f64,
    pub options: SolveOptions,
}

/// Shape diagnostics of a solution; deviations are absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeReport {
    pub evenness_deviation: f64,
    pub min_value: f64,
    pub unimodality_violation: f64,
    /// `|u(xi) - theta|` at the cut-off node.
    pub theta_deviation: f64,
    /// `2 h |u'(xi)|`.
    pub interpolation_tolerance: f64,
    /// `max (theta - u)` over `|x| <= xi`.
    pub below_theta_inside: f64,
    /// `max (u - theta)` over `|x| > xi`.
    pub above_theta_outside: f64,
    pub peak_at_origin: bool,
}

impl ShapeReport {
    /// Even, nonnegative, nonincreasing, peaked at 0 and crossing `theta` at `xi`, with
    /// slack `1e-9 ||u||_inf` and the interpolation tolerance at the crossing.
    pub fn holds(&self, sup: f64) -> bool {
        let tol = 1e-9 * sup;
        self.evenness_deviation <= tol
            && self.min_value >= -tol
            && self.unimodality_violation <= tol
            && self.theta_deviation <= self.interpolation_tolerance
            && self.below_theta_inside <= self.interpolation_tolerance
            && self.above_theta_outside <= self.interpolation_tolerance
            && self.peak_at_origin
    }
}

impl Solution {
    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn spacing(&self) -> f64 {
        self.grid().spacing()
    }

    /// Number of cells inside the cut-off.
    pub fn cells(&self) -> usize {
        self.v.cells()
    }

    /// `f(u)` on the solution grid.
    pub fn f_of_u(&self) -> Vec<f64> {
        self.u.values().iter().map(|&r| self.params.f(r)).collect()
    }

    /// `v` at every node of the solution grid (odd, zero beyond the cut-off).
    pub fn v_on_grid(&self) -> Vec<f64> {
        let g = self.grid();
        let c = g.center();
        let nodes = self.v.node_values();
        (0..g.len())
            .map(|i| {
                let k = i.abs_diff(c);
                let val = nodes.get(k).copied().unwrap_or(0.0);
                if i < c {
                    -val
                } else {
                    val
                }
            })
            .collect()
    }

    /// Positive crossing of `theta`, interpolated linearly between nodes.
    pub fn crossing(&self) -> f64 {
        let g = self.grid();
        let c = g.center();
        let u = self.u.values();
        let theta = self.params.theta;
        for i in c + 1..u.len() {
            if u[i] < theta {
                let (x0, u0, u1) = (g.point(i - 1), u[i - 1], u[i]);
                return x0 + (u0 - theta) / (u0 - u1) * g.spacing();
            }
        }
        g.half_width()
    }

    pub fn shape(&self) -> ShapeReport {
        let g = self.grid();
        let c = g.center();
        let m = self.cells();
        let u = self.u.values();
        let h = g.spacing();
        let theta = self.params.theta;
        let evenness_deviation = (1..=c).map(|k| (u[c + k] - u[c - k]).abs()).fold(0.0, f64::max);
        let min_value = u.iter().copied().fold(f64::INFINITY, f64::min);
        let unimodality_violation = (c..u.len() - 1).map(|i| u[i + 1] - u[i]).fold(0.0, f64::max);
        let slope = (u[c + m + 1] - u[c + m - 1]).abs() / (2.0 * h);
        let below_theta_inside = (c - m..=c + m).map(|i| theta - u[i]).fold(0.0, f64::max);
        let above_theta_outside = (0..u.len())
            .filter(|&i| i.abs_diff(c) > m)
            .map(|i| u[i] - theta)
            .fold(0.0, f64::max);
        let peak = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ShapeReport {
            evenness_deviation,
            min_value,
            unimodality_violation,
            theta_deviation: (u[c + m] - theta).abs(),
            interpolation_tolerance: 2.0 * h * slope,
            below_theta_inside,
            above_theta_outside,
            peak_at_origin: u[c] == peak,
        }
    }

    /// `|cos|` between central differences of `u` inside the cut-off and `v`.
    pub fn derivative_cosine(&self) -> f64 {
        let c = self.grid().center();
        let m = self.cells();
        let h = self.spacing();
        let u = self.u.values();
        let nodes = self.v.node_values();
        let du: Vec<f64> = (1..m).map(|k| (u[c + k + 1] - u[c + k - 1]) / (2.0 * h)).collect();
        cosine(&du, &nodes[1..m]).abs()
    }

    /// `(x / xi, f(u(x)) / sigma)` for nodes with `|x| <= xi`.
    pub fn rescaled_w(&self) -> (Vec<f64>, Vec<f64>) {
        let g = self.grid();
        let c = g.center();
        let m = self.cells();
        let xs = (c - m..=c + m).map(|i| g.point(i) / self.xi).collect();
        let ws = (c - m..=c + m).map(|i| self.params.f(self.u.values()[i]) / self.sigma).collect();
        (xs, ws)
    }

    /// `|sigma int u - int f(u)| / (sigma int u)`.
    pub fn mass_identity_error(&self) -> f64 {
        let h = self.spacing();
        let iu = h * self.u.values().iter().sum::<f64>();
        let ifu = h * self.f_of_u().iter().sum::<f64>();
        (self.sigma * iu - ifu).abs() / (self.sigma * iu)
    }

    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            sigma: self.sigma,
            xi: self.xi,
            lambda: self.lambda,
            tau: self.tau,
            norm_l2: self.u.norm_l2(),
            norm_inf: self.u.norm_inf(),
            residual_rel: self.residual_rel,
        }
    }
}

/// Cosine similarity of two equally long vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let ab = crate::grid::dot(a, b);
    let aa = crate::grid::dot(a, a);
    let bb = crate::grid::dot(b, b);
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa * bb).sqrt()
    }
}

/// Scalar summary of a [`Solution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionSummary {
    pub sigma: f64,
    pub xi: f64,
    pub lambda: f64,
    pub tau: f64,
    pub norm_l2: f64,
    pub norm_inf: f64,
    pub residual_rel: f64,
}

/// Constructs the unimodal solution for `sigma in (zeta, zeta + eta)`.
///
/// For `zeta > 0` the eigenvalue problem is solved with the transformed kernel and
/// `sigma - zeta`; the residual is always evaluated against the original kernel and `f`.
pub fn solve_sigma(kernel: &Kernel, params: &BilinearNonlinearity, sigma: f64, opts: &SolveOptions) -> Result<Solution> {
    params.check_admissible(sigma)?;
    if opts.spacing.is_nan() || opts.spacing <= 0.0 || opts.half_width.is_nan() || opts.half_width <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need positive spacing and half-width, got {} and {}",
            opts.spacing, opts.half_width
        )));
    }
    let (working, transform, target) = if params.zeta > 0.0 {
        let (sigma_tilde, mu) = transform_parameters(sigma, params.zeta)?;
        let width = transform_half_width(kernel, mu, opts.tol_transform);
        let tgrid = Grid::new(width, opts.spacing)?;
        let tk = transform_kernel(kernel, mu, &tgrid, opts.tol_transform)?;
        let record = TransformRecord {
            mu,
            sigma_tilde,
            half_width: tgrid.half_width(),
            truncation_depth: tk.truncation_depth,
            truncation_bound: tk.truncation_bound,
            renormalization: tk.renormalization,
            mass_leak: tk.mass_leak,
        };
        (tk.to_kernel()?, Some(record), sigma_tilde / params.eta)
    } else {
        (kernel.clone(), None, sigma / params.eta)
    };

    let inv = invert_lambda(
        &working,
        target,
        InvertOptions {
            spacing: opts.spacing,
            max_xi: opts.half_width,
            tol_lambda: opts.tol_bisect,
            power: opts.power(),
        },
    )?;
    let pair = inv.pair;
    let xi = pair.xi();
    let m = pair.cutoff.cells();
    let h = pair.cutoff.spacing();

    let reach = match &transform {
        Some(t) => t.half_width,
        None => working.reach(),
    };
    let grid = Grid::with_half_points(((opts.half_width.max(xi + reach)) / h).ceil() as usize, h)?;
    let n = grid.len();
    let c = grid.center();

    // u~(x_i) = -h sum_{k >= i} v_k, zero from the cut-off on
    let mut tail = vec![0.0; m + 1];
    for k in (0..m).rev() {
        tail[k] = tail[k + 1] - h * pair.v.values()[k];
    }
    let u_tilde: Vec<f64> = (0..n).map(|i| tail.get(i.abs_diff(c)).copied().unwrap_or(0.0)).collect();

    let taps = working.offsets(h, n);
    let conv = kernel_convolve(&taps, &u_tilde, h);
    let tau = params.theta / conv[c + m];
    let u: Vec<f64> = conv.iter().map(|x| tau * x).collect();

    let u = GridFn::new(grid, u)?;
    let residual_rel = residual_unchecked(kernel, params, sigma, &u);
    Ok(Solution {
        sigma,
        params: *params,
        kernel: kernel.label().to_string(),
        transform,
        xi,
        lambda: pair.lambda,
        lambda_target: target,
        v: pair.v,
        u_tilde: GridFn::new(grid, u_tilde)?,
        tau,
        u,
        residual_rel,
        options: *opts,
    })
}

/// `||sigma u - a * f(u)|| / ||sigma u||` on the grid of `u`.
pub fn residual(kernel: &Kernel, params: &BilinearNonlinearity, sigma: f64, u: &GridFn) -> Result<f64> {
    let floor = -1e-12 * u.norm_inf();
    if let Some(x) = u.values().iter().find(|&&x| x < floor) {
        return Err(Error::Domain(format!("profile must be nonnegative, found {x}")));
    }
    Ok(residual_unchecked(kernel, params, sigma, u))
}

fn residual_unchecked(kernel: &Kernel, params: &BilinearNonlinearity, sigma: f64, u: &GridFn) -> f64 {
    let g = u.grid();
    let h = g.spacing();
    let fu: Vec<f64> = u.values().iter().map(|&r| params.f(r)).collect();
    let conv = kernel_convolve(&kernel.offsets(h, g.len()), &fu, h);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&ui, ci) in u.values().iter().zip(conv) {
        num += (sigma * ui - ci).powi(2);
        den += (sigma * ui).powi(2);
    }
    num.sqrt() / den.sqrt().max(1e-300)
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub sigma: f64,
    pub summary: Option<SolutionSummary>,
    pub inadmissible: bool,
    pub error: Option<String>,
}

/// Solves for each `sigma` in order; failures are recorded per entry.
pub fn sweep(kernel: &Kernel, params: &BilinearNonlinearity, sigmas: &[f64], opts: &SolveOptions) -> Vec<SweepEntry> {
    sigmas
        .iter()
        .map(|&sigma| match solve_sigma(kernel, params, sigma, opts) {
            Ok(s) => SweepEntry { sigma, summary: Some(s.summary()), inadmissible: false, error: None },
            Err(e) => SweepEntry {
                sigma,
                summary: None,
                inadmissible: matches!(e, Error::Inadmissible { .. }),
                error: Some(e.to_string()),
            },
        })
        .collect()
}
