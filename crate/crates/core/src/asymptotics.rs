//! Numerical probes of the small- and large-eigenvalue scaling laws.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cutoff::Cutoff;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::Kernel;
use crate::kr_solver::{eigencurve, power_method, PowerOptions};
use crate::nonlinear::{cosine, solve_sigma, BilinearNonlinearity, SolutionSummary, SolveOptions};
use crate::transform::{transform_half_width, transform_kernel, TransformedKernel};

/// Cut-off at which the large-`xi` eigenvalue tail is sampled.
pub const TAIL_XI: f64 = 20.0;

/// Stride (in cells) of the five-point second difference used for `kappa_2`.
pub const KAPPA_STRIDE: usize = 4;

/// Least-squares power law `ordinate ~ prefactor * abscissa^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub abscissa: Vec<f64>,
    pub ordinate: Vec<f64>,
    pub exponent: f64,
    pub prefactor: f64,
    /// Prefactor with the exponent held at its predicted value.
    pub fixed_exponent_prefactor: f64,
    pub predicted_exponent: f64,
    pub predicted_prefactor: Option<f64>,
    pub r_squared: f64,
}

impl ScalingFit {
    /// Fits `log |ordinate|` against `log abscissa`; needs at least four points with
    /// strictly monotone positive abscissae.
    pub fn new(abscissa: Vec<f64>, ordinate: Vec<f64>, predicted_exponent: f64, predicted_prefactor: Option<f64>) -> Result<Self> {
        if abscissa.len() != ordinate.len() {
            return Err(Error::InvalidParameter("abscissa and ordinate differ in length".into()));
        }
        if abscissa.len() < 4 {
            return Err(Error::InvalidParameter(format!("a scaling fit needs at least 4 points, got {}", abscissa.len())));
        }
        let increasing = abscissa.windows(2).all(|w| w[1] > w[0]);
        let decreasing = abscissa.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidParameter("abscissa must be strictly monotone".into()));
        }
        if abscissa.iter().chain(&ordinate).any(|&v| !(v.is_finite() && v != 0.0)) || abscissa.iter().any(|&x| x <= 0.0) {
            return Err(Error::InvalidParameter("scaling fit needs positive abscissae and nonzero ordinates".into()));
        }
        let lx: Vec<f64> = abscissa.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ordinate.iter().map(|y| y.abs().ln()).collect();
        let n = lx.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
        let exponent = sxy / sxx;
        let intercept = my - exponent * mx;
        let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
        let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
        let fixed = (ly.iter().zip(&lx).map(|(y, x)| y - predicted_exponent * x).sum::<f64>() / n).exp();
        Ok(Self {
            abscissa,
            ordinate,
            exponent,
            prefactor: intercept.exp(),
            fixed_exponent_prefactor: fixed,
            predicted_exponent,
            predicted_prefactor,
            r_squared,
        })
    }

    pub fn exponent_deviation(&self) -> f64 {
        (self.exponent - self.predicted_exponent).abs()
    }

    /// Relative deviation of the fixed-exponent prefactor from the prediction.
    pub fn prefactor_deviation(&self) -> Option<f64> {
        self.predicted_prefactor.map(|p| (self.fixed_exponent_prefactor - p).abs() / p.abs())
    }

    /// Prediction at `x`, or `NaN` without a predicted prefactor.
    pub fn predicted_at(&self, x: f64) -> f64 {
        self.predicted_prefactor.map_or(f64::NAN, |p| p * x.powf(self.predicted_exponent))
    }
}

/// `m = (1/2) int y^2 a(y) dy`.
pub fn half_second_moment(kernel: &Kernel) -> f64 {
    0.5 * kernel.meta().second_moment
}

/// Kernel moments and the amplitude/curvature ratios of the transformed kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentData {
    pub m: f64,
    pub a0: f64,
    pub a2pp: Option<f64>,
    /// `sigma - zeta` at which the ratios were sampled.
    pub gaps: Vec<f64>,
    /// `(sigma - zeta)^{-1/2} a~(0)`.
    pub kappa0: Vec<f64>,
    /// `(sigma - zeta)^{-1} |a~''(0)|`.
    pub kappa2: Vec<f64>,
    /// Values extrapolated to `sigma = zeta` in powers of `sqrt(sigma - zeta)`.
    pub kappa0_limit: f64,
    pub kappa2_limit: f64,
}

/// Small-`xi` law `lambda_xi ~ (2/3) |a''(0)| xi^3`.
pub fn check_cubic_law(kernel: &Kernel, xis: &[f64], h: f64, power: PowerOptions) -> Result<ScalingFit> {
    let a2 = curvature(kernel)?;
    let curve = eigencurve(kernel, xis, h, power)?;
    let mut lambdas = Vec::with_capacity(xis.len());
    for p in &curve.points {
        if let Some(e) = &p.error {
            return Err(Error::InvalidParameter(format!("eigenpair at xi = {} failed: {e}", p.xi)));
        }
        lambdas.push(p.lambda);
    }
    ScalingFit::new(xis.to_vec(), lambdas, 3.0, Some(2.0 / 3.0 * a2))
}

fn curvature(kernel: &Kernel) -> Result<f64> {
    match kernel.meta().a2pp {
        Some(v) if v < 0.0 => Ok(v.abs()),
        _ => Err(Error::UnsupportedKernel(
            kernel.label().to_string(),
            "the small-sigma law needs a kernel that is twice differentiable at 0 with a''(0) < 0".into(),
        )),
    }
}

/// Large-`xi` tail `(1 - lambda_xi) xi^2` against `pi^2 m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailProbe {
    pub xi: f64,
    pub lambda: f64,
    pub scaled: f64,
    pub predicted: f64,
}

pub fn eigen_tail(kernel: &Kernel, xi: f64, h: f64, power: PowerOptions) -> Result<TailProbe> {
    let p = power_method(kernel, Cutoff::resolved(xi, h)?, power)?;
    Ok(TailProbe {
        xi,
        lambda: p.lambda,
        scaled: (1.0 - p.lambda) * xi * xi,
        predicted: PI * PI * half_second_moment(kernel),
    })
}

/// Outcome of [`check_small_sigma`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallSigmaReport {
    /// `xi_sigma` against `sigma`.
    pub fit: ScalingFit,
    /// `sigma^{-1/3} xi_sigma`.
    pub scaled_xi: Vec<f64>,
    pub predicted_constant: f64,
    /// `sup |u_sigma - theta a / a(0)|`.
    pub sup_distance: Vec<f64>,
    /// `|cos|` between the rescaled `w` and `1 - x^2`.
    pub profile_cosine: Vec<f64>,
    pub solutions: Vec<SolutionSummary>,
}

/// Probes `xi_sigma ~ C sigma^{1/3}` and `u_sigma -> theta a / a(0)` as `sigma -> 0`
/// for `zeta = 0`.
pub fn check_small_sigma(
    kernel: &Kernel,
    params: &BilinearNonlinearity,
    sigmas: &[f64],
    opts: &SolveOptions,
) -> Result<SmallSigmaReport> {
    let a2 = curvature(kernel)?;
    if params.zeta != 0.0 {
        return Err(Error::InvalidParameter(format!("the small-sigma probe needs zeta = 0, got {}", params.zeta)));
    }
    if sigmas.len() < 4 {
        return Err(Error::InvalidParameter("the small-sigma probe needs at least 4 values".into()));
    }
    if let Some(s) = sigmas.iter().find(|&&s| !(s > 0.0 && s <= params.eta / 10.0)) {
        return Err(Error::OutOfRange(format!("sigma = {s} is outside (0, eta/10]")));
    }
    let predicted_constant = (3.0 / (2.0 * params.eta * a2)).cbrt();
    let a0 = kernel.meta().a0;
    let mut xis = Vec::new();
    let mut sup_distance = Vec::new();
    let mut profile_cosine = Vec::new();
    let mut solutions = Vec::new();
    for &sigma in sigmas {
        let s = solve_sigma(kernel, params, sigma, opts)?;
        let g = s.grid();
        let limit_gap = s
            .u
            .values()
            .iter()
            .enumerate()
            .map(|(i, &u)| (u - params.theta * kernel.eval(g.point(i)) / a0).abs())
            .fold(0.0, f64::max);
        let (xb, wb) = s.rescaled_w();
        let shape: Vec<f64> = xb.iter().map(|x| 1.0 - x * x).collect();
        xis.push(s.xi);
        sup_distance.push(limit_gap);
        profile_cosine.push(cosine(&wb, &shape).abs());
        solutions.push(s.summary());
    }
    let scaled_xi = sigmas.iter().zip(&xis).map(|(s, x)| x / s.cbrt()).collect();
    let fit = ScalingFit::new(sigmas.to_vec(), xis, 1.0 / 3.0, Some(predicted_constant))?;
    Ok(SmallSigmaReport { fit, scaled_xi, predicted_constant, sup_distance, profile_cosine, solutions })
}

/// Outcome of [`check_large_sigma`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargeSigmaReport {
    /// `zeta + eta - sigma`.
    pub gaps: Vec<f64>,
    /// `xi_sigma` against the gap.
    pub xi_fit: ScalingFit,
    /// `||u_sigma||_2` against the gap.
    pub norm_fit: ScalingFit,
    /// `gap^{1/2} xi_sigma`.
    pub scaled_xi: Vec<f64>,
    pub predicted_constant: f64,
    /// `|cos|` between the rescaled `w` and `1 + cos(pi x)`.
    pub profile_cosine: Vec<f64>,
    pub m: f64,
    /// `m` from the eigenvalue tail at [`TAIL_XI`].
    pub m_from_tail: f64,
    /// `m` from `gap xi^2 / (pi^2 eta)` at the smallest gap.
    pub m_from_scaling: f64,
    pub solutions: Vec<SolutionSummary>,
}

/// Probes `xi_sigma ~ pi (m eta / gap)^{1/2}` and the growth of `||u_sigma||_2` as
/// `sigma -> zeta + eta`. For `zeta > 0`, `m` comes from the transformed kernel at
/// `mu = zeta / (zeta + eta)`.
pub fn check_large_sigma(
    kernel: &Kernel,
    params: &BilinearNonlinearity,
    sigmas: &[f64],
    opts: &SolveOptions,
) -> Result<LargeSigmaReport> {
    for &s in sigmas {
        params.check_admissible(s)?;
    }
    let (limit_kernel, m) = if params.zeta > 0.0 {
        let mu = params.zeta / (params.zeta + params.eta);
        let tk = limit_transform(kernel, mu, opts)?;
        let m = 0.5 * tk.second_moment();
        (tk.to_kernel()?, m)
    } else {
        (kernel.clone(), half_second_moment(kernel))
    };
    let predicted_constant = PI * (m * params.eta).sqrt();
    let top = params.zeta + params.eta;
    let gaps: Vec<f64> = sigmas.iter().map(|s| top - s).collect();

    let mut xis = Vec::new();
    let mut norms = Vec::new();
    let mut profile_cosine = Vec::new();
    let mut solutions = Vec::new();
    for &sigma in sigmas {
        let s = solve_sigma(kernel, params, sigma, opts)?;
        let (xb, wb) = s.rescaled_w();
        let shape: Vec<f64> = xb.iter().map(|x| 1.0 + (PI * x).cos()).collect();
        xis.push(s.xi);
        norms.push(s.u.norm_l2());
        profile_cosine.push(cosine(&wb, &shape).abs());
        solutions.push(s.summary());
    }
    let scaled_xi: Vec<f64> = gaps.iter().zip(&xis).map(|(g, x)| g.sqrt() * x).collect();
    let tail = eigen_tail(&limit_kernel, TAIL_XI, opts.spacing, opts.power())?;
    let m_from_tail = tail.scaled / (PI * PI);
    let smallest = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let m_from_scaling = gaps.get(smallest).map_or(f64::NAN, |g| g * xis[smallest].powi(2) / (PI * PI * params.eta));
    let xi_fit = ScalingFit::new(gaps.clone(), xis, -0.5, Some(predicted_constant))?;
    let norm_fit = ScalingFit::new(gaps.clone(), norms, -0.75, None)?;
    Ok(LargeSigmaReport {
        gaps,
        xi_fit,
        norm_fit,
        scaled_xi,
        predicted_constant,
        profile_cosine,
        m,
        m_from_tail,
        m_from_scaling,
        solutions,
    })
}

fn limit_transform(kernel: &Kernel, mu: f64, opts: &SolveOptions) -> Result<TransformedKernel> {
    let grid = Grid::new(transform_half_width(kernel, mu, opts.tol_transform), opts.spacing)?;
    transform_kernel(kernel, mu, &grid, opts.tol_transform)
}

/// Outcome of [`check_kappa`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaReport {
    pub moments: MomentData,
    pub xi: Vec<f64>,
    /// Limit of `xi_sigma` predicted from the extrapolated `kappa_2`.
    pub predicted_xi_limit: f64,
    /// `sup |u_sigma - theta|` over the cut-off interval, i.e. `u_sigma(0) - theta`.
    pub sup_distance: Vec<f64>,
    pub solutions: Vec<SolutionSummary>,
}

/// Samples the transformed kernel's amplitude and curvature as `sigma -> zeta` and the
/// approach of `u_sigma` to `theta`.
pub fn check_kappa(
    kernel: &Kernel,
    params: &BilinearNonlinearity,
    sigmas: &[f64],
    opts: &SolveOptions,
) -> Result<KappaReport> {
    if params.zeta <= 0.0 {
        return Err(Error::InvalidParameter("the kappa probe needs zeta > 0".into()));
    }
    if sigmas.is_empty() {
        return Err(Error::InvalidParameter("the kappa probe needs at least one sigma".into()));
    }
    let mut gaps = Vec::new();
    let mut kappa0 = Vec::new();
    let mut kappa2 = Vec::new();
    let mut xi = Vec::new();
    let mut sup_distance = Vec::new();
    let mut solutions = Vec::new();
    for &sigma in sigmas {
        params.check_admissible(sigma)?;
        let s_gap = sigma - params.zeta;
        let tk = limit_transform(kernel, params.zeta / sigma, opts)?;
        gaps.push(s_gap);
        kappa0.push(tk.peak() / s_gap.sqrt());
        kappa2.push(tk.second_derivative_at_origin(KAPPA_STRIDE).abs() / s_gap);

        let s = solve_sigma(kernel, params, sigma, opts)?;
        let c = s.grid().center();
        let m = s.cells();
        let dist = s.u.values()[c - m..=c + m]
            .iter()
            .map(|u| (u - params.theta).abs())
            .fold(0.0, f64::max);
        xi.push(s.xi);
        sup_distance.push(dist);
        solutions.push(s.summary());
    }
    let kappa0_limit = extrapolate_sqrt(&gaps, &kappa0);
    let kappa2_limit = extrapolate_sqrt(&gaps, &kappa2);
    let predicted_xi_limit = (3.0 / (2.0 * params.eta * kappa2_limit)).cbrt();
    Ok(KappaReport {
        moments: MomentData {
            m: half_second_moment(kernel),
            a0: kernel.meta().a0,
            a2pp: kernel.meta().a2pp,
            gaps,
            kappa0,
            kappa2,
            kappa0_limit,
            kappa2_limit,
        },
        xi,
        predicted_xi_limit,
        sup_distance,
        solutions,
    })
}

/// Value at `s = 0` of the interpolant `c0 + c1 sqrt(s) + c2 s` through the last three
/// points (fewer points lower the degree).
pub fn extrapolate_sqrt(s: &[f64], y: &[f64]) -> f64 {
    let n = s.len().min(y.len());
    match n {
        0 => f64::NAN,
        1 => y[0],
        2 => {
            let (r0, r1) = (s[0].sqrt(), s[1].sqrt());
            (y[0] * r1 - y[1] * r0) / (r1 - r0)
        }
        _ => {
            let (s, y) = (&s[n - 3..n], &y[n - 3..n]);
            let r: Vec<f64> = s.iter().map(|v| v.sqrt()).collect();
            // Lagrange form in the variable r with basis {1, r, r^2}
            (0..3)
                .map(|i| {
                    let others: Vec<usize> = (0..3).filter(|&j| j != i).collect();
                    let w: f64 = others.iter().map(|&j| (0.0 - r[j]) / (r[i] - r[j])).product();
                    w * y[i]
                })
                .sum()
        }
    }
}
