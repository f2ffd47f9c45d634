//! Krein-Rutman eigenpairs of the cut-off operator by power iteration, the eigencurve
//! `xi -> lambda_xi`, and its inversion.

use serde::Serialize;

use crate::cutoff::{full_norm, Cutoff, CutoffOperator, OddProfile};
use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// Eigenvalues below this are reported as exactly zero.
pub const LAMBDA_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerOptions {
    /// Bound on `||A v - lambda v||`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 100_000 }
    }
}

impl PowerOptions {
    fn check(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 || self.max_iter == 0 {
            return Err(Error::InvalidParameter(format!(
                "power method needs tol > 0 and max_iter > 0, got {} and {}",
                self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

/// Leading eigenvalue and normalized eigenfunction of `A_xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub cutoff: Cutoff,
    pub lambda: f64,
    /// Unit norm, nonpositive on the positive half-line. For a degenerate pair this is
    /// the normalized start vector and carries no spectral information.
    pub v: OddProfile,
    pub iterations: usize,
    pub residual: f64,
    /// The operator annihilated the iterate (`lambda < LAMBDA_FLOOR`).
    pub degenerate: bool,
}

impl EigenPair {
    pub fn xi(&self) -> f64 {
        self.cutoff.xi()
    }
}

/// Power iteration from `-sgn(x) chi_xi`.
pub fn power_method(kernel: &Kernel, cutoff: Cutoff, opts: PowerOptions) -> Result<EigenPair> {
    let op = CutoffOperator::new(kernel, cutoff);
    power_iterate(&op, None, opts)
}

/// Power iteration on a prepared operator, optionally warm-started from a profile in the
/// negative cone (resampled to the operator's cells if needed).
pub fn power_iterate(op: &CutoffOperator, start: Option<&OddProfile>, opts: PowerOptions) -> Result<EigenPair> {
    opts.check()?;
    let m = op.cells();
    let h = op.spacing();
    let mut v = match start {
        Some(s) if s.cells() > 0 && s.norm_inf() > 0.0 => resample(s.values(), m),
        _ => vec![-1.0; m],
    };
    normalize(&mut v, h);
    let start_vec = v.clone();

    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let y = op.apply(&v);
        let lambda = full_norm(&y, h);
        if lambda < LAMBDA_FLOOR {
            return Ok(EigenPair {
                cutoff: op.cutoff(),
                lambda: 0.0,
                v: OddProfile::new(h, start_vec)?,
                iterations: it,
                residual: lambda,
                degenerate: true,
            });
        }
        let diff: Vec<f64> = y.iter().zip(&v).map(|(a, b)| a - lambda * b).collect();
        residual = full_norm(&diff, h);
        if residual <= opts.tol {
            if v.iter().sum::<f64>() > 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            return Ok(EigenPair {
                cutoff: op.cutoff(),
                lambda,
                v: OddProfile::new(h, v)?,
                iterations: it,
                residual,
                degenerate: false,
            });
        }
        v = y.into_iter().map(|x| x / lambda).collect();
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, residual })
}

fn normalize(v: &mut [f64], h: f64) {
    let n = full_norm(v, h);
    v.iter_mut().for_each(|x| *x /= n);
}

/// Nearest-cell resampling by index scaling.
fn resample(src: &[f64], m: usize) -> Vec<f64> {
    if src.len() == m {
        return src.to_vec();
    }
    let ratio = src.len() as f64 / m as f64;
    (0..m)
        .map(|j| src[(((j as f64 + 0.5) * ratio) as usize).min(src.len() - 1)])
        .collect()
}

/// One row of an eigencurve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub xi: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub error: Option<String>,
}

/// `lambda_xi` over a list of cut-offs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCurve {
    pub kernel: String,
    pub spacing: f64,
    pub points: Vec<CurvePoint>,
}

/// Evaluates `lambda_xi` for increasing `xis`, each at cell width close to `h`.
/// Entries that fail are recorded and do not abort the sweep.
pub fn eigencurve(kernel: &Kernel, xis: &[f64], h: f64, opts: PowerOptions) -> Result<EigenCurve> {
    if let Some(x) = xis.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(format!("cut-offs must be positive, got {x}")));
    }
    if xis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("cut-offs must be strictly increasing".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {h}")));
    }
    opts.check()?;
    let points = xis
        .iter()
        .map(|&xi| match Cutoff::resolved(xi, h).and_then(|c| power_method(kernel, c, opts)) {
            Ok(p) => CurvePoint { xi, lambda: p.lambda, iterations: p.iterations, residual: p.residual, error: None },
            Err(e) => CurvePoint {
                xi,
                lambda: f64::NAN,
                iterations: 0,
                residual: f64::NAN,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(EigenCurve { kernel: kernel.label().to_string(), spacing: h, points })
}

/// Options for [`invert_lambda`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvertOptions {
    /// Target cell width.
    pub spacing: f64,
    /// Largest admissible cut-off.
    pub max_xi: f64,
    /// Bound on `|lambda_xi - target|`.
    pub tol_lambda: f64,
    pub power: PowerOptions,
}

/// Result of [`invert_lambda`].
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    pub pair: EigenPair,
    pub target: f64,
    /// Number of eigenpairs evaluated.
    pub probes: usize,
}

struct Prober<'a> {
    kernel: &'a Kernel,
    power: PowerOptions,
    last: Option<OddProfile>,
    probes: usize,
}

impl Prober<'_> {
    fn eval(&mut self, cutoff: Cutoff) -> Result<EigenPair> {
        let op = CutoffOperator::new(self.kernel, cutoff);
        let pair = power_iterate(&op, self.last.as_ref(), self.power)?;
        self.probes += 1;
        if !pair.degenerate {
            self.last = Some(pair.v.clone());
        }
        Ok(pair)
    }
}

/// Finds `xi` with `|lambda_xi - target| <= tol_lambda`.
///
/// A bracket grows geometrically from `[h, 1]` and is narrowed by bisection with the
/// cell width held near `h`; once the bracket spans a few cells the cell count is frozen
/// so that `lambda` depends continuously on `xi`, and bisection continues to tolerance.
pub fn invert_lambda(kernel: &Kernel, target: f64, opts: InvertOptions) -> Result<Inversion> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::OutOfRange(format!("target eigenvalue {target} is outside (0, 1)")));
    }
    let h = opts.spacing;
    if !(h > 0.0 && h.is_finite()) || opts.tol_lambda.is_nan() || opts.tol_lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "inversion needs positive spacing and tolerance, got {h} and {}",
            opts.tol_lambda
        )));
    }
    if opts.max_xi.is_nan() || opts.max_xi < 1.0 {
        return Err(Error::GridTooSmall(format!("half-width {} is below the initial bracket", opts.max_xi)));
    }
    let mut prober = Prober { kernel, power: opts.power, last: None, probes: 0 };

    let mut hi = 1.0;
    let mut p_hi = prober.eval(Cutoff::resolved(hi, h)?)?;
    let mut lo = h;
    while p_hi.lambda < target {
        lo = hi;
        hi *= 2.0;
        if hi > opts.max_xi {
            if lo >= opts.max_xi {
                return Err(Error::GridTooSmall(format!(
                    "lambda = {} at xi = {lo} is still below the target {target}",
                    p_hi.lambda
                )));
            }
            hi = opts.max_xi;
        }
        p_hi = prober.eval(Cutoff::resolved(hi, h)?)?;
    }
    if lo == h {
        let p_lo = prober.eval(Cutoff::resolved(lo, h)?)?;
        if p_lo.lambda >= target {
            return Err(Error::OutOfRange(format!(
                "target {target} is below the resolvable eigenvalue {} at xi = {lo}",
                p_lo.lambda
            )));
        }
    }

    // phase 1: the cell count follows xi
    while hi - lo > 4.0 * h {
        if (p_hi.lambda - target).abs() <= opts.tol_lambda {
            return Ok(Inversion { pair: p_hi, target, probes: prober.probes });
        }
        let mid = 0.5 * (lo + hi);
        let p = prober.eval(Cutoff::resolved(mid, h)?)?;
        if p.lambda < target {
            lo = mid;
        } else {
            hi = mid;
            p_hi = p;
        }
    }

    // phase 2: frozen cell count
    let frozen = Cutoff::resolved(0.5 * (lo + hi), h)?;
    let at = |xi: f64| frozen.rescaled(xi);
    let mut p_lo = prober.eval(at(lo)?)?;
    let mut p_hi = prober.eval(at(hi)?)?;
    let mut step = hi - lo;
    while p_lo.lambda > target {
        lo = (lo - step).max(0.5 * lo);
        step *= 2.0;
        p_lo = prober.eval(at(lo)?)?;
    }
    while p_hi.lambda < target {
        hi += step;
        step *= 2.0;
        if hi > opts.max_xi {
            return Err(Error::GridTooSmall(format!("bracket for target {target} passes {}", opts.max_xi)));
        }
        p_hi = prober.eval(at(hi)?)?;
    }
    for _ in 0..200 {
        for p in [&p_lo, &p_hi] {
            if (p.lambda - target).abs() <= opts.tol_lambda {
                return Ok(Inversion { pair: p.clone(), target, probes: prober.probes });
            }
        }
        // secant-guided bisection: regula falsi point clamped to the middle half
        let t = ((target - p_lo.lambda) / (p_hi.lambda - p_lo.lambda)).clamp(0.25, 0.75);
        let mid = lo + t * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = prober.eval(at(mid)?)?;
        if p.lambda < target {
            lo = mid;
            p_lo = p;
        } else {
            hi = mid;
            p_hi = p;
        }
    }
    Err(Error::Bisection(format!(
        "could not reach |lambda - {target}| <= {} (bracket [{lo}, {hi}], lambda in [{}, {}])",
        opts.tol_lambda, p_lo.lambda, p_hi.lambda
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::{cone_membership, rayleigh, test_profile};

    fn opts() -> PowerOptions {
        PowerOptions::default()
    }

    #[test]
    fn indicator_regime_one_is_degenerate() {
        let p = power_method(&Kernel::indicator(), Cutoff::resolved(0.2, 1e-3).unwrap(), opts()).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.lambda, 0.0);
        assert!((p.v.norm_l2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenpair_is_normalized_and_in_cone() {
        for xi in [0.3, 1.0, 4.0] {
            let c = Cutoff::resolved(xi, 5e-3).unwrap();
            let p = power_method(&Kernel::gaussian(), c, opts()).unwrap();
            assert!((p.v.norm_l2() - 1.0).abs() < 1e-12);
            assert!(p.residual <= 1e-10);
            assert!(p.lambda > 0.0 && p.lambda < 1.0);
            assert!(cone_membership(&p.v, c).in_refined_cone, "xi = {xi}");
        }
    }

    #[test]
    fn lambda_dominates_test_function_rayleigh_quotient() {
        for (k, xi) in [(Kernel::indicator(), 1.0), (Kernel::gaussian(), 0.7), (Kernel::tent(), 2.5)] {
            let c = Cutoff::resolved(xi, 2e-3).unwrap();
            let p = power_method(&k, c, opts()).unwrap();
            let r = rayleigh(&k, c, &test_profile(c, c.cells())).unwrap();
            assert!(p.lambda >= r - 1e-9, "{}: {} < {r}", k.label(), p.lambda);
        }
    }

    #[test]
    fn eigencurve_rejects_unsorted_input() {
        assert!(eigencurve(&Kernel::gaussian(), &[1.0, 0.5], 0.01, opts()).is_err());
        let empty = eigencurve(&Kernel::gaussian(), &[], 0.01, opts()).unwrap();
        assert!(empty.points.is_empty());
    }

    #[test]
    fn eigencurve_records_failures() {
        let strict = PowerOptions { tol: 1e-14, max_iter: 3 };
        let curve = eigencurve(&Kernel::gaussian(), &[1.0, 2.0], 0.01, strict).unwrap();
        assert!(curve.points.iter().all(|p| p.error.is_some()));
    }

    #[test]
    fn inversion_round_trip() {
        let h = 2e-3;
        let p = power_method(&Kernel::gaussian(), Cutoff::resolved(1.0, h).unwrap(), opts()).unwrap();
        let inv = invert_lambda(
            &Kernel::gaussian(),
            p.lambda,
            InvertOptions { spacing: h, max_xi: 10.0, tol_lambda: 1e-8, power: opts() },
        )
        .unwrap();
        assert!((inv.pair.xi() - 1.0).abs() <= 2.0 * h, "{}", inv.pair.xi());
        assert!((inv.pair.lambda - p.lambda).abs() <= 1e-8);
    }

    #[test]
    fn inversion_errors() {
        let o = InvertOptions { spacing: 1e-2, max_xi: 2.0, tol_lambda: 1e-8, power: opts() };
        assert!(matches!(invert_lambda(&Kernel::gaussian(), 1.0, o), Err(Error::OutOfRange(_))));
        assert!(matches!(invert_lambda(&Kernel::gaussian(), 0.0, o), Err(Error::OutOfRange(_))));
        assert!(matches!(invert_lambda(&Kernel::gaussian(), 0.99, o), Err(Error::GridTooSmall(_))));
    }

    #[test]
    fn indicator_inversion_lands_past_quarter() {
        let o = InvertOptions { spacing: 1e-3, max_xi: 10.0, tol_lambda: 1e-8, power: opts() };
        let inv = invert_lambda(&Kernel::indicator(), 0.05, o).unwrap();
        assert!(inv.pair.xi() > 0.25);
    }
}
