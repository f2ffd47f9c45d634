//! Convolution kernels: the three built-in shapes, user tables, and validation.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFn};

/// Analytic facts about a kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelMeta {
    /// `a(0)`.
    pub a0: f64,
    /// `a''(0)`; `None` where the kernel is not twice differentiable at the origin.
    pub a2pp: Option<f64>,
    /// `int y^2 a(y) dy`.
    pub second_moment: f64,
    /// Largest `p >= 0` with `a` constant on `[0, p]`.
    pub plateau_half_width: f64,
    /// `a'(x) < 0` for every `x > 0`.
    pub strictly_unimodal: bool,
    /// `None` for kernels with unbounded support.
    pub support_half_width: Option<f64>,
}

#[derive(Debug, Clone)]
enum Shape {
    Gaussian,
    Tent,
    Indicator,
    Table(Table),
}

/// Linear interpolant through `(x_k, a_k)`, zero outside the table.
#[derive(Debug, Clone)]
struct Table {
    xs: Vec<f64>,
    values: Vec<f64>,
    /// Only `x >= 0` was supplied; the kernel is the even extension.
    one_sided: bool,
    /// `(x_0, dx)` when the abscissae are equispaced.
    uniform: Option<(f64, f64)>,
}

impl Table {
    fn eval(&self, x: f64) -> f64 {
        let x = if self.one_sided { x.abs() } else { x };
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let k = match self.uniform {
            Some((x0, dx)) => (((x - x0) / dx).floor() as usize).min(n - 2),
            None => self.xs.partition_point(|&p| p <= x).saturating_sub(1).min(n - 2),
        };
        let (x1, x2) = (self.xs[k], self.xs[k + 1]);
        let t = ((x - x1) / (x2 - x1)).clamp(0.0, 1.0);
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }
}

/// An even, nonnegative, unimodal convolution kernel.
#[derive(Debug, Clone)]
pub struct Kernel {
    label: String,
    shape: Shape,
    meta: KernelMeta,
}

impl Kernel {
    /// `exp(-x^2) / sqrt(pi)`.
    pub fn gaussian() -> Self {
        let a0 = 1.0 / PI.sqrt();
        Self {
            label: "gaussian".into(),
            shape: Shape::Gaussian,
            meta: KernelMeta {
                a0,
                a2pp: Some(-2.0 * a0),
                second_moment: 0.5,
                plateau_half_width: 0.0,
                strictly_unimodal: true,
                support_half_width: None,
            },
        }
    }

    /// `max(0, 1 - |x|)`.
    pub fn tent() -> Self {
        Self {
            label: "tent".into(),
            shape: Shape::Tent,
            meta: KernelMeta {
                a0: 1.0,
                a2pp: None,
                second_moment: 1.0 / 6.0,
                plateau_half_width: 0.0,
                strictly_unimodal: false,
                support_half_width: Some(1.0),
            },
        }
    }

    /// Indicator of `[-1/2, 1/2]`.
    pub fn indicator() -> Self {
        Self {
            label: "indicator".into(),
            shape: Shape::Indicator,
            meta: KernelMeta {
                a0: 1.0,
                a2pp: Some(0.0),
                second_moment: 1.0 / 12.0,
                plateau_half_width: 0.5,
                strictly_unimodal: false,
                support_half_width: Some(0.5),
            },
        }
    }

    /// Kernel from samples `(x_k, a_k)` with strictly increasing `x_k`, one of which is 0.
    ///
    /// A table that starts at `x = 0` is extended evenly.
    pub fn from_table(label: impl Into<String>, xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(Error::Table(format!("{} abscissae but {} values", xs.len(), values.len())));
        }
        if xs.len() < 2 {
            return Err(Error::Table("need at least two samples".into()));
        }
        if xs.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Table("non-finite entry".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Table("x must be strictly increasing".into()));
        }
        if !xs.contains(&0.0) {
            return Err(Error::Table("table must contain x = 0".into()));
        }
        let one_sided = xs[0] == 0.0;
        let dx0 = xs[1] - xs[0];
        let uniform = xs
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dx0).abs() <= 1e-9 * dx0)
            .then_some((xs[0], dx0));
        let table = Table { xs, values, one_sided, uniform };
        let meta = table_meta(&table);
        Ok(Self { label: label.into(), shape: Shape::Table(table), meta })
    }

    /// Reads a two-column `x,a` CSV; lines starting with `#` are ignored.
    pub fn from_csv_reader(label: impl Into<String>, reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "a" {
            return Err(Error::Table(format!("expected header `x,a`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Table(format!("row {}: `{s}`: {e}", line + 1)))
            };
            xs.push(parse(&record[0])?);
            values.push(parse(&record[1])?);
        }
        Self::from_table(label, xs, values)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(format!("file:{}", path.display()), file)
    }

    /// Parses `gaussian`, `tent`, `indicator` or `file:<path>`.
    pub fn from_selector(selector: &str) -> Result<Self> {
        match selector {
            "gaussian" => Ok(Self::gaussian()),
            "tent" => Ok(Self::tent()),
            "indicator" => Ok(Self::indicator()),
            s => match s.strip_prefix("file:") {
                Some(path) => Self::from_csv_path(path),
                None => Err(Error::InvalidParameter(format!(
                    "unknown kernel `{s}` (expected gaussian, tent, indicator or file:<path>)"
                ))),
            },
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn meta(&self) -> &KernelMeta {
        &self.meta
    }

    pub fn is_table(&self) -> bool {
        matches!(self.shape, Shape::Table(_))
    }

    /// Pointwise value `a(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Gaussian => (-x * x).exp() / PI.sqrt(),
            Shape::Tent => (1.0 - x.abs()).max(0.0),
            Shape::Indicator => {
                if x.abs() <= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Table(t) => t.eval(x),
        }
    }

    /// Value used when the kernel is sampled on a grid: `eval(x)`, except at a jump
    /// discontinuity where the mean of both one-sided limits is taken. This keeps the
    /// Riemann sum of the indicator exact on grids that contain `+-1/2`.
    pub fn sample(&self, x: f64) -> f64 {
        match self.shape {
            Shape::Indicator if (x.abs() - 0.5).abs() <= 1e-12 => 0.5,
            _ => self.eval(x),
        }
    }

    /// Taps `a_k` for `k = 0..count` used by discrete convolutions at spacing `h`.
    ///
    /// Continuous kernels are sampled at `k h`. The indicator is averaged over the cell
    /// `[k h - h/2, k h + h/2]`, which keeps its discrete mass at exactly 1 and makes the
    /// taps depend continuously on `h`.
    pub fn offsets(&self, spacing: f64, count: usize) -> Vec<f64> {
        match self.shape {
            Shape::Indicator => (0..count)
                .map(|k| {
                    let x = k as f64 * spacing;
                    let (lo, hi) = (x - 0.5 * spacing, x + 0.5 * spacing);
                    if lo >= 0.5 {
                        0.0
                    } else if hi <= 0.5 && lo >= -0.5 {
                        1.0
                    } else {
                        ((hi.min(0.5) - lo.max(-0.5)) / spacing).clamp(0.0, 1.0)
                    }
                })
                .collect(),
            _ => (0..count).map(|k| self.sample(k as f64 * spacing)).collect(),
        }
    }

    pub fn sample_on(&self, grid: &Grid) -> GridFn {
        GridFn::from_fn(*grid, |x| self.sample(x))
    }

    /// Half-width beyond which the kernel is negligible (`a < 1e-12`) or zero.
    pub fn reach(&self) -> f64 {
        match &self.shape {
            // exp(-x^2)/sqrt(pi) < 1e-12 for x > 5.2
            Shape::Gaussian => 5.3,
            _ => self.meta.support_half_width.unwrap_or(10.0),
        }
    }

    /// Grid on which the kernel is validated by default.
    pub fn reference_grid(&self) -> Grid {
        let (l, h) = match &self.shape {
            Shape::Gaussian => (10.0, 1e-3),
            Shape::Tent => (2.0, 1e-3),
            Shape::Indicator => (1.0, 1e-3),
            Shape::Table(t) => {
                let reach = t.xs[t.xs.len() - 1].abs().max(t.xs[0].abs());
                let min_dx = t.xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                (reach + 1.0, (min_dx / 4.0).min(reach / 100.0))
            }
        };
        Grid::new(l, h).expect("reference grid parameters are positive")
    }

    /// Checks evenness, sign, unimodality and normalization on `grid`.
    pub fn validate(&self, grid: &Grid) -> Result<ValidationReport> {
        let h = grid.spacing();
        let required = match self.meta.support_half_width {
            Some(s) => s / 100.0,
            None => 0.01,
        };
        if h > required * (1.0 + 1e-12) {
            return Err(Error::Resolution { kernel: self.label.clone(), spacing: h, required });
        }
        let samples = self.sample_on(grid);
        let v = samples.values();
        let c = grid.center();
        let scale = self.meta.a0.abs().max(f64::MIN_POSITIVE);

        let evenness_deviation =
            (1..=c).map(|k| (v[c + k] - v[c - k]).abs()).fold(0.0, f64::max);
        let min_value = v.iter().copied().fold(f64::INFINITY, f64::min);
        let unimodality_violation =
            (c..v.len() - 1).map(|i| v[i + 1] - v[i]).fold(0.0, f64::max);
        let strict = (c..v.len() - 1).all(|i| v[i + 1] < v[i]);
        let normalization_deviation = (crate::grid::quadrature(&samples) - 1.0).abs();

        Ok(ValidationReport {
            even: evenness_deviation <= 1e-14 * scale,
            nonnegative: min_value >= 0.0,
            unimodal: unimodality_violation <= 0.0,
            normalized: normalization_deviation <= 1e-6,
            strictly_unimodal: strict,
            evenness_deviation,
            min_value,
            unimodality_violation,
            normalization_deviation,
        })
    }
}

/// Outcome of [`Kernel::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub even: bool,
    pub nonnegative: bool,
    pub unimodal: bool,
    pub normalized: bool,
    pub strictly_unimodal: bool,
    pub evenness_deviation: f64,
    pub min_value: f64,
    pub unimodality_violation: f64,
    pub normalization_deviation: f64,
}

impl ValidationReport {
    /// Even, nonnegative, unimodal and normalized.
    pub fn admissible(&self) -> bool {
        self.even && self.nonnegative && self.unimodal && self.normalized
    }
}

fn table_meta(t: &Table) -> KernelMeta {
    let a0 = t.eval(0.0);
    // trapezoid over the table nodes; exact for the piecewise-linear interpolant up to
    // the y^2 weight
    let mut second_moment = 0.0;
    for w in t.xs.windows(2).zip(t.values.windows(2)) {
        let ((x1, x2), (a1, a2)) = ((w.0[0], w.0[1]), (w.1[0], w.1[1]));
        second_moment += 0.5 * (x2 - x1) * (x1 * x1 * a1 + x2 * x2 * a2);
    }
    if t.one_sided {
        second_moment *= 2.0;
    }
    let start = t.xs.iter().position(|&x| x == 0.0).unwrap_or(0);
    let pos_x = &t.xs[start..];
    let pos_a = &t.values[start..];
    let tol = 1e-14 * a0.abs().max(f64::MIN_POSITIVE);
    let flat = pos_a.iter().take_while(|&&a| (a - a0).abs() <= tol).count();
    let plateau_half_width = if flat >= 2 { pos_x[flat - 1] } else { 0.0 };
    let strictly_unimodal = plateau_half_width == 0.0
        && pos_a.windows(2).all(|w| w[1] < w[0])
        && pos_a.iter().all(|&a| a > 0.0);
    let support_half_width = pos_x
        .iter()
        .zip(pos_a)
        .filter(|(_, &a)| a > 0.0)
        .map(|(&x, _)| x)
        .fold(0.0, f64::max);
    KernelMeta {
        a0,
        a2pp: None,
        second_moment,
        plateau_half_width,
        strictly_unimodal,
        support_half_width: Some(support_half_width),
    }
}
