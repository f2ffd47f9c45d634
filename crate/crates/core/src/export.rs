//! Deterministic CSV and JSON writers.
//!
//! Numbers use Rust's shortest round-trip formatting with a `.` decimal separator.
//! Every CSV starts with `#` comment lines describing how it was produced.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::asymptotics::ScalingFit;
use crate::error::Result;
use crate::kr_solver::EigenCurve;
use crate::nonlinear::{BilinearNonlinearity, Solution, SolveOptions, SweepEntry, TransformRecord};
use crate::transform::TransformedKernel;

/// Shortest decimal string that parses back to `x`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Ordered `key = value` comment lines written above a CSV table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    entries: Vec<(String, String)>,
}

impl Header {
    /// Starts with the producing command and the artifact version.
    pub fn new(command: &str) -> Self {
        let mut h = Self::default();
        h.push("artifact", format!("nlev {}", env!("CARGO_PKG_VERSION")));
        h.push("command", command);
        h
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    fn write_to(&self, w: &mut impl Write) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "# {k} = {}", v.replace('\n', " "))?;
        }
        Ok(())
    }
}

/// Writes the header, the column names, and the rows.
pub fn write_table<W: Write>(mut out: W, header: &Header, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    header.write_to(&mut out)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// `xi,lambda,iterations,residual,error`.
pub fn eigencurve_rows(curve: &EigenCurve) -> Vec<Vec<String>> {
    curve
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.xi),
                num(p.lambda),
                p.iterations.to_string(),
                num(p.residual),
                p.error.clone().unwrap_or_default(),
            ]
        })
        .collect()
}

pub const EIGENCURVE_COLUMNS: [&str; 5] = ["xi", "lambda", "iterations", "residual", "error"];

pub fn write_eigencurve(path: &Path, header: &Header, curve: &EigenCurve) -> Result<()> {
    write_table(create(path)?, header, &EIGENCURVE_COLUMNS, &eigencurve_rows(curve))
}

pub const SOLUTION_COLUMNS: [&str; 4] = ["x", "u", "f_of_u", "v"];

/// `x,u,f_of_u,v` at every node of the solution grid.
pub fn solution_rows(s: &Solution) -> Vec<Vec<String>> {
    let g = s.grid();
    let fu = s.f_of_u();
    let v = s.v_on_grid();
    (0..g.len())
        .map(|i| vec![num(g.point(i)), num(s.u.values()[i]), num(fu[i]), num(v[i])])
        .collect()
}

/// Scalars written next to a solution table.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionSidecar {
    pub sigma: f64,
    pub xi_sigma: f64,
    pub lambda: f64,
    pub tau_sigma: f64,
    pub residual_rel: f64,
    pub h: f64,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub tol_power: f64,
    pub tol_bisect: f64,
    pub tol_transform: f64,
    pub kernel: String,
    pub params: BilinearNonlinearity,
    pub lambda_target: f64,
    pub crossing: f64,
    pub transform: Option<TransformRecord>,
}

impl SolutionSidecar {
    pub fn new(s: &Solution) -> Self {
        let SolveOptions { tol_power, tol_bisect, tol_transform, .. } = s.options;
        Self {
            sigma: s.sigma,
            xi_sigma: s.xi,
            lambda: s.lambda,
            tau_sigma: s.tau,
            residual_rel: s.residual_rel,
            h: s.spacing(),
            half_width: s.grid().half_width(),
            tol_power,
            tol_bisect,
            tol_transform,
            kernel: s.kernel.clone(),
            params: s.params,
            lambda_target: s.lambda_target,
            crossing: s.crossing(),
            transform: s.transform.clone(),
        }
    }
}

pub fn write_solution(csv_path: &Path, json_path: &Path, header: &Header, s: &Solution) -> Result<()> {
    write_table(create(csv_path)?, header, &SOLUTION_COLUMNS, &solution_rows(s))?;
    write_json(json_path, &SolutionSidecar::new(s))
}

pub const SWEEP_COLUMNS: [&str; 8] = ["sigma", "xi", "lambda", "tau", "norm_l2", "norm_inf", "residual_rel", "error"];

pub fn sweep_rows(entries: &[SweepEntry]) -> Vec<Vec<String>> {
    entries
        .iter()
        .map(|e| match &e.summary {
            Some(s) => vec![
                num(e.sigma),
                num(s.xi),
                num(s.lambda),
                num(s.tau),
                num(s.norm_l2),
                num(s.norm_inf),
                num(s.residual_rel),
                String::new(),
            ],
            None => {
                let mut r = vec![num(e.sigma)];
                r.extend(std::iter::repeat_n(String::new(), 6));
                r.push(e.error.clone().unwrap_or_default());
                r
            }
        })
        .collect()
}

pub fn write_sweep(path: &Path, header: &Header, entries: &[SweepEntry]) -> Result<()> {
    write_table(create(path)?, header, &SWEEP_COLUMNS, &sweep_rows(entries))
}

/// `x,a`, readable back as a sampled kernel.
pub fn write_kernel(path: &Path, header: &Header, tk: &TransformedKernel) -> Result<()> {
    let g = tk.grid();
    let rows: Vec<Vec<String>> = (0..g.len())
        .map(|i| vec![num(g.point(i)), num(tk.samples.values()[i])])
        .collect();
    write_table(create(path)?, header, &["x", "a"], &rows)
}

pub const FIT_COLUMNS: [&str; 3] = ["abscissa", "ordinate", "predicted"];

pub fn fit_rows(fit: &ScalingFit) -> Vec<Vec<String>> {
    fit.abscissa
        .iter()
        .zip(&fit.ordinate)
        .map(|(&x, &y)| vec![num(x), num(y), num(fit.predicted_at(x))])
        .collect()
}

/// Scalars of a [`ScalingFit`].
#[derive(Debug, Clone, Serialize)]
pub struct FitSidecar {
    pub exponent: f64,
    pub prefactor: f64,
    pub fixed_exponent_prefactor: f64,
    pub predicted_exponent: f64,
    pub predicted_prefactor: Option<f64>,
    pub r_squared: f64,
}

impl From<&ScalingFit> for FitSidecar {
    fn from(f: &ScalingFit) -> Self {
        Self {
            exponent: f.exponent,
            prefactor: f.prefactor,
            fixed_exponent_prefactor: f.fixed_exponent_prefactor,
            predicted_exponent: f.predicted_exponent,
            predicted_prefactor: f.predicted_prefactor,
            r_squared: f.r_squared,
        }
    }
}

pub fn write_fit(path: &Path, header: &Header, fit: &ScalingFit) -> Result<()> {
    write_table(create(path)?, header, &FIT_COLUMNS, &fit_rows(fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0, 1e-10, 0.30000000000000004, 123456.789, -2.5e300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn table_layout() {
        let mut buf = Vec::new();
        let h = Header::new("test").with("h", num(0.001));
        write_table(&mut buf, &h, &["a", "b"], &[vec!["1.0".into(), "x,y".into()]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# artifact = nlev "));
        assert_eq!(lines[1], "# command = test");
        assert_eq!(lines[2], "# h = 0.001");
        assert_eq!(lines[3], "a,b");
        assert_eq!(lines[4], "1.0,\"x,y\"");
    }
}
