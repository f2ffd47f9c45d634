//! `nlev`: batch driver for the nonlinear convolution eigenvalue solver.

mod config;

use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use nlev_core::asymptotics::{check_kappa, check_large_sigma, check_small_sigma};
use nlev_core::export::{self, num, Header};
use nlev_core::transform::transform_half_width;
use nlev_core::{eigencurve, solve_sigma, sweep, transform_kernel, Grid, PowerOptions};

use config::{input_error, CommonArgs, InputError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "nlev", version, about = "Unimodal solutions of sigma u = a * f(u) for bilinear f")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Largest eigenvalue of the cut-off operator for each xi
    Eigencurve {
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        xi: Vec<f64>,
    },
    /// Solve for one sigma
    Solve {
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
    },
    /// Solve for a list of sigma values
    Sweep {
        #[arg(long, value_delimiter = ',', num_args = 0.., allow_negative_numbers = true)]
        sigmas: Vec<f64>,
    },
    /// Transformed kernel for each mu, written as a reusable kernel table
    Transform {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        mu: Vec<f64>,
    },
    /// Asymptotic probes
    Asympt {
        #[command(subcommand)]
        probe: Probe,
    },
}

#[derive(Debug, Subcommand)]
enum Probe {
    /// sigma -> 0 with zeta = 0 (default sigma 0.02,0.04,0.06,0.08,0.1)
    Small {
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
    },
    /// sigma -> zeta + eta (default gaps 0.2,0.1,0.05,0.025)
    Large {
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
    },
    /// sigma -> zeta with zeta > 0 (default gaps 0.2,0.1,0.05)
    Kappa {
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<nlev_core::Error>() {
        Some(c) if c.is_invalid_input() => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::resolve(&cli.common)?;
    match cli.command {
        Command::Eigencurve { xi } => cmd_eigencurve(&cfg, &xi),
        Command::Solve { sigma } => cmd_solve(&cfg, sigma),
        Command::Sweep { sigmas } => cmd_sweep(&cfg, &sigmas),
        Command::Transform { mu } => cmd_transform(&cfg, &mu),
        Command::Asympt { probe } => match probe {
            Probe::Small { sigmas } => cmd_small(&cfg, sigmas),
            Probe::Large { sigmas } => cmd_large(&cfg, sigmas),
            Probe::Kappa { sigmas } => cmd_kappa(&cfg, sigmas),
        },
    }
}

fn list(values: &[f64]) -> String {
    values.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}

fn wrote(path: &Path) {
    println!("wrote {}", path.display());
}

fn cmd_eigencurve(cfg: &RunConfig, xis: &[f64]) -> Result<()> {
    let kernel = cfg.kernel()?;
    let power = PowerOptions { tol: cfg.tol_power, max_iter: cfg.max_iter };
    let curve = eigencurve(&kernel, xis, cfg.h, power)?;
    let path = cfg.output("eigencurve.csv")?;
    export::write_eigencurve(&path, &cfg.header("eigencurve").with("xi", list(xis)), &curve)?;
    wrote(&path);
    let failed = curve.points.iter().filter(|p| p.error.is_some()).count();
    if failed > 0 && failed == curve.points.len() {
        bail!("every eigencurve entry failed; see the error column");
    }
    Ok(())
}

fn cmd_solve(cfg: &RunConfig, sigma: f64) -> Result<()> {
    let (kernel, params) = (cfg.kernel()?, cfg.params()?);
    let s = solve_sigma(&kernel, &params, sigma, &cfg.solve_options())?;
    let stem = format!("solution_{}", num(sigma));
    let (csv, json) = (cfg.output(&format!("{stem}.csv"))?, cfg.output(&format!("{stem}.json"))?);
    export::write_solution(&csv, &json, &cfg.header("solve").with("sigma", num(sigma)), &s)?;
    wrote(&csv);
    wrote(&json);
    println!(
        "sigma {} xi {} lambda {} tau {} residual {:e}",
        num(s.sigma),
        num(s.xi),
        num(s.lambda),
        num(s.tau),
        s.residual_rel
    );
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, sigmas: &[f64]) -> Result<()> {
    let (kernel, params) = (cfg.kernel()?, cfg.params()?);
    let entries = sweep(&kernel, &params, sigmas, &cfg.solve_options());
    let path = cfg.output("sweep.csv")?;
    export::write_sweep(&path, &cfg.header("sweep").with("sigmas", list(sigmas)), &entries)?;
    wrote(&path);
    if entries.is_empty() {
        return Ok(());
    }
    if entries.iter().all(|e| e.inadmissible) {
        let (lo, hi) = params.admissible_range();
        return Err(input_error(format!(
            "no sigma is admissible: unimodal solutions exist only for {} < sigma < {}",
            num(lo),
            num(hi)
        )));
    }
    if entries.iter().all(|e| e.summary.is_none()) {
        bail!("every sweep entry failed; see the error column");
    }
    Ok(())
}

fn cmd_transform(cfg: &RunConfig, mus: &[f64]) -> Result<()> {
    let kernel = cfg.kernel()?;
    for &mu in mus {
        if !(0.0..1.0).contains(&mu) {
            return Err(input_error(format!("mu must lie in [0, 1), got {}", num(mu))));
        }
        let half_width = if cfg.half_width_set {
            cfg.half_width
        } else {
            transform_half_width(&kernel, mu, cfg.tol_transform)
        };
        let grid = Grid::new(half_width, cfg.h)?;
        let tk = transform_kernel(&kernel, mu, &grid, cfg.tol_transform)?;
        let header = cfg
            .header("transform")
            .with("mu", num(mu))
            .with("grid_half_width", num(grid.half_width()))
            .with("truncation_depth", tk.truncation_depth)
            .with("truncation_bound", num(tk.truncation_bound))
            .with("renormalization", num(tk.renormalization))
            .with("mass_leak", num(tk.mass_leak));
        let path = cfg.output(&format!("transform_mu_{}.csv", num(mu)))?;
        export::write_kernel(&path, &header, &tk)?;
        wrote(&path);
        println!("mu {} peak {} second moment {}", num(mu), num(tk.peak()), num(tk.second_moment()));
    }
    Ok(())
}

fn write_report<T: serde::Serialize>(cfg: &RunConfig, name: &str, report: &T) -> Result<()> {
    let path = cfg.output(name)?;
    export::write_json(&path, report)?;
    wrote(&path);
    Ok(())
}

fn cmd_small(cfg: &RunConfig, sigmas: Option<Vec<f64>>) -> Result<()> {
    let sigmas = sigmas.unwrap_or_else(|| vec![0.02, 0.04, 0.06, 0.08, 0.1]);
    let r = check_small_sigma(&cfg.kernel()?, &cfg.params()?, &sigmas, &cfg.solve_options())?;
    let header = cfg.header("asympt small").with("sigmas", list(&sigmas));
    let path = cfg.output("asympt_small.csv")?;
    export::write_fit(&path, &header, &r.fit)?;
    wrote(&path);
    write_report(cfg, "asympt_small.json", &r)?;
    println!("xi exponent {} (predicted 1/3), scaled xi {}", num(r.fit.exponent), list(&r.scaled_xi));
    Ok(())
}

fn cmd_large(cfg: &RunConfig, sigmas: Option<Vec<f64>>) -> Result<()> {
    let top = cfg.zeta + cfg.eta;
    let sigmas = sigmas.unwrap_or_else(|| [0.2, 0.1, 0.05, 0.025].iter().map(|g| top - g).collect());
    let r = check_large_sigma(&cfg.kernel()?, &cfg.params()?, &sigmas, &cfg.solve_options())?;
    let header = cfg.header("asympt large").with("sigmas", list(&sigmas));
    let path = cfg.output("asympt_large.csv")?;
    export::write_fit(&path, &header.clone().with("fit", "xi"), &r.xi_fit)?;
    wrote(&path);
    let path = cfg.output("asympt_large_norm.csv")?;
    export::write_fit(&path, &header.with("fit", "norm_l2"), &r.norm_fit)?;
    wrote(&path);
    write_report(cfg, "asympt_large.json", &r)?;
    println!(
        "scaled xi {} (predicted {}), norm exponent {}",
        list(&r.scaled_xi),
        num(r.predicted_constant),
        num(r.norm_fit.exponent)
    );
    Ok(())
}

fn cmd_kappa(cfg: &RunConfig, sigmas: Option<Vec<f64>>) -> Result<()> {
    let sigmas = sigmas.unwrap_or_else(|| [0.2, 0.1, 0.05].iter().map(|g| cfg.zeta + g).collect());
    let r = check_kappa(&cfg.kernel()?, &cfg.params()?, &sigmas, &cfg.solve_options())?;
    let m = &r.moments;
    let rows: Vec<Vec<String>> = (0..sigmas.len())
        .map(|i| {
            vec![
                num(sigmas[i]),
                num(m.gaps[i]),
                num(m.kappa0[i]),
                num(m.kappa2[i]),
                num(r.xi[i]),
                num(r.sup_distance[i]),
            ]
        })
        .collect();
    let header: Header = cfg
        .header("asympt kappa")
        .with("sigmas", list(&sigmas))
        .with("kappa0_limit", num(m.kappa0_limit))
        .with("kappa2_limit", num(m.kappa2_limit))
        .with("predicted_xi_limit", num(r.predicted_xi_limit));
    let path = cfg.output("asympt_kappa.csv")?;
    let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    export::write_table(file, &header, &["sigma", "gap", "kappa0", "kappa2", "xi", "sup_distance"], &rows)?;
    wrote(&path);
    write_report(cfg, "asympt_kappa.json", &r)?;
    println!("kappa0 -> {}, kappa2 -> {}", num(m.kappa0_limit), num(m.kappa2_limit));
    Ok(())
}
