// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use extremal_sl::optimize::{minimize_g, scan_gamma, OptimConfig};
use extremal_sl::period::{self, i0, period_identity, shoot, PeriodIdentity, Trajectory};
use extremal_sl::sturm::lambda_k;
use extremal_sl::verify::{criterion, CriterionReport, VerifyConfig, NAMES};
use extremal_sl::{GammaParam, GridFunction};
use rayon::prelude::*;
use serde::Serialize;

mod args;
mod output;

use args::{positive, Linspace, PotentialSpec, StepRange};
use output::{g17, json, Table};

const THREADS_ENV: &str = "EXTREMAL_SL_THREADS";

/// Invalid user input; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser)]
#[command(name = "extremal-sl", version, about = "Minimal Neumann Sturm-Liouville eigenvalue over L_gamma potential spheres")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Grid intervals (nodes = grid_n + 1).
    #[arg(long, global = true, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(64..=1 << 24))]
    grid_n: u64,
    /// Optimiser gradient-norm tolerance.
    #[arg(long, global = true, default_value = "1e-8", value_parser = positive)]
    tol_alg: f64,
    /// I0 midpoint-refinement tolerance.
    #[arg(long, global = true, default_value = "1e-11", value_parser = positive)]
    tol_quad: f64,
    #[arg(long, global = true, default_value_t = 10_000)]
    max_iters: usize,
    /// Write here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Defaults to json for eig/minimize/shoot, csv for scan/period, text for verify.
    #[arg(long, global = true)]
    format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// k-th Neumann eigenpair of -y'' + q y.
    Eig {
        /// const:c, step:a,b,h or a file with grid_n + 1 values.
        #[arg(long)]
        q: PotentialSpec,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
    },
    /// Minimise G_gamma on the unit L2 sphere.
    Minimize {
        #[arg(long, value_parser = gamma)]
        gamma: GammaParam,
    },
    /// Minimise over a range of gammas.
    Scan {
        /// a:b:step or a comma list, strictly increasing.
        #[arg(long)]
        gammas: StepRange,
    },
    /// Roots of f_alpha and I0(alpha).
    Period {
        #[arg(long, value_parser = gamma)]
        gamma: GammaParam,
        /// a:b:n or a comma list.
        #[arg(long)]
        alphas: Linspace,
    },
    /// Integrate y'' = y^r - mu y from rest at y0 to the next turning point.
    Shoot {
        #[arg(long, value_parser = gamma)]
        gamma: GammaParam,
        #[arg(long, value_parser = positive)]
        mu: f64,
        #[arg(long, value_parser = positive)]
        y0: f64,
    },
    /// Run the acceptance criteria.
    Verify {
        /// Only these criteria (1-based, repeatable).
        #[arg(long = "criterion", value_parser = clap::value_parser!(u64).range(1..=NAMES.len() as u64))]
        criteria: Vec<u64>,
        #[arg(long, default_value_t = VerifyConfig::default().seed)]
        seed: u64,
    },
}

fn gamma(s: &str) -> Result<GammaParam, String> {
    let g: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    GammaParam::new(g).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version land here too, with exit status 0
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use extremal_sl::Error as E;
    if e.is::<Usage>() {
        return 2;
    }
    match e.downcast_ref::<E>() {
        Some(E::NoConvergence(_) | E::Collapse { .. }) | None => 1,
        Some(_) => 2,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    configure_threads()?;
    let cfg = cli.run;
    let n = cfg.grid_n as usize;
    let mut status = ExitCode::SUCCESS;
    let bytes = match cli.command {
        Command::Eig { q, k } => eig(&cfg, &q.build(n)?, k as usize)?,
        Command::Minimize { gamma } => minimize(&cfg, &gamma)?,
        Command::Scan { gammas } => scan(&cfg, &gammas.0)?,
        Command::Period { gamma, alphas } => period_table(&cfg, &gamma, &alphas.0)?,
        Command::Shoot { gamma, mu, y0 } => shoot_cmd(&cfg, &gamma, mu, y0)?,
        Command::Verify { criteria, seed } => {
            let (bytes, all_passed) = verify(&cfg, &criteria, seed)?;
            if !all_passed {
                status = ExitCode::FAILURE;
            }
            bytes
        }
    };
    emit(&cfg, &bytes)?;
    Ok(status)
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> anyhow::Result<()> {
    match &cfg.output {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn optim_config(cfg: &RunConfig) -> OptimConfig {
    OptimConfig {
        grad_tol: cfg.tol_alg,
        max_iters: cfg.max_iters,
        ..OptimConfig::default().with_grid(cfg.grid_n as usize)
    }
}

/// `x_i` alongside one or more grid functions.
fn profile_table(header: &[&'static str], columns: &[&GridFunction]) -> anyhow::Result<Vec<u8>> {
    let mut t = Table::new(header);
    let first = columns[0];
    for i in 0..first.len() {
        let mut row = vec![g17(first.x(i))];
        row.extend(columns.iter().map(|c| g17(c.values()[i])));
        t.push(row);
    }
    t.to_bytes()
}

fn eig(cfg: &RunConfig, q: &GridFunction, k: usize) -> anyhow::Result<Vec<u8>> {
    let res = lambda_k(q, k)?;
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json("eig", &res),
        Format::Csv => profile_table(&["x", "eigenfunction"], &[&res.eigenfunction]),
    }
}

fn minimize(cfg: &RunConfig, gamma: &GammaParam) -> anyhow::Result<Vec<u8>> {
    let report = minimize_g(gamma, &optim_config(cfg))?;
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json("minimize", &report),
        Format::Csv => profile_table(
            &["x", "minimizer", "extremal_potential"],
            &[&report.minimizer, &report.extremal_potential],
        ),
    }
}

#[derive(Serialize)]
struct ScanRow {
    gamma: f64,
    m_hat: f64,
    grad_norm: f64,
    duality_gap: f64,
    converged: bool,
}

#[derive(Serialize)]
struct Rows<T> {
    rows: Vec<T>,
}

fn scan(cfg: &RunConfig, gammas: &[f64]) -> anyhow::Result<Vec<u8>> {
    for &g in gammas {
        GammaParam::new(g).map_err(|e| Usage(e.to_string()))?;
    }
    if gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Usage("--gammas must be strictly increasing".into()).into());
    }
    let table = scan_gamma(gammas, &optim_config(cfg))?;
    let rows: Vec<ScanRow> = table
        .reports
        .iter()
        .map(|r| ScanRow {
            gamma: r.gamma,
            m_hat: r.m_hat,
            grad_norm: r.grad_norm,
            duality_gap: r.duality_gap,
            converged: r.converged,
        })
        .collect();
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json("scan", &Rows { rows }),
        Format::Csv => {
            let mut t = Table::new(&["gamma", "m_hat", "grad_norm", "duality_gap", "converged"]);
            for r in &rows {
                t.push(vec![
                    g17(r.gamma),
                    g17(r.m_hat),
                    g17(r.grad_norm),
                    g17(r.duality_gap),
                    r.converged.to_string(),
                ]);
            }
            t.to_bytes()
        }
    }
}

fn period_table(cfg: &RunConfig, gamma: &GammaParam, alphas: &[f64]) -> anyhow::Result<Vec<u8>> {
    let amin = period::alpha_min(gamma);
    if let Some(a) = alphas.iter().find(|&&a| !(a > amin)) {
        return Err(Usage(format!("alpha = {a} must exceed alpha_min = {amin} for gamma = {}", gamma.gamma())).into());
    }
    let rows = alphas
        .par_iter()
        .map(|&a| i0(gamma, a, cfg.tol_quad))
        .collect::<extremal_sl::Result<Vec<_>>>()?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json("period", &Rows { rows }),
        Format::Csv => {
            let mut t = Table::new(&["alpha", "omega_minus", "omega_plus", "I0", "err"]);
            for p in &rows {
                t.push([p.alpha, p.omega_minus, p.omega_plus, p.i0, p.err].map(g17).to_vec());
            }
            t.to_bytes()
        }
    }
}

#[derive(Serialize)]
struct ShootOutput<'a> {
    #[serde(flatten)]
    trajectory: &'a Trajectory,
    predicted_half_period: f64,
    period_identity_relative_error: f64,
}

fn shoot_cmd(cfg: &RunConfig, gamma: &GammaParam, mu: f64, y0: f64) -> anyhow::Result<Vec<u8>> {
    let traj = shoot(gamma, mu, y0)?;
    let PeriodIdentity {
        predicted_half_period,
        relative_error,
        ..
    } = period_identity(gamma, &traj, cfg.tol_quad)?;
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => json(
            "shoot",
            &ShootOutput {
                trajectory: &traj,
                predicted_half_period,
                period_identity_relative_error: relative_error,
            },
        ),
        Format::Csv => {
            let mut t = Table::new(&["x", "y", "dy"]);
            for &(x, y, dy) in &traj.samples {
                t.push(vec![g17(x), g17(y), g17(dy)]);
            }
            t.to_bytes()
        }
    }
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    passed: bool,
    criteria: &'a [CriterionReport],
}

fn verify(cfg: &RunConfig, criteria: &[u64], seed: u64) -> anyhow::Result<(Vec<u8>, bool)> {
    let vcfg = VerifyConfig {
        grid_n: cfg.grid_n as usize,
        tol_alg: cfg.tol_alg,
        tol_quad: cfg.tol_quad,
        max_iters: cfg.max_iters,
        seed,
    };
    let ids: Vec<usize> = if criteria.is_empty() {
        (1..=NAMES.len()).collect()
    } else {
        criteria.iter().map(|&c| c as usize).collect()
    };
    let reports: Vec<CriterionReport> = ids
        .iter()
        .map(|&id| {
            let r = criterion(id, &vcfg);
            // progress for runs whose stdout is not the report itself
            if cfg.output.is_some() || cfg.format.is_some() {
                eprintln!("{r}");
            }
            r
        })
        .collect();
    let passed = reports.iter().all(|r| r.passed);
    let bytes = match cfg.format {
        Some(Format::Json) => json("verify", &VerifyOutput { passed, criteria: &reports })?,
        Some(Format::Csv) => {
            let mut t = Table::new(&["id", "name", "passed", "detail"]);
            for r in &reports {
                t.push(vec![r.id.to_string(), r.name.to_string(), r.passed.to_string(), r.detail.clone()]);
            }
            t.to_bytes()?
        }
        None => reports.iter().map(|r| format!("{r}\n")).collect::<String>().into_bytes(),
    };
    Ok((bytes, passed))
}
