//! `gausscurve`: solve prescribed Gaussian curvature problems, run
//! convergence studies and check problem data from the command line.

mod commands;
mod config;
mod error;
mod expr;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::OneDArgs;
use crate::config::{parse_h_list, DomainChoice, RunConfig, EXAMPLES};
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "gausscurve", version, about = "Monotone meshfree solver for surfaces of prescribed Gaussian curvature")]
struct Cli {
    /// Log progress to stderr (RUST_LOG also works).
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem at one spacing and write the solution.
    Solve(RunArgs),
    /// Solve a built-in example over a list of spacings and tabulate errors.
    Study(RunArgs),
    /// Check the data hypotheses and that clouds and stencils can be built.
    Validate(RunArgs),
    /// Solve the one-dimensional equation on an interval.
    Solve1d(Solve1dArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config, or a manifest.json from an earlier run; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = EXAMPLES)]
    example: Option<String>,
    /// Curvature as an expression in x and y.
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    /// Boundary data as an expression in x and y.
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, value_enum)]
    domain: Option<DomainChoice>,
    /// Spacing or comma-separated spacings; `2^-k` is accepted.
    #[arg(long, allow_hyphen_values = true, value_name = "H[,H...]")]
    h: Option<String>,
    /// Residual tolerance [default: 1e-8/h²].
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Fraction of the monotone step limit, in (0, 1).
    #[arg(long)]
    dt_safety: Option<f64>,
    /// Fixed number of orthogonal direction pairs.
    #[arg(long)]
    pairs: Option<usize>,
    /// Output directory [default: out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solve even when the compatibility check fails.
    #[arg(long)]
    force: bool,
    /// Distance from the boundary beyond which the interior error is measured [default: 0.2].
    #[arg(long, value_name = "W")]
    interior_band: Option<f64>,
}

impl RunArgs {
    fn resolve(self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if self.example.is_some() {
            cfg.kappa = None;
            cfg.g = None;
            cfg.example = self.example;
        }
        if self.kappa.is_some() || self.g.is_some() {
            cfg.example = None;
            cfg.kappa = self.kappa.or(cfg.kappa);
            cfg.g = self.g.or(cfg.g);
        }
        if let Some(h) = &self.h {
            cfg.h = parse_h_list(h)?;
        }
        cfg.domain = self.domain.or(cfg.domain);
        cfg.tol = self.tol.or(cfg.tol);
        cfg.max_iters = self.max_iters.or(cfg.max_iters);
        cfg.dt_safety = self.dt_safety.or(cfg.dt_safety);
        cfg.pairs = self.pairs.or(cfg.pairs);
        cfg.out = self.out.or(cfg.out);
        cfg.force |= self.force;
        cfg.interior_band = self.interior_band.or(cfg.interior_band);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct Solve1dArgs {
    #[arg(long, allow_hyphen_values = true)]
    h: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    x_lo: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    x_hi: f64,
    /// Curvature as an expression in x.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    kappa: String,
    #[arg(long, allow_hyphen_values = true, default_value = "-1")]
    g_lo: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    g_hi: f64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("GAUSSCURVE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("GAUSSCURVE_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Solve(a) => commands::cmd_solve(&a.resolve()?),
        Command::Study(a) => commands::cmd_study(&a.resolve()?),
        Command::Validate(a) => commands::cmd_validate(&a.resolve()?),
        Command::Solve1d(a) => {
            let h = match parse_h_list(&a.h)?.as_slice() {
                [h] => *h,
                _ => return Err(CliError::Config("solve1d takes a single spacing".into())),
            };
            commands::cmd_solve1d(&OneDArgs {
                h,
                interval: (a.x_lo, a.x_hi),
                kappa: a.kappa,
                g: (a.g_lo, a.g_hi),
                tol: a.tol,
                max_iters: a.max_iters,
                out: a.out,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
