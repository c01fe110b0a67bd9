//! `defect-fields`: vortex profiles, field grids, winding numbers and verification runs.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, Overrides, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "defect-fields", version, about = "Classical fields of topological line defects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    e0: Option<f64>,
    /// Vector-boson mass.
    #[arg(long, global = true)]
    mv: Option<f64>,
    /// `o1,o2,o3:h:n1,n2,n3`
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    /// `straight-z`, `ring:R` or a curve file.
    #[arg(long, global = true)]
    curve: Option<String>,
    /// Truncate the straight line to `[-L, L]`.
    #[arg(long = "trunc-L", global = true)]
    trunc_l: Option<f64>,
    /// Gauss points per segment (4 or 8).
    #[arg(long, global = true)]
    quad_order: Option<usize>,
    #[arg(long, global = true)]
    max_segment: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Repeatable or comma separated.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
    /// Comma-separated check names, or `all`.
    #[arg(long, global = true)]
    checks: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Radial profile and summary of the straight vortex.
    Vortex,
    /// Grids of grad f, F, j and a for a defect curve.
    Curve,
    /// Winding number of a contour.
    Winding {
        /// `circle:cx,cy,cz:R:nx,ny,nz` or a vertex file.
        #[arg(long, allow_hyphen_values = true)]
        contour: String,
    },
    /// Run the theorem suite.
    Verify,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        e0: cli.e0,
        mv: cli.mv,
        grid: cli.grid,
        curve: cli.curve,
        trunc_l: cli.trunc_l,
        quad_order: cli.quad_order,
        max_segment: cli.max_segment,
        out: cli.out,
        formats: cli.format,
        checks: cli.checks,
    };
    let cfg = base.apply(&overrides)?.resolved()?;
    cfg.policy()?;
    cfg.check_set()?;
    log::debug!("resolved config: {cfg:?}");
    match cli.command {
        Command::Vortex => commands::vortex(&cfg),
        Command::Curve => commands::curve(&cfg),
        Command::Winding { contour } => commands::winding(&cfg, &contour).map(|_| ()),
        Command::Verify => commands::verify(&cfg).map(|_| ()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
