//! `mcgl`: stationary solutions and gradient-flow runs from the command line.

mod commands;
mod config;
mod exit;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{InitKind, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "mcgl", version, about = "Maxwell solutions and Cahn-Hilliard runs for a curvature-regularised double-well energy")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the ε grid with a single value.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Overrides the mass grid with a single value.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Number of transitions for `second-variation`.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Directory receiving output files.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equal-area slope and wells of the potential.
    MaxwellPoint,
    /// The simple solution and its profile at one (ε, r).
    Solve,
    /// Simple solutions over the (ε, r) grid.
    Sweep,
    /// Energies of the Maxwell, constant and multi-transition solutions.
    Rank,
    /// A direction of negative second variation for an n-transition solution.
    SecondVariation,
    /// Distance of simple solutions from the single-interface step.
    LimitCheck,
    /// Cahn-Hilliard run from the chosen initial data.
    Simulate {
        #[arg(long, value_enum)]
        init: Option<InitArg>,
        /// Initial data for `--init file`.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum InitArg {
    Maxwell,
    Step,
    Spinodal,
    File,
}

impl From<InitArg> for InitKind {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Maxwell => InitKind::Maxwell,
            InitArg::Step => InitKind::Step,
            InitArg::Spinodal => InitKind::Spinodal,
            InitArg::File => InitKind::File,
        }
    }
}

fn init_pool() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("MCGL_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("MCGL_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            anyhow::bail!("MCGL_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<String> {
    init_pool()?;
    let overrides = Overrides { eps: cli.eps, r: cli.r, n: cli.n, output_dir: cli.output_dir };
    let mut cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    if let Command::Simulate { init, file } = &cli.command {
        if let Some(i) = init {
            cfg.simulate.init = (*i).into();
        }
        if let Some(f) = file {
            cfg.simulate.file = Some(f.clone());
        }
    }
    let hash = cfg.hash();
    match cli.command {
        Command::MaxwellPoint => commands::maxwell_point(&cfg, &hash),
        Command::Solve => commands::solve(&cfg, &hash),
        Command::Sweep => commands::sweep(&cfg, &hash),
        Command::Rank => commands::rank(&cfg, &hash),
        Command::SecondVariation => commands::second_variation(&cfg, &hash),
        Command::LimitCheck => commands::limit_check(&cfg, &hash),
        Command::Simulate { .. } => commands::simulate(&cfg, &hash),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code_for(&err) as u8)
        }
    }
}
