//! Batch runner. Exit codes: 0 when the checked property holds (coboundary,
//! bunching satisfied, expansion admitted, contraction verified), 1 when it
//! fails, 2 on invalid input or a numerical error.

mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use commands::Outcome;
use scenario::{Builtin, RegularityMode, Scenario};

#[derive(Parser)]
#[command(name = "livsic", version, about = "Cohomological equations over toral automorphisms")]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory; overrides output.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid size n of the n x n solver grid.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the cycle functional along the scenario's [pcf] path.
    Pcf,
    /// Classify the cocycle and write the transfer function grid.
    Solve,
    /// Partial hyperbolicity and bunching inequalities.
    Bunching {
        /// Comma-separated orders r.
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<f64>>,
    },
    /// Journe limit polynomial, pointwise expansion or Holder estimate.
    Regularity {
        #[arg(long, value_enum)]
        mode: Option<RegularityMode>,
        #[arg(long, value_enum)]
        builtin: Option<Builtin>,
        /// CSV samples file used instead of a builtin.
        #[arg(long)]
        samples: Option<String>,
    },
    /// Jet graph transform contraction on a synthetic family.
    Jets {
        #[arg(long)]
        family: Option<String>,
    },
    /// Enumerate periodic orbits up to the given period.
    Periodic {
        #[arg(long)]
        period: Option<u32>,
    },
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut s = match &cli.scenario {
        Some(p) => Scenario::load(p)?,
        None => Scenario::parse("")?,
    };
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(n) = cli.grid {
        s.solver.grid_n = n;
    }
    if let Some(t) = cli.tol {
        s.solver.tol = t;
    }
    if let Some(o) = &cli.out {
        s.output.dir = o.to_string_lossy().into_owned();
    }
    let (outcome, staged) = match cli.command {
        Command::Pcf => {
            s.validate()?;
            commands::pcf(&s)?
        }
        Command::Solve => {
            s.validate()?;
            commands::solve(&s)?
        }
        Command::Bunching { orders } => {
            if let Some(o) = orders {
                s.bunching.orders = o;
            }
            s.validate()?;
            commands::bunching(&s)?
        }
        Command::Regularity { mode, builtin, samples } => {
            if let Some(m) = mode {
                s.regularity.mode = m;
            }
            if builtin.is_some() || samples.is_some() {
                s.regularity.builtin = builtin;
                s.regularity.samples = samples;
            }
            s.validate()?;
            commands::regularity(&s)?
        }
        Command::Jets { family } => {
            if let Some(f) = family {
                s.jets.family = f;
            }
            s.validate()?;
            commands::jets(&s)?
        }
        Command::Periodic { period } => {
            s.validate()?;
            let p = period.unwrap_or(s.solver.max_period);
            if p == 0 {
                bail!("period must be positive");
            }
            commands::periodic(&s, p)?
        }
    };
    for path in staged.commit(std::path::Path::new(&s.output.dir))? {
        eprintln!("wrote {}", path.display());
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
