use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symbill::config::{parse_grid, parse_p_range, parse_tolerance};

mod commands;

#[derive(Parser)]
#[command(name = "symbill", version, about = "Billiards in n-symmetric ovals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Curve definition file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a tolerance, e.g. `--tolerance tangency=1e-3`. Repeatable.
    #[arg(long = "tolerance", value_name = "NAME=VAL", value_parser = parse_tolerance)]
    pub tolerances: Vec<(String, f64)>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check positivity and convexity of the curve.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Sample count; defaults to 1024 per unit of the highest harmonic.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Iterate a grid of seeds and write `seedIndex,iter,phi,p` rows.
    Portrait {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "NxM", default_value = "20x10", value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long = "p-range", value_name = "A,B", default_value = "-0.9,0.9", value_parser = parse_p_range, allow_hyphen_values = true)]
        p_range: (f64, f64),
        #[arg(long, default_value_t = 1000)]
        iters: usize,
    },
    /// Symmetric periodic orbit families and their linear stability.
    Families {
        #[command(flatten)]
        common: Common,
        /// Restrict to one polygon class.
        #[arg(long)]
        m: Option<u32>,
    },
    /// Twist coefficients of the elliptic families.
    Twist {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: Option<u32>,
        /// Also measure the twist from rotation numbers near the fixed point.
        #[arg(long)]
        oracle: bool,
    },
    /// Stable and unstable manifolds of the hyperbolic families and their crossings.
    Manifolds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: Option<u32>,
        /// Length at which each branch stops growing.
        #[arg(long = "max-arc", default_value_t = 5.0)]
        max_arc: f64,
        #[arg(long = "seed-distance", default_value_t = 1e-7)]
        seed_distance: f64,
        /// Where to write the polylines as CSV.
        #[arg(long)]
        polylines: Option<PathBuf>,
    },
    /// Horizontal invariant curves of a Gutkin oval, or of the curve in `--config`.
    Gutkin {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        a1: Option<f64>,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
    },
}

fn main() -> ExitCode {
    // usage errors are input errors; clap's own code 2 means validation failure here
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Validate { common, samples } => commands::validate(&common, samples),
        Command::Portrait { common, grid, p_range, iters } => commands::portrait(&common, grid, p_range, iters),
        Command::Families { common, m } => commands::families(&common, m),
        Command::Twist { common, m, oracle } => commands::twist(&common, m, oracle),
        Command::Manifolds { common, m, max_arc, seed_distance, polylines } => {
            commands::manifolds(&common, m, max_arc, seed_distance, polylines.as_deref())
        }
        Command::Gutkin { common, n, a1, seeds, iters } => commands::gutkin(&common, n, a1, seeds, iters),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
