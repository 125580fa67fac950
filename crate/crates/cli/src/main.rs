use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

mod commands;

#[derive(Parser)]
#[command(name = "villadsen-lab")]
#[command(about = "Exact certificates for products of 2-spheres, staged constructions and growth calculators")]
#[command(version)]
struct Cli {
    /// Write output here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Print timing to stderr
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build the staged system and certify every stage
    Construct(commands::ConstructArgs),

    /// Hall condition for a family of coordinate sets
    Hall {
        /// JSON list of sets, e.g. "[[1],[1,2]]"
        #[arg(long)]
        sets: String,
    },

    /// Euler and total Chern class of a sum of line bundles
    Euler(commands::BundleArgs),

    /// Obstruction to positivity of [η₁ ⊕ ⋯ ⊕ η_k] − [θ_l]
    Vil {
        #[command(flatten)]
        bundle: commands::BundleArgs,

        /// Rank l of the subtracted trivial bundle
        #[arg(long, default_value_t = 1)]
        trivial: usize,
    },

    /// Tensor dimension growth of a profile (CSV `dim,rank` or JSON)
    Tdg {
        /// Path, or `-` for stdin
        input: String,

        #[arg(long, default_value_t = 8)]
        n_max: u32,

        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },

    /// Stable rank from dimension and rank
    Sr {
        #[arg(long)]
        dim: u64,

        #[arg(long)]
        rank: u64,
    },

    /// Propagate growth-rank bounds over a descriptor graph (JSON)
    Grcalc {
        /// Path, or `-` for stdin
        input: String,
    },

    /// Rank-one pruning of a staged system (JSON)
    Prune {
        /// Path, or `-` for stdin
        input: String,
    },

    /// Numerical-semigroup embedding witnesses
    #[command(subcommand)]
    Embed(commands::EmbedCommand),
}

enum Rendered {
    Json(Value),
    Text(String),
}

fn render(out: Rendered) -> String {
    match out {
        Rendered::Json(v) => serde_json::to_string_pretty(&v).expect("values always serialize") + "\n",
        Rendered::Text(s) => s,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = commands::run(cli.command);
    if cli.verbose > 0 {
        eprintln!("elapsed {:.3?}", start.elapsed());
    }
    let (text, code) = match result {
        Ok(out) => (render(out), ExitCode::SUCCESS),
        Err(e) => (render(Rendered::Json(json!({ "error": format!("{e:#}") }))), ExitCode::from(2)),
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    code
}
