//! `symrd`: exact redundancy experiments for symmetric rate-distortion.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "symrd", version, about)]
struct Cli {
    /// Pair definition file (JSON). Defaults to binary Hamming.
    #[arg(long, global = true)]
    pair: Option<PathBuf>,
    /// Master seed for codebooks and Monte Carlo trials.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    out: Option<Format>,
    /// Worker threads for Monte Carlo loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Blocklength and distortion shared by several commands.
#[derive(Debug, Args)]
struct Point {
    /// Blocklength.
    #[arg(long)]
    n: usize,
    /// Distortion level as an exact rational `p/q`.
    #[arg(long = "D", value_parser = parse_rational)]
    d: BigRational,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that the pair is symmetric and print its constants.
    Validate,
    /// Sample the rate-distortion curve on an even grid of `(0, D*)`.
    Rdcurve {
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Probability of the distortion ball around any source string.
    Ballprob {
        #[command(flatten)]
        point: Point,
        /// Exact rational arithmetic only.
        #[arg(long, conflicts_with = "log")]
        exact: bool,
        /// Log-domain float dynamic program.
        #[arg(long)]
        log: bool,
    },
    /// Large-deviation sandwich around the ball probability.
    Ldbounds {
        #[command(flatten)]
        point: Point,
    },
    /// Encode a symbol file into a container.
    Encode {
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value = "golomb")]
        scheme: symrd::codec::Scheme,
        /// Source symbols, whitespace separated (or one run of
        /// single-character labels).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Decode a container back to reconstruction symbols.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Exact expected lengths and redundancy across blocklengths.
    RedundancySweep {
        #[arg(long = "D", value_parser = parse_rational)]
        d: BigRational,
        /// Comma-separated blocklengths.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "64,128,256,512,1024,2048,4096"
        )]
        n_grid: Vec<usize>,
        /// Monte Carlo roundtrips per blocklength where the search is cheap.
        #[arg(long, default_value_t = 0)]
        trials: u64,
    },
    /// Finite-blocklength converse next to the exact achievable rate.
    ConverseBound {
        #[arg(long = "D", value_parser = parse_rational)]
        d: BigRational,
        #[arg(long, default_value_t = 16)]
        nmin: usize,
        #[arg(long, default_value_t = 4096)]
        nmax: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        /// Override the default epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Flag code on the straight-line segment of an erasure-type pair.
    StraightlineDemo {
        /// Erasure cost `a` in `[[0,1,a],[1,0,a]]`.
        #[arg(long, value_parser = parse_rational, default_value = "2/5")]
        a: BigRational,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long, value_delimiter = ',', default_value = "64,256,4096")]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Largest expected index for which the real encoder runs.
        #[arg(long, default_value_t = 1e5)]
        encode_limit: f64,
    },
    /// Run every invariant check on the pair.
    VerifyAll,
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    s.trim()
        .parse::<BigRational>()
        .map_err(|e| format!("{s:?} is not a rational p/q: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
