use std::path::PathBuf;
use std::process::ExitCode;

use bura_experiments::{execute, Command, RunConfig};
use clap::{Args, Parser, Subcommand};

/// BURA / RS-BURA experiments.
#[derive(Parser)]
#[command(name = "bura", version)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Working precision in decimal digits (16, 32 or 64).
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory of cached approximations.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimax approximation of t^alpha with barycentric and partial-fraction exports.
    Approx {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Solver-form coefficients for several degrees.
    Coeffs {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<usize>>,
        #[arg(long)]
        lambda1: Option<f64>,
    },
    /// Minimal degree per accuracy and alpha.
    Table1 {
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        accuracies: Option<Vec<f64>>,
        #[arg(long)]
        max_k: Option<usize>,
    },
    /// Error curves of the full and reduced sums.
    Figure1 {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        kprime: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Smallest reduced size whose predicted gap order beats a target.
    SuggestKprime {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        target_order: Option<i32>,
    },
    /// Certified fractional solve on a uniform grid.
    Solve(SolveArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    kprime: Option<usize>,
    /// Choose kprime with the order heuristic.
    #[arg(long)]
    suggest: bool,
    #[arg(long, allow_hyphen_values = true)]
    target_order: Option<i32>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rhs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cg_tolerance: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn configure(cli: Cli) -> bura_experiments::Result<(RunConfig, Command)> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.precision, cli.precision);
    set(&mut cfg.out, cli.out);
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.cache_dir.is_some() {
        cfg.cache_dir = cli.cache_dir;
    }
    let command = match cli.command {
        Cmd::Approx { alpha, k } => {
            set(&mut cfg.approx.alpha, alpha);
            set(&mut cfg.approx.k, k);
            Command::Approx
        }
        Cmd::Coeffs { alpha, ks, lambda1 } => {
            set(&mut cfg.coeffs.alpha, alpha);
            set(&mut cfg.coeffs.ks, ks);
            set(&mut cfg.coeffs.lambda1, lambda1);
            Command::Coeffs
        }
        Cmd::Table1 { alphas, accuracies, max_k } => {
            set(&mut cfg.table1.alphas, alphas);
            set(&mut cfg.table1.accuracies, accuracies);
            set(&mut cfg.table1.max_k, max_k);
            Command::Table1
        }
        Cmd::Figure1 { alpha, k, kprime, deltas, samples } => {
            let f = &mut cfg.figure1;
            set(&mut f.alpha, alpha);
            set(&mut f.k, k);
            set(&mut f.kprime, kprime);
            set(&mut f.deltas, deltas);
            set(&mut f.samples, samples);
            Command::Figure1
        }
        Cmd::SuggestKprime { alpha, k, delta, target_order } => {
            let s = &mut cfg.suggest_kprime;
            set(&mut s.alpha, alpha);
            set(&mut s.k, k);
            set(&mut s.delta, delta);
            if target_order.is_some() {
                s.target_order = target_order;
            }
            Command::SuggestKprime
        }
        Cmd::Solve(a) => {
            let s = &mut cfg.solve;
            set(&mut s.alpha, a.alpha);
            set(&mut s.k, a.k);
            if a.kprime.is_some() {
                s.kprime = a.kprime;
            }
            s.suggest |= a.suggest;
            if a.target_order.is_some() {
                s.target_order = a.target_order;
            }
            set(&mut s.dim, a.dim);
            set(&mut s.n, a.n);
            set(&mut s.rhs, a.rhs);
            set(&mut s.seed, a.seed);
            set(&mut s.cg_tolerance, a.cg_tolerance);
            Command::Solve
        }
    };
    Ok((cfg, command))
}

fn run(cli: Cli) -> bura_experiments::Result<bool> {
    let (cfg, command) = configure(cli)?;
    cfg.validate()?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let outcome = execute(&cfg, command)?;
    print!("{}", outcome.message);
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("certificate failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
