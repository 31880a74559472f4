//! `vnlab`: validate weight families, build truncations and adjudicate von
//! Neumann's inequality from the shell.
//!
//! Exit codes: 0 success / holds, 1 malformed input or I/O failure,
//! 2 rejected input (weights, intertwiner, decomposition), 3 violated,
//! 4 inconclusive, 5 example not reproduced.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vnlab_core::linalg::PowerIterationConfig;
use vnlab_core::poly::SupConfig;
use vnlab_core::vncheck::VnConfig;

#[derive(Parser, Debug)]
#[command(name = "vnlab", version, about = "Numerical checks of von Neumann's inequality")]
pub struct Cli {
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true, env = "VNLAB_THREADS")]
    threads: Option<usize>,

    /// Seed for power iteration start vectors and generated polynomials.
    #[arg(long, global = true, env = "VNLAB_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that a weight family covers the box and commutes there.
    Validate {
        weights: PathBuf,
        #[arg(long = "box", value_delimiter = ',', required = true)]
        sides: Vec<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare ‖p(T)‖ with the certified polydisc sup of |p|.
    Check(CheckArgs),
    /// Sweep the Varopoulos parameter c and locate the certified region.
    Sweep {
        #[arg(long, default_value_t = 0.05)]
        c_from: f64,
        #[arg(long, default_value_t = 0.12)]
        c_to: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Polynomial file; p_V when omitted.
        #[arg(long)]
        poly: Option<PathBuf>,
        #[command(flatten)]
        precision: Precision,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build the unitary intertwiner between two weight families.
    Intertwine {
        weights_a: PathBuf,
        weights_b: PathBuf,
        #[arg(long = "box", value_delimiter = ',', required = true)]
        sides: Vec<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Split a diagonal family into classical components and certify norms.
    Decompose {
        weights: PathBuf,
        #[arg(long = "box", value_delimiter = ',', required = true)]
        sides: Vec<usize>,
        /// Random polynomials added to the coordinate functions.
        #[arg(long, default_value_t = 8)]
        polys: usize,
        #[command(flatten)]
        precision: Precision,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the Varopoulos–Kaijser counterexample end to end.
    ReproduceExample {
        #[arg(long, default_value_t = 0.05)]
        c: f64,
        #[command(flatten)]
        precision: Precision,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Weight family; the tuple is its truncation to --box.
    #[arg(long, group = "tuple_source", requires = "sides")]
    weights: Option<PathBuf>,
    /// Dense tuple `{"matrices": [M, ...]}`.
    #[arg(long, group = "tuple_source")]
    tuple: Option<PathBuf>,
    /// Built-in Varopoulos tuple at this c.
    #[arg(long, group = "tuple_source")]
    varopoulos: Option<f64>,
    #[arg(long, group = "poly_source")]
    poly: Option<PathBuf>,
    /// Built-in p_V = Σ a_jk z_j z_k.
    #[arg(long, group = "poly_source")]
    pv: bool,
    #[arg(long = "box", value_delimiter = ',')]
    sides: Option<Vec<usize>>,
    #[command(flatten)]
    precision: Precision,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Precision {
    #[arg(long, default_value_t = 200)]
    grid_n: usize,
    #[arg(long, default_value_t = 20)]
    refine_steps: usize,
    /// Target sup bracket width; 0 keeps the plain grid bracket.
    #[arg(long, default_value_t = 1e-4)]
    cert_tol: f64,
    /// Verdict slack around the sup bracket.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    power_tol: f64,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    /// Norm estimator: auto, dense-svd or power-iteration.
    #[arg(long, default_value = "auto")]
    norm_method: String,
}

impl Precision {
    fn vn_config(&self, seed: u64) -> VnConfig {
        VnConfig {
            sup: SupConfig {
                grid_n: self.grid_n,
                refine_steps: self.refine_steps,
                cert_tol: self.cert_tol,
                ..Default::default()
            },
            norm_method: self.norm_method.clone(),
            power: PowerIterationConfig { tol: self.power_tol, max_iter: self.max_iter, seed },
            tolerance: self.tol,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli.command, cli.seed) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
