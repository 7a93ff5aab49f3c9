use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use wavekin::bounds::compute_constants;
use wavekin::cli::{parse_config, run_scenario, RunOptions};
use wavekin::phase::MaxwellianParams;
use wavekin::resonance::manifold::undoubled_constant;
use wavekin::resonance::{brute_force_oracle, kernel_constant, manifold_constant, OracleSpec};

#[derive(Parser)]
#[command(
    name = "wavekin",
    version,
    about = "Near-vacuum solver for the four-wave kinetic equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write diagnostics.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the file).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; results do not depend on this.
        #[arg(long, env = "WAVEKIN_THREADS")]
        threads: Option<usize>,
        /// Seed for randomized diagnostics (overrides `seed` in the file).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print K_beta, R_max and c_d.
    CheckConstants {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        dim: usize,
    },
    /// Compare the mollified-delta integral with the manifold constant.
    Oracle {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Relative tolerance against c_d.
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> wavekin::Result<bool> {
    match command {
        Command::Run {
            config,
            out,
            threads,
            seed,
        } => {
            if let Some(n) = threads.filter(|&n| n > 0) {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            let cfg = parse_config(&config)?;
            let report = run_scenario(&cfg, &RunOptions { output_dir: out, seed })?;
            for c in report.failures() {
                eprintln!("FAILED {}: {:e} > {:e}", c.name, c.value, c.limit);
            }
            info!("outputs in {}", report.output_dir.display());
            Ok(report.passed())
        }
        Command::CheckConstants { alpha, beta, dim } => {
            let c = compute_constants(&MaxwellianParams::new(alpha, beta, dim)?)?;
            println!("c_d     = {:.15e}", c.c_d);
            println!("S_beta  = {:.15e}", c.s_beta);
            println!("K_beta  = {:.15e}", c.k_beta);
            println!("R_max   = {:.15e}", c.r_max);
            println!("48 K alpha^-1/2 R_max^2 = {:.15e}", c.contraction_budget(c.r_max));
            Ok(true)
        }
        Command::Oracle { dim, eps, tol } => {
            let mut v = vec![0.0; dim];
            let mut v1 = vec![0.0; dim];
            v[0] = 1.0;
            v1[0] = -1.0;
            let c = kernel_constant(dim)?;
            let scale = manifold_constant(&v, &v1, dim)? / c;
            let out = brute_force_oracle(|_, _| 1.0, &v, &v1, eps, &OracleSpec::default())?;
            let value = out.value() / scale;
            let printed = undoubled_constant(dim)?;
            println!(
                "oracle (eps = {eps}, {eps}/2, extrapolated) = {:.10}, {:.10}, {value:.10}",
                out.coarse / scale,
                out.fine / scale
            );
            println!("c_d = d omega_d / 2^d  = {c:.10}  rel. diff {:.3e}", value / c - 1.0);
            println!(
                "d omega_d / 2^(d-1)    = {printed:.10}  rel. diff {:.3e}",
                value / printed - 1.0
            );
            Ok((value / c - 1.0).abs() <= tol)
        }
    }
}
