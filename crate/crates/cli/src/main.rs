use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nash_stokes_cli::{run, Overrides, RunConfig, Workflow};

/// Two-player Nash equilibria of Stokes distributed control.
#[derive(Parser)]
#[command(name = "nash-stokes", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Solve for the equilibrium on the finest configured mesh.
    Solve(Common),
    /// Manufactured-solution error table with convergence orders.
    Converge(Common),
    /// Run every method and tabulate pairwise control gaps.
    Compare(Common),
    /// The five-subdomain example with the stream function target.
    ExampleMultidomain(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
}

fn thread_count(value: Option<&str>) -> Result<Option<usize>> {
    let Some(value) = value else {
        return Ok(None);
    };
    let n = value
        .trim()
        .parse()
        .ok()
        .filter(|&n: &usize| n > 0)
        .with_context(|| format!("NASH_STOKES_THREADS must be a positive integer, got '{value}'"))?;
    Ok(Some(n))
}

fn split(verb: Verb) -> (Workflow, Common) {
    match verb {
        Verb::Solve(a) => (Workflow::Solve, a),
        Verb::Converge(a) => (Workflow::Converge, a),
        Verb::Compare(a) => (Workflow::Compare, a),
        Verb::ExampleMultidomain(a) => (Workflow::ExampleMultidomain, a),
    }
}

fn main_inner() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = thread_count(std::env::var("NASH_STOKES_THREADS").ok().as_deref())? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let (workflow, args) = split(cli.verb);
    let cfg = RunConfig::load(&args.config)?;
    let overrides = Overrides {
        method: args.method,
        tol: args.tol,
        max_iter: args.max_iter,
        theta: args.theta,
    };
    let summary = run(workflow, &cfg, &overrides, args.out.as_deref())?;
    println!(
        "{} finished: method {}, {} iterations, final residual {:.3e}",
        summary.workflow, summary.method, summary.iterations, summary.final_residual
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
