//! Command-line front end: convergence tables and contact-set diagnostics
//! for the discrete Monge-Ampere solver.

use clap::Parser;
use oliker_prussner::cli::{run_convergence, run_diagnostics, RunConfig};
use oliker_prussner::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "op-ma",
    about = "Convergence studies and diagnostics for a discrete Monge-Ampere solver"
)]
struct Args {
    /// Optional key=value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem to run: 1, 2, 3, or quadratic.
    #[arg(long)]
    example: Option<String>,
    /// Number of mesh halvings starting from --h0.
    #[arg(long)]
    levels: Option<usize>,
    /// Coarsest mesh size.
    #[arg(long)]
    h0: Option<f64>,
    /// Relative solver tolerance on the measure residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Second-difference norm variant: ninepoint or weighted.
    #[arg(long, value_name = "VARIANT")]
    norm_variant: Option<String>,
    /// H1 error variant: norm or seminorm.
    #[arg(long, value_name = "VARIANT")]
    h1: Option<String>,
    /// Output format: csv or markdown.
    #[arg(long)]
    format: Option<String>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated contact parameters; given a list, a diagnostics
    /// sweep runs instead of the convergence table.
    #[arg(long)]
    eps: Option<String>,
    /// Interior-band width multiplier for the consistency check.
    #[arg(long)]
    rtest: Option<f64>,
    /// Lattice offset as X,Y.
    #[arg(long)]
    offset: Option<String>,
    /// Write the finest-level solution envelope as an OFF mesh.
    #[arg(long, value_name = "PATH")]
    dump_mesh: Option<PathBuf>,
    /// Entries of the quadratic problem matrix as a11,a12,a22.
    #[arg(long)]
    quadratic: Option<String>,
    #[arg(long, short)]
    verbose: bool,
}

fn build_config(args: &Args) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    // flag order matters: h0 must precede levels so the count regenerates
    // from the right coarsest size, and vice versa is harmless
    if let Some(v) = args.h0 {
        cfg.set("h0", &v.to_string())?;
    }
    if let Some(v) = args.levels {
        cfg.set("levels", &v.to_string())?;
    }
    let pairs: [(&str, Option<String>); 9] = [
        ("example", args.example.clone()),
        ("tol", args.tol.map(|v| v.to_string())),
        ("norm-variant", args.norm_variant.clone()),
        ("h1", args.h1.clone()),
        ("format", args.format.clone()),
        ("eps", args.eps.clone()),
        ("rtest", args.rtest.map(|v| v.to_string())),
        ("offset", args.offset.clone()),
        ("quadratic", args.quadratic.clone()),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    if let Some(path) = &args.out {
        cfg.out = Some(path.clone());
    }
    if let Some(path) = &args.dump_mesh {
        cfg.dump_mesh = Some(path.clone());
    }
    if args.verbose {
        cfg.verbose = true;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match build_config(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = if cfg.eps.is_empty() {
        run_convergence(&cfg).map(|_| ())
    } else {
        run_diagnostics(&cfg).map(|_| ())
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::NonConvergence { sweeps, final_residual, .. }) => {
            eprintln!("solver did not converge: residual {final_residual:.3e} after {sweeps} sweeps");
            ExitCode::from(2)
        }
        Err(e @ Error::InvalidConfig(_)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
