//! Convergence study for the smooth benchmark problem: solves the discrete
//! Monge-Ampere equation on a sequence of halved mesh sizes and prints the
//! error table (L-infinity, H1, and the two nine-point second-difference
//! norms) with observed rates.
//!
//! Run with `cargo run --release --example convergence_table`.

use oliker_prussner::cli::{levels_from, run_convergence, ExampleId, RunConfig};

fn main() -> oliker_prussner::Result<()> {
    let cfg = RunConfig {
        example: ExampleId::One,
        levels: levels_from(0.5, 5), // h = 1/2 .. 1/32
        rel_tol: 1e-8,
        ..Default::default()
    };
    run_convergence(&cfg)?; // prints the table to stdout
    Ok(())
}
