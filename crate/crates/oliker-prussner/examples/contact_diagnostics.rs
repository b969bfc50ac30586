//! Stability diagnostics on contact sets: solves the smooth benchmark, then
//! a perturbed problem with inflated loads, and reports contact-set sizes,
//! the two-sided measure bounds, and second-difference violation counts per
//! epsilon (all expected to be zero violations).
//!
//! Run with `cargo run --release --example contact_diagnostics`.

use oliker_prussner::cli::{run_diagnostics, ExampleId, RunConfig};

fn main() -> oliker_prussner::Result<()> {
    let cfg = RunConfig {
        example: ExampleId::One,
        levels: vec![0.25, 0.125],
        rel_tol: 1e-8,
        eps: vec![0.25, 0.5, 0.75],
        ..Default::default()
    };
    run_diagnostics(&cfg)?; // prints the CSV to stdout
    Ok(())
}
