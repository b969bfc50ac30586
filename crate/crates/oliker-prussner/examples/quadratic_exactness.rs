//! Machine-precision sanity check: for u = x'Ax/2 the subdifferential
//! measure of the nodal interpolant equals h^2 det A exactly, so solving
//! with those loads must return the interpolant up to round-off.
//!
//! Run with `cargo run --release --example quadratic_exactness`.

use oliker_prussner::cli::{problem_loads, LoadScheme};
use oliker_prussner::domain_nodes::generate_nodal_set;
use oliker_prussner::geom::Point2;
use oliker_prussner::problems::quadratic;
use oliker_prussner::solver::{solve, SolverConfig};

fn main() -> oliker_prussner::Result<()> {
    let problem = quadratic(2.0, 1.0, 2.0)?;
    for h in [0.125, 0.0625] {
        let nodes = generate_nodal_set(&problem.domain, h, Point2::new(0.0, 0.0))?;
        let loads = problem_loads(&problem, &nodes, LoadScheme::ExactMeasure)?;
        let cfg = SolverConfig { rel_tol: 1e-12, ..Default::default() };
        let (u, stats) = solve(&nodes, problem.g.as_ref(), &loads, None, &cfg)?;
        let exact = problem.exact.as_ref().unwrap();
        let err = nodes
            .positions()
            .iter()
            .zip(&u.values)
            .map(|(&p, &v)| (v - exact(p)).abs())
            .fold(0.0_f64, f64::max);
        println!(
            "h = {h:<8} max |u_h - u| = {err:.3e}  ({} sweeps, residual {:.1e})",
            stats.sweeps, stats.final_residual
        );
    }
    Ok(())
}
