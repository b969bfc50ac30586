//! Exports the triangulation induced by a computed convex solution as an
//! OFF file (lifted to the solution graph, so the mesh can be inspected in
//! any surface viewer).
//!
//! Run with `cargo run --release --example mesh_export -- [out.off]`.

use oliker_prussner::cli::{default_loads, problem_loads};
use oliker_prussner::domain_nodes::generate_nodal_set;
use oliker_prussner::envelope::LowerEnvelope;
use oliker_prussner::geom::Point2;
use oliker_prussner::problems::example2;
use oliker_prussner::solver::{solve, SolverConfig};
use oliker_prussner::cli::ExampleId;

fn main() -> oliker_prussner::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "solution_mesh.off".into());
    let problem = example2();
    let nodes = generate_nodal_set(&problem.domain, 0.125, Point2::new(0.0, 0.0))?;
    let loads = problem_loads(&problem, &nodes, default_loads(ExampleId::Two))?;
    let cfg = SolverConfig { rel_tol: 1e-8, ..Default::default() };
    let (u, _) = solve(&nodes, problem.g.as_ref(), &loads, None, &cfg)?;
    let env = LowerEnvelope::new(nodes.positions().to_vec(), u.values)?;
    let file = std::fs::File::create(&path).map_err(oliker_prussner::Error::Io)?;
    env.write_off(std::io::BufWriter::new(file))?;
    println!("wrote induced mesh of {} nodes to {path}", nodes.len());
    Ok(())
}
