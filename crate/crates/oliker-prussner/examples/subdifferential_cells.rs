//! Subdifferential cells of a convex nodal function, computed two ways:
//! locally from the star of envelope facets around a node, and by the
//! brute-force halfplane oracle that intersects the constraints from every
//! other node.  The two agree to near round-off; the local version is what
//! the solver uses.
//!
//! Run with `cargo run --release --example subdifferential_cells`.

use oliker_prussner::domain_nodes::generate_nodal_set;
use oliker_prussner::envelope::LowerEnvelope;
use oliker_prussner::geom::Point2;
use oliker_prussner::subdifferential::{cell_from_star, cell_oracle};
use oliker_prussner::Domain;

fn main() -> oliker_prussner::Result<()> {
    let domain = Domain::unit_square2();
    let nodes = generate_nodal_set(&domain, 0.25, Point2::new(0.0, 0.0))?;
    // a smooth strictly convex function plus a kink along x = 0.1
    let v = |p: Point2| p.norm_sq() + 0.3 * (p.x - 0.1).abs();
    let values: Vec<f64> = nodes.positions().iter().map(|&p| v(p)).collect();
    let env = LowerEnvelope::new(nodes.positions().to_vec(), values.clone())?;

    println!("{:>6} {:>10} {:>14} {:>14} {:>10}", "node", "position", "star measure", "oracle", "vertices");
    for i in nodes.interior_ids().step_by(7) {
        let star = cell_from_star(&env, i)?;
        let oracle = cell_oracle(nodes.positions(), &values, i)?;
        let p = nodes.position(i);
        println!(
            "{i:>6} ({:>4.2},{:>4.2}) {:>14.10} {:>14.10} {:>10}",
            p.x,
            p.y,
            star.measure,
            oracle.measure,
            star.vertices.len()
        );
        assert!((star.measure - oracle.measure).abs() <= 1e-12);
    }
    println!("\nall sampled cells agree with the halfplane oracle to 1e-12");
    Ok(())
}
