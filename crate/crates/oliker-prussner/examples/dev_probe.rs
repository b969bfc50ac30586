//! Scratch: debug star-vs-oracle mismatch on offset lattice.
use oliker_prussner::diagnostics::random_convex_values;
use oliker_prussner::domain_nodes::generate_nodal_set;
use oliker_prussner::envelope::LowerEnvelope;
use oliker_prussner::geom::Point2;
use oliker_prussner::subdifferential::{cell_from_star, cell_oracle};
use oliker_prussner::Domain;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let nodes = generate_nodal_set(
        &Domain::unit_square2(),
        0.25,
        Point2::new(0.09751527946799617, 0.012586401242340424),
    )
    .unwrap();
    let positions = nodes.positions().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let values = random_convex_values(&positions, &mut rng);
    let env = LowerEnvelope::new(positions.clone(), values.clone()).unwrap();
    let i = 2;
    println!("node {i} at {:?}, interior range {:?}", positions[i], nodes.interior_ids());
    let star = cell_from_star(&env, i).unwrap();
    let oracle = cell_oracle(&positions, &values, i).unwrap();
    println!("star measure {}  vertices {:?}", star.measure, star.vertices);
    println!("oracle measure {}  vertices {:?}", oracle.measure, oracle.vertices);
    println!("is_vertex: {}", env.is_vertex(i));
    for fid in env.star(i) {
        let f = env.facet(fid);
        println!("facet {fid}: verts {:?} grad {:?}", f.vertices, f.gradient);
    }
    println!("check_valid: {:?}", env.check_valid());
    for j in [1usize, 3, 8, 9, 77, 78] {
        let below = env.evaluate(positions[j]).unwrap();
        println!(
            "node {j}: value {:.12}  envelope {:.12}  above by {:.3e}  is_vertex {}",
            values[j], below, values[j] - below, env.is_vertex(j)
        );
    }
    // does node 8's halfplane cut the oracle cell?
    let j = 8usize;
    let d = positions[j] - positions[i];
    let rhs = values[j] - values[i];
    for v in &oracle.vertices {
        println!("oracle vertex {:?}: lhs {:.12} rhs {:.12} slack {:.3e}", v, v.dot(d), rhs, rhs - v.dot(d));
    }
    // dump all constraint planes for offline replication
    for (j, &p) in positions.iter().enumerate() {
        if j == i { continue; }
        let d = p - positions[i];
        println!("PLANE {j} {:.17} {:.17} {:.17}", d.x, d.y, values[j] - values[i]);
    }
    // inspect constraint planes parallel to node 8's
    let d8 = positions[8] - positions[i];
    let a8 = d8.y.atan2(d8.x);
    let c8 = (values[8] - values[i]) / d8.norm();
    println!("node 8: angle {a8:.17} c_norm {c8:.12}");
    for (j, &p) in positions.iter().enumerate() {
        if j == i || j == 8 { continue; }
        let d = p - positions[i];
        let ang = d.y.atan2(d.x);
        if (ang - a8).abs() < 1e-9 {
            let c = (values[j] - values[i]) / d.norm();
            println!("node {j} parallel: angle {ang:.17} c_norm {c:.12} (keeps {})", if c < c8 {"j"} else {"8"});
        }
    }
    // which constraints bind in the oracle?
    for (j, &p) in positions.iter().enumerate() {
        if j == i { continue; }
        // constraint: g . (p - x_i) <= v_j - v_i; check tightness at oracle vertices
        for v in &oracle.vertices {
            let lhs = v.dot(p - positions[i]);
            let rhs = values[j] - values[i];
            if (lhs - rhs).abs() < 1e-9 {
                println!("binding constraint from node {j} at {:?} (pos {:?})", v, p);
            }
        }
    }
}
