//! Consistency of the discrete measure: interpolate the exact smooth
//! solution, compare its subdifferential measures against the hat-function
//! loads, and report the decay of the defect.  Deep inside the domain the
//! defect decays like h^4; in an O(h) band near the boundary it is only
//! O(h^2).
//!
//! Run with `cargo run --release --example consistency_decay`.

use oliker_prussner::diagnostics::{consistency_decay, regression_slope};
use oliker_prussner::geom::Point2;
use oliker_prussner::problems::example1;

fn main() -> oliker_prussner::Result<()> {
    let problem = example1();
    let levels = [0.125, 0.0625, 0.03125, 0.015625];
    let rows = consistency_decay(&problem, &levels, Point2::new(0.0, 0.0), 3.0)?;
    println!("{:>10} {:>16} {:>16} {:>14}", "h", "interior defect", "boundary defect", "boundary/h^2");
    let mut pts = Vec::new();
    for r in &rows {
        println!(
            "{:>10} {:>16.4e} {:>16.4e} {:>14.4}",
            r.h,
            r.interior_defect,
            r.boundary_defect,
            r.boundary_defect / (r.h * r.h)
        );
        pts.push((r.h, r.interior_defect));
    }
    println!("\ninterior decay slope (defect ~ h^p): p = {:.2}", regression_slope(&pts));
    Ok(())
}
