//! Subdifferential cells of a convex nodal function.
//!
//! At a node `x_i` the subdifferential of the envelope is the polygon
//! `{ p : p . (x_j - x_i) <= v_j - v_i  for all nodes j }`, which coincides
//! with the convex hull of the gradients of the envelope facets meeting at
//! `x_i`.  Both characterizations are implemented; the half-plane route is
//! the independent oracle and the hull-of-gradients route is the fast path
//! used by the solver.

use crate::domain_nodes::NodeId;
use crate::envelope::LowerEnvelope;
use crate::error::{Error, Result};
use crate::geom::{convex_hull, halfplane_intersection, polygon_area, HalfPlane, Point2};

/// A (possibly degenerate) subdifferential cell.
#[derive(Debug, Clone)]
pub struct SubdiffCell {
    /// Counter-clockwise vertices; fewer than 3 for degenerate cells.
    pub vertices: Vec<Point2>,
    pub measure: f64,
}

impl SubdiffCell {
    fn from_points(points: Vec<Point2>) -> SubdiffCell {
        let hull = convex_hull(&points);
        let measure = if hull.len() >= 3 { polygon_area(&hull) } else { 0.0 };
        SubdiffCell { vertices: hull, measure }
    }

    pub fn empty() -> SubdiffCell {
        SubdiffCell { vertices: Vec::new(), measure: 0.0 }
    }
}

/// Cell of node `i` read off the envelope star: the convex hull of the
/// gradients of all facets whose closure contains `x_i`.  Only meaningful for
/// nodes interior to the hull; a hull-boundary vertex has an unbounded cell.
pub fn cell_from_star(env: &LowerEnvelope, i: NodeId) -> Result<SubdiffCell> {
    if env.is_vertex(i) {
        if env.on_hull_boundary(i) {
            return Err(Error::UnboundedCell);
        }
        let grads: Vec<Point2> = env.star(i).iter().map(|&f| env.facet(f).gradient).collect();
        return Ok(SubdiffCell::from_points(grads));
    }
    if env.is_active(i)? {
        // degenerate flat spot: the point is on the envelope but not a
        // vertex; the cell collapses to the gradients of the facets it sits on
        let grads: Vec<Point2> = env
            .facets_containing(env.position(i))?
            .iter()
            .map(|&f| env.facet(f).gradient)
            .collect();
        return Ok(SubdiffCell::from_points(grads));
    }
    Ok(SubdiffCell::empty())
}

/// Cell at position `x` with trial value `t`, constrained by the listed nodes
/// only: `{ p : p . (x_j - x) <= v_j - t }`.  Sound whenever the list
/// contains all envelope neighbors the point would acquire at value `t`.
pub fn cell_from_constraints(
    positions: &[Point2],
    values: &[f64],
    x: Point2,
    t: f64,
    constraints: &[NodeId],
) -> Result<SubdiffCell> {
    let planes: Vec<HalfPlane> = constraints
        .iter()
        .map(|&j| HalfPlane { n: positions[j] - x, c: values[j] - t })
        .collect();
    let vertices = halfplane_intersection(&planes)?;
    let measure = if vertices.len() >= 3 { polygon_area(&vertices) } else { 0.0 };
    Ok(SubdiffCell { vertices, measure })
}

/// Independent full-constraint oracle for the cell at node `i`.
pub fn cell_oracle(positions: &[Point2], values: &[f64], i: NodeId) -> Result<SubdiffCell> {
    let others: Vec<NodeId> = (0..positions.len()).filter(|&j| j != i).collect();
    cell_from_constraints(positions, values, positions[i], values[i], &others)
}

/// Subdifferential measure of node `i` from the envelope structure.
pub fn measure_from_star(env: &LowerEnvelope, i: NodeId) -> Result<f64> {
    Ok(cell_from_star(env, i)?.measure)
}
