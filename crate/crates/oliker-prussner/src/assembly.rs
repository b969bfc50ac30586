//! Background triangulation and hat-function load assembly.
//!
//! The right-hand side sent to the solver at an interior node is the integral
//! of the density against the node's piecewise-linear hat function on a fixed
//! background triangulation of the nodal set.  The triangulation is obtained
//! as the induced mesh of the lower envelope of `|x|^2`, which is exactly a
//! Delaunay triangulation of the nodes.

use crate::domain_nodes::{NodalSet, NodeId};
use crate::envelope::LowerEnvelope;
use crate::error::{Error, Result};
use crate::geom::{orient2d, Point2};

/// Fixed triangulation of the nodal set used for quadrature.
#[derive(Debug, Clone)]
pub struct BackgroundMesh {
    positions: Vec<Point2>,
    triangles: Vec<[NodeId; 3]>,
}

impl BackgroundMesh {
    /// Delaunay triangulation of the nodes, via the envelope of `|x|^2`.
    pub fn new(nodes: &NodalSet) -> Result<Self> {
        let positions = nodes.positions().to_vec();
        // the tiny xy term breaks the diagonal ties of the square lattice
        // consistently, so every interior node gets the same six-triangle star
        let eps = 0.01 * nodes.h;
        let values: Vec<f64> = positions.iter().map(|p| p.norm_sq() + eps * p.x * p.y).collect();
        let env = LowerEnvelope::new(positions.clone(), values)?;
        for i in 0..positions.len() {
            if !env.is_vertex(i) {
                // a node that is not a mesh vertex would receive no load
                return Err(Error::Hypothesis {
                    node: i,
                    what: "node dropped from the background triangulation".into(),
                });
            }
        }
        let mut triangles: Vec<[NodeId; 3]> = env.live_facets().map(|f| f.vertices).collect();
        triangles.sort_unstable();
        Ok(BackgroundMesh { positions, triangles })
    }

    pub fn triangles(&self) -> &[[NodeId; 3]] {
        &self.triangles
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                0.5 * orient2d(self.positions[t[0]], self.positions[t[1]], self.positions[t[2]])
                    .abs()
            })
            .sum()
    }
}

/// Degree-5 exact 7-point triangle rule: barycentric abscissae and weights
/// (weights sum to 1; scale by the triangle area).
pub(crate) const QUAD_DEG5: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.101_286_507_323_456_34; // (6 - sqrt 15) / 21
    const A2: f64 = 0.470_142_064_105_115_1; //  (6 + sqrt 15) / 21
    const B1: f64 = 1.0 - 2.0 * A1;
    const B2: f64 = 1.0 - 2.0 * A2;
    const W1: f64 = 0.125_939_180_544_827_15; // (155 - sqrt 15) / 1200
    const W2: f64 = 0.132_394_152_788_506_18; // (155 + sqrt 15) / 1200
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, A1, B1], W1),
        ([A1, B1, A1], W1),
        ([B1, A1, A1], W1),
        ([A2, A2, B2], W2),
        ([A2, B2, A2], W2),
        ([B2, A2, A2], W2),
    ]
};

/// Optional quadrature refinement: triangles flagged by the predicate are
/// split uniformly into four, up to `depth` levels.
pub struct Refinement<'a> {
    pub flag: &'a dyn Fn(Point2, Point2, Point2) -> bool,
    pub depth: usize,
}

/// Integrates `f` against every nodal hat function; returns one load per node.
pub fn assemble_load(
    mesh: &BackgroundMesh,
    f: &dyn Fn(Point2) -> f64,
    refine: Option<&Refinement>,
) -> Vec<f64> {
    let mut loads = vec![0.0; mesh.positions.len()];
    for t in &mesh.triangles {
        let p = [mesh.positions[t[0]], mesh.positions[t[1]], mesh.positions[t[2]]];
        let bary = [
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.0, 0.0), // third coordinate is implicit
        ];
        let mut acc = [0.0; 3];
        let depth = refine.map_or(0, |r| r.depth);
        integrate_tri(p, bary, f, refine, depth, &mut acc);
        for k in 0..3 {
            loads[t[k]] += acc[k];
        }
    }
    loads
}

/// Integrates `f * phi_k` over a (sub-)triangle with corners `p` whose
/// barycentric coordinates relative to the root triangle are encoded in
/// `bary` (first two coordinates; the third is `1 - b.x - b.y`).
fn integrate_tri(
    p: [Point2; 3],
    bary: [Point2; 3],
    f: &dyn Fn(Point2) -> f64,
    refine: Option<&Refinement>,
    depth: usize,
    acc: &mut [f64; 3],
) {
    if depth > 0 {
        if let Some(r) = refine {
            if (r.flag)(p[0], p[1], p[2]) {
                let m01 = (p[0] + p[1]).scale(0.5);
                let m12 = (p[1] + p[2]).scale(0.5);
                let m20 = (p[2] + p[0]).scale(0.5);
                let b01 = (bary[0] + bary[1]).scale(0.5);
                let b12 = (bary[1] + bary[2]).scale(0.5);
                let b20 = (bary[2] + bary[0]).scale(0.5);
                integrate_tri([p[0], m01, m20], [bary[0], b01, b20], f, refine, depth - 1, acc);
                integrate_tri([m01, p[1], m12], [b01, bary[1], b12], f, refine, depth - 1, acc);
                integrate_tri([m20, m12, p[2]], [b20, b12, bary[2]], f, refine, depth - 1, acc);
                integrate_tri([m01, m12, m20], [b01, b12, b20], f, refine, depth - 1, acc);
                return;
            }
        }
    }
    let area = 0.5 * orient2d(p[0], p[1], p[2]).abs();
    for (q, w) in QUAD_DEG5 {
        let x = p[0].scale(q[0]) + p[1].scale(q[1]) + p[2].scale(q[2]);
        let b = bary[0].scale(q[0]) + bary[1].scale(q[1]) + bary[2].scale(q[2]);
        let fv = w * area * f(x);
        acc[0] += fv * b.x;
        acc[1] += fv * b.y;
        acc[2] += fv * (1.0 - b.x - b.y);
    }
}
