//! Convex domains and translation-invariant nodal sets.
//!
//! Interior nodes form the affine lattice `offset + h Z^2` restricted to
//! points at distance at least `h/2` from the boundary; boundary nodes
//! are placed on the boundary itself with spacing at most `h`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{orient2d, Point2};

pub type NodeId = usize;

/// A bounded convex domain in the plane.
#[derive(Debug, Clone)]
pub enum Domain {
    /// Axis-aligned square given by center and half-width.
    Square { center: Point2, half_width: f64 },
    Disk { center: Point2, radius: f64 },
    /// Strictly convex polygon, vertices CCW.
    Polygon { vertices: Vec<Point2> },
}

impl Domain {
    pub fn square(center: Point2, half_width: f64) -> Self {
        Domain::Square { center, half_width }
    }

    /// The square (-1,1)^2 used in all the built-in problems.
    pub fn unit_square2() -> Self {
        Domain::square(Point2::new(0.0, 0.0), 1.0)
    }

    pub fn disk(center: Point2, radius: f64) -> Self {
        Domain::Disk { center, radius }
    }

    pub fn polygon(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::NonConvexPolygon);
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if orient2d(a, b, c) <= 0.0 {
                return Err(Error::NonConvexPolygon);
            }
        }
        Ok(Domain::Polygon { vertices })
    }

    /// Signed distance to the boundary: negative inside, positive outside.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        match self {
            Domain::Square { center, half_width } => {
                let dx = (p.x - center.x).abs() - half_width;
                let dy = (p.y - center.y).abs() - half_width;
                if dx > 0.0 || dy > 0.0 {
                    let ox = dx.max(0.0);
                    let oy = dy.max(0.0);
                    (ox * ox + oy * oy).sqrt()
                } else {
                    dx.max(dy)
                }
            }
            Domain::Disk { center, radius } => (p - *center).norm() - radius,
            Domain::Polygon { vertices } => {
                // for interior points of a convex polygon the distance to the
                // boundary is the distance to the nearest edge line
                let n = vertices.len();
                let mut sd = f64::NEG_INFINITY;
                let mut outside = false;
                let mut out_d = f64::INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let e = b - a;
                    let len = e.norm();
                    let nrm = Point2::new(e.y / len, -e.x / len); // outward for CCW
                    let d = nrm.dot(p - a);
                    sd = sd.max(d);
                    if d > 0.0 {
                        outside = true;
                    }
                    // distance to segment for the outside case
                    let t = (e.dot(p - a) / (len * len)).clamp(0.0, 1.0);
                    let foot = a + e.scale(t);
                    out_d = out_d.min((p - foot).norm());
                }
                if outside {
                    out_d
                } else {
                    sd
                }
            }
        }
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.signed_distance(p) <= tol
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Square { half_width, .. } => 2.0 * std::f64::consts::SQRT_2 * half_width,
            Domain::Disk { radius, .. } => 2.0 * radius,
            Domain::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        d = d.max((*a - *b).norm());
                    }
                }
                d
            }
        }
    }

    /// Largest t >= 0 with `x + t d` still in the closed domain (x interior).
    pub fn ray_exit(&self, x: Point2, d: Point2) -> f64 {
        match self {
            Domain::Square { center, half_width } => {
                let mut t = f64::INFINITY;
                for (xi, di, c) in [(x.x, d.x, center.x), (x.y, d.y, center.y)] {
                    if di > 0.0 {
                        t = t.min((c + half_width - xi) / di);
                    } else if di < 0.0 {
                        t = t.min((c - half_width - xi) / di);
                    }
                }
                t
            }
            Domain::Disk { center, radius } => {
                let q = x - *center;
                let a = d.norm_sq();
                let b = q.dot(d);
                let c = q.norm_sq() - radius * radius;
                ((b * b - a * c).max(0.0).sqrt() - b) / a
            }
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                let mut t = f64::INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let e = b - a;
                    let nrm = Point2::new(e.y, -e.x);
                    let nd = nrm.dot(d);
                    if nd > 0.0 {
                        t = t.min(nrm.dot(a - x) / nd);
                    }
                }
                t
            }
        }
    }

    /// Boundary node positions with arclength spacing at most `h`.
    /// On polygonal domains the corners are always included and each edge is
    /// split evenly; on disks the circle is split evenly starting at angle 0.
    fn boundary_nodes(&self, h: f64) -> Vec<Point2> {
        let eps = 1e-9;
        match self {
            Domain::Square { center, half_width } => {
                let w = *half_width;
                let corners = [
                    *center + Point2::new(-w, -w),
                    *center + Point2::new(w, -w),
                    *center + Point2::new(w, w),
                    *center + Point2::new(-w, w),
                ];
                edge_chain(&corners, h, eps)
            }
            Domain::Polygon { vertices } => edge_chain(vertices, h, eps),
            Domain::Disk { center, radius } => {
                let n = ((2.0 * std::f64::consts::PI * radius) / h - eps).ceil().max(3.0) as usize;
                (0..n)
                    .map(|k| {
                        let a = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
                        *center + Point2::new(radius * a.cos(), radius * a.sin())
                    })
                    .collect()
            }
        }
    }
}

fn edge_chain(corners: &[Point2], h: f64, eps: f64) -> Vec<Point2> {
    let mut out = Vec::new();
    let n = corners.len();
    for i in 0..n {
        let a = corners[i];
        let b = corners[(i + 1) % n];
        let len = (b - a).norm();
        let m = ((len / h) - eps).ceil().max(1.0) as usize;
        for k in 0..m {
            let t = k as f64 / m as f64;
            out.push(a + (b - a).scale(t));
        }
    }
    out
}

/// A nodal set: interior lattice nodes plus boundary nodes, with id maps.
/// Interior nodes occupy ids `0..interior_count()`, boundary nodes follow.
#[derive(Debug, Clone)]
pub struct NodalSet {
    pub h: f64,
    pub offset: Point2,
    positions: Vec<Point2>,
    n_interior: usize,
    lattice: HashMap<(i64, i64), NodeId>,
    lattice_coords: Vec<Option<(i64, i64)>>,
}

impl NodalSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        self.n_interior
    }

    pub fn boundary_count(&self) -> usize {
        self.positions.len() - self.n_interior
    }

    pub fn is_interior(&self, id: NodeId) -> bool {
        id < self.n_interior
    }

    pub fn position(&self, id: NodeId) -> Point2 {
        self.positions[id]
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn interior_ids(&self) -> std::ops::Range<NodeId> {
        0..self.n_interior
    }

    pub fn boundary_ids(&self) -> std::ops::Range<NodeId> {
        self.n_interior..self.positions.len()
    }

    /// Integer lattice coordinates of a node, when it lies on the lattice.
    /// All interior nodes do; boundary nodes only when they happen to align.
    pub fn lattice_coords(&self, id: NodeId) -> Option<(i64, i64)> {
        self.lattice_coords[id]
    }

    /// Node at the given position, matched through the lattice map or the
    /// boundary list within `1e-9 * h`.
    pub fn node_at(&self, p: Point2) -> Option<NodeId> {
        let sx = (p.x - self.offset.x) / self.h;
        let sy = (p.y - self.offset.y) / self.h;
        let rx = sx.round();
        let ry = sy.round();
        if (sx - rx).abs() <= 1e-9 && (sy - ry).abs() <= 1e-9 {
            if let Some(&id) = self.lattice.get(&(rx as i64, ry as i64)) {
                return Some(id);
            }
        }
        // boundary nodes can sit off-lattice (disk, general polygon)
        let tol = 1e-9 * self.h;
        self.boundary_ids().find(|&id| (self.positions[id] - p).norm() <= tol)
    }

    /// Neighbor node `x_i + k h e` if it is a node.
    pub fn step(&self, id: NodeId, e: (i64, i64), k: i64) -> Option<NodeId> {
        let (zx, zy) = self.lattice_coords[id]?;
        self.lattice.get(&(zx + k * e.0, zy + k * e.1)).copied()
    }
}

/// Builds the nodal set for `domain` with spacing `h` and lattice origin `offset`.
/// Assemble a nodal set from explicit interior and boundary point lists.
///
/// Points that sit on the lattice `offset + h·Z²` are registered for stencil
/// lookups; off-lattice points are kept but unreachable via `step`.
pub fn nodal_set_from_points(
    h: f64,
    offset: Point2,
    interior: Vec<Point2>,
    boundary: Vec<Point2>,
) -> Result<NodalSet> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!("nodal spacing h = {h} must be positive")));
    }
    if interior.is_empty() {
        return Err(Error::EmptyInterior);
    }
    let n_interior = interior.len();
    let mut positions = interior;
    positions.extend(boundary);
    let mut lattice = HashMap::new();
    let mut lattice_coords = Vec::with_capacity(positions.len());
    for (id, p) in positions.iter().enumerate() {
        let sx = (p.x - offset.x) / h;
        let sy = (p.y - offset.y) / h;
        if (sx - sx.round()).abs() <= 1e-9 && (sy - sy.round()).abs() <= 1e-9 {
            let key = (sx.round() as i64, sy.round() as i64);
            lattice.entry(key).or_insert(id);
            lattice_coords.push(Some(key));
        } else {
            lattice_coords.push(None);
        }
    }
    Ok(NodalSet { h, offset, positions, n_interior, lattice, lattice_coords })
}

pub fn generate_nodal_set(domain: &Domain, h: f64, offset: Point2) -> Result<NodalSet> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!("nodal spacing h = {h} must be positive")));
    }
    // bounding range of lattice indices
    let diam = domain.diameter();
    let (cx, cy) = match domain {
        Domain::Square { center, .. } | Domain::Disk { center, .. } => (center.x, center.y),
        Domain::Polygon { vertices } => {
            let n = vertices.len() as f64;
            (
                vertices.iter().map(|p| p.x).sum::<f64>() / n,
                vertices.iter().map(|p| p.y).sum::<f64>() / n,
            )
        }
    };
    let reach = (diam / h).ceil() as i64 + 2;
    let z0x = ((cx - offset.x) / h).round() as i64;
    let z0y = ((cy - offset.y) / h).round() as i64;

    let mut positions = Vec::new();
    let mut lattice = HashMap::new();
    let mut lattice_coords = Vec::new();
    for zx in (z0x - reach)..=(z0x + reach) {
        for zy in (z0y - reach)..=(z0y + reach) {
            let p = Point2::new(offset.x + h * zx as f64, offset.y + h * zy as f64);
            if -domain.signed_distance(p) >= h / 2.0 {
                let id = positions.len();
                positions.push(p);
                lattice.insert((zx, zy), id);
                lattice_coords.push(Some((zx, zy)));
            }
        }
    }
    let n_interior = positions.len();
    if n_interior == 0 {
        return Err(Error::EmptyInterior);
    }

    for p in domain.boundary_nodes(h) {
        let id = positions.len();
        positions.push(p);
        // register aligned boundary nodes in the lattice map too
        let sx = (p.x - offset.x) / h;
        let sy = (p.y - offset.y) / h;
        if (sx - sx.round()).abs() <= 1e-9 && (sy - sy.round()).abs() <= 1e-9 {
            let key = (sx.round() as i64, sy.round() as i64);
            lattice.entry(key).or_insert(id);
            lattice_coords.push(Some(key));
        } else {
            lattice_coords.push(None);
        }
    }

    Ok(NodalSet { h, offset, positions, n_interior, lattice, lattice_coords })
}

/// Largest `(rho1, rho2)` in `(0,1]` with `x_i + rho1 h e` and `x_i - rho2 h e`
/// inside the closed domain.
pub fn boundary_clip(
    nodes: &NodalSet,
    domain: &Domain,
    node: NodeId,
    e: (i64, i64),
) -> (f64, f64) {
    debug_assert!(nodes.is_interior(node));
    let x = nodes.position(node);
    let d = Point2::new(nodes.h * e.0 as f64, nodes.h * e.1 as f64);
    let r1 = domain.ray_exit(x, d).min(1.0);
    let r2 = domain.ray_exit(x, -d).min(1.0);
    (r1.max(0.0), r2.max(0.0))
}

/// Real values attached to every node of a nodal set.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalFunction {
    pub values: Vec<f64>,
}

impl NodalFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("nodal value {bad}")));
        }
        Ok(NodalFunction { values })
    }

    pub fn from_fn(nodes: &NodalSet, f: impl Fn(Point2) -> f64) -> Result<Self> {
        let values: Vec<f64> = nodes.positions().iter().map(|&p| f(p)).collect();
        Self::new(values)
    }

    pub fn zeros(nodes: &NodalSet) -> Self {
        NodalFunction { values: vec![0.0; nodes.len()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Index<NodeId> for NodalFunction {
    type Output = f64;
    fn index(&self, id: NodeId) -> &f64 {
        &self.values[id]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square2() -> Domain {
        Domain::unit_square2()
    }

    #[test]
    fn square_h1_lattice_trace() {
        let nodes = generate_nodal_set(&square2(), 1.0, Point2::new(0.0, 0.0)).unwrap();
        assert_eq!(nodes.interior_count(), 1);
        assert_eq!(nodes.boundary_count(), 8);
        assert_eq!(nodes.position(0), Point2::new(0.0, 0.0));
    }

    #[test]
    fn square_h_half_counts() {
        let nodes = generate_nodal_set(&square2(), 0.5, Point2::new(0.0, 0.0)).unwrap();
        assert_eq!(nodes.interior_count(), 9);
        assert_eq!(nodes.boundary_count(), 16);
    }

    #[test]
    fn disk_interior_matches_brute_force_scan() {
        let domain = Domain::disk(Point2::new(0.0, 0.0), 1.0);
        let h = 0.5;
        let nodes = generate_nodal_set(&domain, h, Point2::new(0.0, 0.0)).unwrap();
        // brute-force lattice scan with the dist >= h/2 filter
        let mut count = 0;
        for zx in -10i64..=10 {
            for zy in -10i64..=10 {
                let p = Point2::new(h * zx as f64, h * zy as f64);
                if 1.0 - p.norm() >= h / 2.0 {
                    count += 1;
                }
            }
        }
        assert_eq!(nodes.interior_count(), count);
    }

    #[test]
    fn interior_distance_invariant() {
        for domain in [square2(), Domain::disk(Point2::new(0.2, -0.1), 0.9)] {
            let nodes = generate_nodal_set(&domain, 0.25, Point2::new(0.1, 0.0)).unwrap();
            for id in nodes.interior_ids() {
                assert!(-domain.signed_distance(nodes.position(id)) >= nodes.h / 2.0);
            }
        }
    }

    #[test]
    fn boundary_nodes_on_boundary_and_dense() {
        let domain = Domain::disk(Point2::new(0.0, 0.0), 1.0);
        let h = 0.3;
        let nodes = generate_nodal_set(&domain, h, Point2::new(0.0, 0.0)).unwrap();
        for id in nodes.boundary_ids() {
            assert!(domain.signed_distance(nodes.position(id)).abs() <= 1e-12 * h);
        }
        // sampled boundary points are within h of some boundary node
        for k in 0..1000 {
            let a = 2.0 * std::f64::consts::PI * (k as f64) / 1000.0;
            let p = Point2::new(a.cos(), a.sin());
            let d = nodes
                .boundary_ids()
                .map(|id| (nodes.position(id) - p).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(d <= h + 1e-12);
        }
    }

    #[test]
    fn clip_examples() {
        let nodes = generate_nodal_set(&square2(), 0.5, Point2::new(0.0, 0.0)).unwrap();
        let center = nodes.node_at(Point2::new(0.0, 0.0)).unwrap();
        assert_eq!(boundary_clip(&nodes, &square2(), center, (1, 0)), (1.0, 1.0));
        // node at (0.75, 0): off the default lattice, so use a shifted set
        let shifted = generate_nodal_set(&square2(), 0.5, Point2::new(0.25, 0.0)).unwrap();
        let node = shifted.node_at(Point2::new(0.75, 0.0)).unwrap();
        let (r1, r2) = boundary_clip(&shifted, &square2(), node, (1, 0));
        assert!((r1 - 0.5).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);

        let disk = Domain::disk(Point2::new(0.0, 0.0), 1.0);
        let dn = generate_nodal_set(&disk, 0.5, Point2::new(0.0, 0.0)).unwrap();
        let n = dn.node_at(Point2::new(0.5, 0.0)).unwrap();
        let (r1, r2) = boundary_clip(&dn, &disk, n, (1, 0));
        assert!((r1 - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clip_is_unit_when_inside() {
        let domain = Domain::disk(Point2::new(0.0, 0.0), 1.0);
        let nodes = generate_nodal_set(&domain, 0.2, Point2::new(0.07, -0.03)).unwrap();
        for id in nodes.interior_ids() {
            for e in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                let x = nodes.position(id);
                let d = Point2::new(nodes.h * e.0 as f64, nodes.h * e.1 as f64);
                let (r1, r2) = boundary_clip(&nodes, &domain, id, e);
                if domain.signed_distance(x + d) <= 0.0 {
                    assert_eq!(r1, 1.0);
                }
                if domain.signed_distance(x - d) <= 0.0 {
                    assert_eq!(r2, 1.0);
                }
            }
        }
    }

    #[test]
    fn h_too_large_is_an_error() {
        assert!(matches!(
            generate_nodal_set(&square2(), 10.0, Point2::new(0.3, 0.3)),
            Err(Error::EmptyInterior)
        ));
    }
}
