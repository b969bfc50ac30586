//! Small 2D geometry kit: points, convex polygons, convex hulls,
//! half-plane intersection and Minkowski sums.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Twice the signed area of triangle (a, b, c); positive for CCW.
#[inline]
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Shoelace area of a polygon given by its vertex cycle.
/// Degenerate inputs (fewer than 3 vertices, collinear) give 0.
pub fn polygon_area(poly: &[Point2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        twice += a.cross(b);
    }
    (twice / 2.0).max(0.0)
}

/// Convex hull (CCW, no duplicate endpoints) by monotone chain.
/// Collinear points on the hull boundary are dropped.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| (a.x - b.x).abs() == 0.0 && (a.y - b.y).abs() == 0.0);
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * n);
    for &p in pts.iter() {
        while hull.len() >= 2 && orient2d(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len
            && orient2d(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// A closed half-plane { p : n . p <= c }.
#[derive(Debug, Clone, Copy)]
pub struct HalfPlane {
    pub n: Point2,
    pub c: f64,
}

impl HalfPlane {
    pub fn new(n: Point2, c: f64) -> Self {
        HalfPlane { n, c }
    }

    fn angle(&self) -> f64 {
        // boundary direction, CCW along the region to the left
        self.n.y.atan2(self.n.x)
    }

    fn contains(&self, p: Point2, tol: f64) -> bool {
        self.n.dot(p) <= self.c + tol
    }
}

fn intersect_lines(a: &HalfPlane, b: &HalfPlane) -> Option<Point2> {
    let det = a.n.cross(b.n);
    if det == 0.0 {
        return None;
    }
    let x = (a.c * b.n.y - b.c * a.n.y) / det;
    let y = (a.n.x * b.c - b.n.x * a.c) / det;
    Some(Point2::new(x, y))
}

/// Intersection of half-planes, returned as a CCW convex polygon.
///
/// The computation is clipped to a large bounding box derived from the
/// input scale; if any box constraint survives in the result the true
/// intersection is unbounded and an error is returned. An empty or
/// lower-dimensional intersection yields a polygon with < 3 vertices.
pub fn halfplane_intersection(planes: &[HalfPlane]) -> Result<Vec<Point2>> {
    // scale for the clip box: generous radius from normalized offsets
    let mut radius: f64 = 1.0;
    let mut work: Vec<(HalfPlane, bool)> = Vec::with_capacity(planes.len() + 4);
    for hp in planes {
        let len = hp.n.norm();
        if !(len > 0.0) || !hp.c.is_finite() {
            return Err(Error::Geometry("half-plane with zero or non-finite normal".into()));
        }
        let normalized = HalfPlane::new(hp.n.scale(1.0 / len), hp.c / len);
        radius = radius.max(normalized.c.abs());
        work.push((normalized, false));
    }
    let big = 1e6 * radius.max(1.0);
    for n in [
        Point2::new(1.0, 0.0),
        Point2::new(0.0, 1.0),
        Point2::new(-1.0, 0.0),
        Point2::new(0.0, -1.0),
    ] {
        work.push((HalfPlane::new(n, big), true));
    }

    // sort by boundary angle; among parallel constraints keep the tightest
    work.sort_by(|a, b| {
        a.0.angle()
            .partial_cmp(&b.0.angle())
            .unwrap()
            .then(a.0.c.partial_cmp(&b.0.c).unwrap())
    });
    let mut planes_sorted: Vec<(HalfPlane, bool)> = Vec::with_capacity(work.len());
    for item in work {
        if let Some(last) = planes_sorted.last() {
            if (item.0.angle() - last.0.angle()).abs() < 1e-14 {
                continue; // same direction, the first one is tighter
            }
        }
        planes_sorted.push(item);
    }

    let tol = 1e-12 * big;
    let mut deque: std::collections::VecDeque<(HalfPlane, bool)> = Default::default();
    for &(hp, is_box) in planes_sorted.iter() {
        while deque.len() >= 2 {
            let a = &deque[deque.len() - 2].0;
            let b = &deque[deque.len() - 1].0;
            match intersect_lines(a, b) {
                Some(p) if !hp.contains(p, tol) => {
                    deque.pop_back();
                }
                _ => break,
            }
        }
        while deque.len() >= 2 {
            let a = &deque[0].0;
            let b = &deque[1].0;
            match intersect_lines(a, b) {
                Some(p) if !hp.contains(p, tol) => {
                    deque.pop_front();
                }
                _ => break,
            }
        }
        deque.push_back((hp, is_box));
    }
    // close the cycle
    loop {
        let mut changed = false;
        if deque.len() >= 3 {
            let a = &deque[deque.len() - 2].0;
            let b = &deque[deque.len() - 1].0;
            if let Some(p) = intersect_lines(a, b) {
                if !deque[0].0.contains(p, tol) {
                    deque.pop_back();
                    changed = true;
                }
            }
        }
        if deque.len() >= 3 {
            let a = &deque[0].0;
            let b = &deque[1].0;
            if let Some(p) = intersect_lines(a, b) {
                if !deque[deque.len() - 1].0.contains(p, tol) {
                    deque.pop_front();
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    if deque.len() < 3 {
        return Ok(Vec::new());
    }
    let m = deque.len();
    let mut poly = Vec::with_capacity(m);
    let mut used_box = false;
    for i in 0..m {
        let (a, abox) = deque[i];
        let (b, _) = deque[(i + 1) % m];
        let p = match intersect_lines(&a, &b) {
            Some(p) => p,
            None => return Ok(Vec::new()),
        };
        used_box |= abox && p.norm() > 0.5 * big;
        poly.push(p);
    }
    // an empty interior shows up as a reversed (negative-area) cycle
    let mut twice = 0.0;
    for i in 0..m {
        twice += poly[i].cross(poly[(i + 1) % m]);
    }
    if twice <= 0.0 {
        return Ok(Vec::new());
    }
    if used_box {
        return Err(Error::UnboundedCell);
    }
    Ok(poly)
}

/// Minkowski sum of two convex polygons (CCW; degenerate inputs allowed).
pub fn minkowski_sum(a: &[Point2], b: &[Point2]) -> Vec<Point2> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut sums = Vec::with_capacity(a.len() * b.len());
    for &p in a {
        for &q in b {
            sums.push(p + q);
        }
    }
    let hull = convex_hull(&sums);
    if hull.is_empty() {
        sums.truncate(1);
        return sums;
    }
    hull
}

/// Linear transform of vertices of the triangle with vertices v: barycentric
/// coordinates of x with respect to (v0, v1, v2). None if the triangle is degenerate.
pub fn barycentric(v: [Point2; 3], x: Point2) -> Option<[f64; 3]> {
    let det = orient2d(v[0], v[1], v[2]);
    if det == 0.0 {
        return None;
    }
    let l0 = orient2d(x, v[1], v[2]) / det;
    let l1 = orient2d(v[0], x, v[2]) / det;
    Some([l0, l1, 1.0 - l0 - l1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(nx: f64, ny: f64, c: f64) -> HalfPlane {
        HalfPlane::new(Point2::new(nx, ny), c)
    }

    #[test]
    fn area_of_unit_square() {
        let sq = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        assert_eq!(polygon_area(&sq), 1.0);
    }

    #[test]
    fn area_of_diamond_and_triangle() {
        let d = [
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(-1.0, 0.0),
            Point2::new(0.0, -1.0),
        ];
        assert_eq!(polygon_area(&d), 2.0);
        let t = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        assert_eq!(polygon_area(&t), 0.5);
    }

    #[test]
    fn halfplanes_unit_square() {
        let planes = [hp(1.0, 0.0, 1.0), hp(-1.0, 0.0, 0.0), hp(0.0, 1.0, 1.0), hp(0.0, -1.0, 0.0)];
        let poly = halfplane_intersection(&planes).unwrap();
        assert_eq!(poly.len(), 4);
        assert!((polygon_area(&poly) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn halfplanes_diamond() {
        let planes = [
            hp(1.0, 1.0, 1.0),
            hp(-1.0, 1.0, 1.0),
            hp(1.0, -1.0, 1.0),
            hp(-1.0, -1.0, 1.0),
        ];
        let poly = halfplane_intersection(&planes).unwrap();
        assert!((polygon_area(&poly) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn halfplanes_empty() {
        let planes = [hp(1.0, 0.0, -1.0), hp(-1.0, 0.0, -1.0)];
        let poly = halfplane_intersection(&planes).unwrap();
        assert!(polygon_area(&poly) == 0.0);
    }

    #[test]
    fn halfplanes_unbounded_slab_errors() {
        let planes = [hp(1.0, 0.0, 1.0), hp(-1.0, 0.0, 1.0)];
        assert!(matches!(halfplane_intersection(&planes), Err(Error::UnboundedCell)));
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.5, 0.25),
        ];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn minkowski_squares() {
        let sq = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let s = minkowski_sum(&sq, &sq);
        assert!((polygon_area(&s) - 4.0).abs() < 1e-12);
    }
}
