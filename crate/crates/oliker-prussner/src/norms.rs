//! Discrete error functionals: second differences with boundary correction,
//! weighted and nine-point W^2_p norms, nodal max norm, H^1 error on the
//! induced mesh, and convergence rates.

use crate::assembly::QUAD_DEG5;
use crate::domain_nodes::{boundary_clip, Domain, NodalFunction, NodalSet, NodeId};
use crate::envelope::LowerEnvelope;
use crate::error::{Error, Result};
use crate::geom::{orient2d, Point2};

/// Default nine-point stencil directions.
pub const STENCIL: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

/// A scalar field that can be sampled at arbitrary domain points; used for
/// nodal functions through their envelope and for exact solutions directly.
pub type Field<'a> = &'a dyn Fn(Point2) -> Result<f64>;

/// Second-order difference of `v` at interior node `i` in direction `e`.
///
/// With both stencil points inside the domain this is the symmetric
/// `(v(x+he) - 2 v(x) + v(x-he)) / (|e|^2 h^2)`; when a stencil arm leaves the
/// domain it is shortened to fractions `(rho1, rho2)` of the step and the
/// difference quotient reweighted so that quadratics stay exact.
pub fn delta_e(
    v: Field,
    nodes: &NodalSet,
    domain: &Domain,
    i: NodeId,
    e: (i64, i64),
) -> Result<f64> {
    if !nodes.is_interior(i) {
        return Err(Error::BoundaryNode(i));
    }
    if e == (0, 0) {
        return Err(Error::InvalidConfig("zero stencil direction".into()));
    }
    let (r1, r2) = boundary_clip(nodes, domain, i, e);
    let x = nodes.position(i);
    let d = Point2::new(nodes.h * e.0 as f64, nodes.h * e.1 as f64);
    let e2 = (e.0 * e.0 + e.1 * e.1) as f64;
    let vp = v(x + d.scale(r1))?;
    let v0 = v(x)?;
    let vm = v(x - d.scale(r2))?;
    let num = r2 * vp - (r1 + r2) * v0 + r1 * vm;
    let den = r1 * r2 * (r1 + r2) * e2 * nodes.h * nodes.h / 2.0;
    Ok(num / den)
}

/// Weighted `W^2_p` functional in one direction:
/// `(sum_i f_i |delta_e v(x_i)|^p)^(1/p)` over the interior nodes.
pub fn w2p_weighted(
    v: Field,
    nodes: &NodalSet,
    domain: &Domain,
    loads: &[f64],
    e: (i64, i64),
    p: f64,
) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::InvalidConfig(format!("p = {p} must be at least 1")));
    }
    let mut s = 0.0;
    for i in nodes.interior_ids() {
        s += loads[i] * delta_e(v, nodes, domain, i, e)?.abs().powf(p);
    }
    Ok(s.powf(1.0 / p))
}

/// Nine-point `W^2_p` seminorm over the four stencil directions:
/// `(sum_e sum_i h^2 |(v(x_i+he) - 2 v(x_i) + v(x_i-he)) / h^2|^p)^(1/p)`.
/// The per-node factor `h^2` is the quadrature weight of the nodal cell, and
/// the second differences are taken per lattice step `h` (not per unit of
/// arc length, so diagonal directions are not divided by `|e|^2`); this is
/// the convention the reference error tables follow.
pub fn w2p_ninepoint(v: Field, nodes: &NodalSet, domain: &Domain, p: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::InvalidConfig(format!("p = {p} must be at least 1")));
    }
    let w = nodes.h * nodes.h;
    let mut s = 0.0;
    for e in STENCIL {
        let e2 = (e.0 * e.0 + e.1 * e.1) as f64;
        for i in nodes.interior_ids() {
            s += w * (e2 * delta_e(v, nodes, domain, i, e)?).abs().powf(p);
        }
    }
    Ok(s.powf(1.0 / p))
}

/// Max-norm of `a - b` over all nodes.
pub fn linf_error(a: &NodalFunction, b: &NodalFunction) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::MismatchedNodes(a.len(), b.len()));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// H^1 error between the exact field and the nodal solution on the induced
/// mesh of its envelope, with per-facet degree-5 quadrature.  `seminorm`
/// drops the L^2 part.
pub fn h1_error(
    env: &LowerEnvelope,
    u: &dyn Fn(Point2) -> f64,
    grad_u: &dyn Fn(Point2) -> Point2,
    seminorm: bool,
) -> f64 {
    let mut s = 0.0;
    for f in env.live_facets() {
        let p: Vec<Point2> = f.vertices.iter().map(|&v| env.position(v)).collect();
        let area = 0.5 * orient2d(p[0], p[1], p[2]).abs();
        for (q, w) in QUAD_DEG5 {
            let x = p[0].scale(q[0]) + p[1].scale(q[1]) + p[2].scale(q[2]);
            let uh = f.gradient.dot(x) + f.intercept;
            let ge = grad_u(x) - f.gradient;
            let mut val = ge.norm_sq();
            if !seminorm {
                let de = u(x) - uh;
                val += de * de;
            }
            s += w * area * val;
        }
    }
    s.sqrt()
}

/// H^1 distance between the nodal solution and a second nodal function
/// (typically the interpolant of the exact solution), both taken as
/// piecewise linears on the induced mesh of the solution envelope.  The
/// per-facet integrand is quadratic, so the rule is exact.
pub fn h1_error_discrete(env: &LowerEnvelope, other: &[f64], seminorm: bool) -> Result<f64> {
    if other.len() != env.len() {
        return Err(Error::MismatchedNodes(other.len(), env.len()));
    }
    let mut s = 0.0;
    for f in env.live_facets() {
        let p: [Point2; 3] = [
            env.position(f.vertices[0]),
            env.position(f.vertices[1]),
            env.position(f.vertices[2]),
        ];
        let area = 0.5 * orient2d(p[0], p[1], p[2]).abs();
        // nodal differences at the three corners define the linear error
        let d: [f64; 3] = [
            env.value(f.vertices[0]) - other[f.vertices[0]],
            env.value(f.vertices[1]) - other[f.vertices[1]],
            env.value(f.vertices[2]) - other[f.vertices[2]],
        ];
        // gradient of the linear function with corner values d on p
        let det = orient2d(p[0], p[1], p[2]);
        let ge = Point2::new(
            (d[0] * (p[1].y - p[2].y) + d[1] * (p[2].y - p[0].y) + d[2] * (p[0].y - p[1].y)) / det,
            (d[0] * (p[2].x - p[1].x) + d[1] * (p[0].x - p[2].x) + d[2] * (p[1].x - p[0].x)) / det,
        );
        for (q, w) in QUAD_DEG5 {
            let mut val = ge.norm_sq();
            if !seminorm {
                let de = q[0] * d[0] + q[1] * d[1] + q[2] * d[2];
                val += de * de;
            }
            s += w * area * val;
        }
    }
    Ok(s.sqrt())
}

/// `rate_k = log2(err_k / err_{k+1})` for a sequence on halving meshes;
/// `None` where a ratio is degenerate.
pub fn rates(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| {
            if w[0] > 0.0 && w[1] > 0.0 && w[0].is_finite() && w[1].is_finite() {
                Some((w[0] / w[1]).log2())
            } else {
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_nodes::generate_nodal_set;

    fn field(f: impl Fn(Point2) -> f64 + 'static) -> Box<dyn Fn(Point2) -> Result<f64>> {
        Box::new(move |p| Ok(f(p)))
    }

    #[test]
    fn delta_e_trivials() {
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.5, Point2::new(0.0, 0.0)).unwrap();
        let vx2 = field(|p| p.x * p.x);
        let vr2 = field(|p| p.norm_sq());
        for i in nodes.interior_ids() {
            assert!((delta_e(&*vx2, &nodes, &domain, i, (1, 0)).unwrap() - 2.0).abs() < 1e-10);
            assert!((delta_e(&*vr2, &nodes, &domain, i, (1, 1)).unwrap() - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn delta_e_exact_on_quadratics_with_clipping() {
        // offset lattice so near-boundary stencils get clipped
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.5, Point2::new(0.2, 0.13)).unwrap();
        let quads: [(f64, f64, f64, f64, f64); 3] = [
            (1.0, 0.0, 1.0, 0.3, -0.2),
            (2.0, 0.5, 1.0, 0.0, 0.0),
            (0.7, -0.4, 1.3, -1.0, 2.0),
        ];
        for (a, b, c, d, e0) in quads {
            let q = field(move |p| {
                0.5 * (a * p.x * p.x + 2.0 * b * p.x * p.y + c * p.y * p.y) + d * p.x + e0 * p.y
            });
            for i in nodes.interior_ids() {
                for e in STENCIL {
                    let (ex, ey) = (e.0 as f64, e.1 as f64);
                    let exact = (a * ex * ex + 2.0 * b * ex * ey + c * ey * ey) / (ex * ex + ey * ey);
                    let got = delta_e(&*q, &nodes, &domain, i, e).unwrap();
                    assert!((got - exact).abs() < 1e-9, "node {i}, e {e:?}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn weighted_fixture_value() {
        // 9 interior nodes at h = 1/2 with synthetic loads f_i = h^2 = 1/4:
        // v = x^2 has delta_(1,0) = 2 everywhere, so the p = 1 value is
        // 2 * 9 * 1/4 = 4.5
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.5, Point2::new(0.0, 0.0)).unwrap();
        assert_eq!(nodes.interior_count(), 9);
        let loads = vec![0.25; nodes.len()];
        let v = field(|p| p.x * p.x);
        let got = w2p_weighted(&*v, &nodes, &domain, &loads, (1, 0), 1.0).unwrap();
        assert!((got - 4.5).abs() < 1e-10);
    }

    #[test]
    fn ninepoint_fixture_value() {
        // v = x^2 on the 9-node fixture: per-lattice-step second differences
        // are 2, 0, 2, 2 at each of the 9 interior nodes, and each node
        // carries quadrature weight h^2 = 1/4, so the p = 1 sum is 9 * 6 / 4
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.5, Point2::new(0.0, 0.0)).unwrap();
        let v = field(|p| p.x * p.x);
        let got = w2p_ninepoint(&*v, &nodes, &domain, 1.0).unwrap();
        assert!((got - 13.5).abs() < 1e-10);
        let affine = field(|p| 3.0 * p.x - p.y + 7.0);
        assert!(w2p_ninepoint(&*affine, &nodes, &domain, 2.0).unwrap() < 1e-10);
    }

    #[test]
    fn norm_axioms_on_samples() {
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.5, Point2::new(0.1, -0.07)).unwrap();
        let u = field(|p| (0.5 * p.norm_sq()).exp());
        let v = field(|p| p.x * p.x * p.y + 0.3 * p.y * p.y);
        let sum = field(|p| (0.5 * p.norm_sq()).exp() + (p.x * p.x * p.y + 0.3 * p.y * p.y));
        let scaled = field(|p| -2.5 * (0.5 * p.norm_sq()).exp());
        for p in [1.0, 2.0] {
            let nu = w2p_ninepoint(&*u, &nodes, &domain, p).unwrap();
            let nv = w2p_ninepoint(&*v, &nodes, &domain, p).unwrap();
            let ns = w2p_ninepoint(&*sum, &nodes, &domain, p).unwrap();
            let nsc = w2p_ninepoint(&*scaled, &nodes, &domain, p).unwrap();
            assert!(ns <= nu + nv + 1e-10, "triangle inequality, p = {p}");
            assert!((nsc - 2.5 * nu).abs() < 1e-9, "homogeneity, p = {p}");
        }
    }

    #[test]
    fn linf_trivials() {
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.5, Point2::new(0.0, 0.0)).unwrap();
        let a = NodalFunction::from_fn(&nodes, |p| p.x).unwrap();
        let b = NodalFunction::new(a.values.iter().map(|v| v + 0.75).collect()).unwrap();
        assert_eq!(linf_error(&a, &a).unwrap(), 0.0);
        assert!((linf_error(&a, &b).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn h1_error_of_affine_interpolant_is_zero() {
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.5, Point2::new(0.0, 0.0)).unwrap();
        let u = |p: Point2| 2.0 * p.x - 0.5 * p.y + 1.0;
        let vals: Vec<f64> = nodes.positions().iter().map(|&p| u(p)).collect();
        let env = LowerEnvelope::new(nodes.positions().to_vec(), vals).unwrap();
        let e = h1_error(&env, &u, &|_| Point2::new(2.0, -0.5), false);
        assert!(e < 1e-10, "affine H1 error {e}");
    }

    #[test]
    fn h1_interpolation_error_shrinks_with_h() {
        let domain = Domain::unit_square2();
        let u = |p: Point2| p.x * p.x;
        let gu = |p: Point2| Point2::new(2.0 * p.x, 0.0);
        let err = |h: f64| {
            let nodes = generate_nodal_set(&domain, h, Point2::new(0.0, 0.0)).unwrap();
            let vals: Vec<f64> = nodes.positions().iter().map(|&p| u(p)).collect();
            let env = LowerEnvelope::new(nodes.positions().to_vec(), vals).unwrap();
            h1_error(&env, &u, &gu, false)
        };
        let ratio = err(0.5) / err(0.25);
        assert!(ratio > 1.7 && ratio < 2.3, "H1 halving ratio {ratio}");
    }

    #[test]
    fn rate_trivials() {
        let r = rates(&[4.0, 1.0]);
        assert!((r[0].unwrap() - 2.0).abs() < 1e-15);
        let r = rates(&[1.0, 1.0]);
        assert!(r[0].unwrap().abs() < 1e-15);
        assert_eq!(rates(&[1.0, 0.0])[0], None);
    }
}
