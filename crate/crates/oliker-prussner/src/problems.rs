//! Built-in test problems: three classical convergence examples on the
//! square (-1,1)^2 plus an exactly representable quadratic family.

use crate::domain_nodes::Domain;
use crate::error::{Error, Result};
use crate::geom::Point2;

type Scalar = Box<dyn Fn(Point2) -> f64 + Send + Sync>;
type Vector = Box<dyn Fn(Point2) -> Point2 + Send + Sync>;
type TriFlag = Box<dyn Fn(Point2, Point2, Point2) -> bool + Send + Sync>;

pub struct Problem {
    pub label: &'static str,
    pub domain: Domain,
    /// Monge-Ampere density, strictly positive on the closed domain.
    pub f: Scalar,
    /// Boundary data.
    pub g: Scalar,
    pub exact: Option<Scalar>,
    pub exact_grad: Option<Vector>,
    /// Flags triangles crossing a curve where `f` or `D^2 u` is singular;
    /// quadrature is refined there.
    pub singular: Option<TriFlag>,
    pub refine_depth: usize,
}

/// Smooth radial solution: u = e^{|x|^2/2}, f = (1 + |x|^2) e^{|x|^2}.
pub fn example1() -> Problem {
    let u = |p: Point2| (0.5 * p.norm_sq()).exp();
    Problem {
        label: "example1",
        domain: Domain::unit_square2(),
        f: Box::new(|p| (1.0 + p.norm_sq()) * p.norm_sq().exp()),
        g: Box::new(u),
        exact: Some(Box::new(u)),
        exact_grad: Some(Box::new(move |p| p.scale(u(p)))),
        singular: None,
        refine_depth: 0,
    }
}

/// Piecewise smooth radial solution with a C^1 break across |x| = 1/2:
/// u = 2|x|^2 inside, 2(|x| - 1/2)^2 + 2|x|^2 outside;
/// f = 16 inside, 64 - 16/|x| outside.
pub fn example2() -> Problem {
    let u = |p: Point2| {
        let r = p.norm();
        if r <= 0.5 {
            2.0 * r * r
        } else {
            2.0 * (r - 0.5) * (r - 0.5) + 2.0 * r * r
        }
    };
    let grad = |p: Point2| {
        let r = p.norm();
        if r <= 0.5 {
            p.scale(4.0)
        } else {
            // radial derivative of 4r^2 - 2r + 1/2 is 8r - 2
            p.scale(8.0 - 2.0 / r)
        }
    };
    Problem {
        label: "example2",
        domain: Domain::unit_square2(),
        f: Box::new(|p| {
            let r = p.norm();
            if r <= 0.5 {
                16.0
            } else {
                64.0 - 16.0 / r
            }
        }),
        g: Box::new(u),
        exact: Some(Box::new(u)),
        exact_grad: Some(Box::new(grad)),
        singular: Some(Box::new(|a, b, c| {
            let s = [a.norm() - 0.5, b.norm() - 0.5, c.norm() - 0.5];
            s.iter().any(|v| *v <= 0.0) && s.iter().any(|v| *v >= 0.0)
        })),
        refine_depth: 3,
    }
}

/// Solution with unbounded Hessian across y = 0 and |y| = |x|^3:
/// u = x^4 + (3/2) y^2 / x^2 where |y| <= |x|^3,
/// u = (1/2) x^2 y^{2/3} + 2 y^{4/3} where |y| >= |x|^3.
pub fn example3() -> Problem {
    let u = |p: Point2| {
        let (x, y) = (p.x, p.y);
        if x == 0.0 && y == 0.0 {
            return 0.0;
        }
        if y.abs() <= x.abs().powi(3) {
            x.powi(4) + 1.5 * (y / x) * (y / x)
        } else {
            let y13 = y.abs().cbrt();
            0.5 * x * x * y13 * y13 + 2.0 * y13.powi(4)
        }
    };
    let grad = |p: Point2| {
        let (x, y) = (p.x, p.y);
        if x == 0.0 && y == 0.0 {
            return Point2::new(0.0, 0.0);
        }
        if y.abs() <= x.abs().powi(3) {
            Point2::new(4.0 * x.powi(3) - 3.0 * y * y / x.powi(3), 3.0 * y / (x * x))
        } else {
            let y13 = y.cbrt(); // odd root keeps the right sign for y < 0
            Point2::new(
                x * y13 * y13,
                x * x / (3.0 * y13) + 8.0 / 3.0 * y13,
            )
        }
    };
    Problem {
        label: "example3",
        domain: Domain::unit_square2(),
        f: Box::new(|p| {
            let (x, y) = (p.x, p.y);
            if x == 0.0 && y == 0.0 {
                return 36.0; // one-sided value along y = 0
            }
            if y.abs() <= x.abs().powi(3) {
                let t = y / (x * x * x); // |t| <= 1 on this branch
                36.0 - 9.0 * t * t
            } else {
                let y13 = y.abs().cbrt();
                8.0 / 9.0 - 5.0 / 9.0 * x * x / (y13 * y13)
            }
        }),
        g: Box::new(u),
        exact: Some(Box::new(u)),
        exact_grad: Some(Box::new(grad)),
        singular: Some(Box::new(|a, b, c| {
            let sy = [a.y, b.y, c.y];
            let crosses_y0 = sy.iter().any(|v| *v <= 0.0) && sy.iter().any(|v| *v >= 0.0);
            let sc = [
                a.y.abs() - a.x.abs().powi(3),
                b.y.abs() - b.x.abs().powi(3),
                c.y.abs() - c.x.abs().powi(3),
            ];
            let crosses_cubic = sc.iter().any(|v| *v <= 0.0) && sc.iter().any(|v| *v >= 0.0);
            crosses_y0 || crosses_cubic
        })),
        refine_depth: 3,
    }
}

/// u = x^T A x / 2 with constant density det A, for symmetric positive
/// definite A = [[a11, a12], [a12, a22]].
pub fn quadratic(a11: f64, a12: f64, a22: f64) -> Result<Problem> {
    let det = a11 * a22 - a12 * a12;
    if !(a11 > 0.0 && det > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "matrix [[{a11}, {a12}], [{a12}, {a22}]] is not positive definite"
        )));
    }
    let u = move |p: Point2| 0.5 * (a11 * p.x * p.x + 2.0 * a12 * p.x * p.y + a22 * p.y * p.y);
    Ok(Problem {
        label: "quadratic",
        domain: Domain::unit_square2(),
        f: Box::new(move |_| det),
        g: Box::new(u),
        exact: Some(Box::new(u)),
        exact_grad: Some(Box::new(move |p| {
            Point2::new(a11 * p.x + a12 * p.y, a12 * p.x + a22 * p.y)
        })),
        singular: None,
        refine_depth: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_hessian_det(u: &Scalar, p: Point2, h: f64) -> f64 {
        let f = |dx: f64, dy: f64| u(Point2::new(p.x + dx, p.y + dy));
        let uxx = (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h);
        let uyy = (f(0.0, h) - 2.0 * f(0.0, 0.0) + f(0.0, -h)) / (h * h);
        let uxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        uxx * uyy - uxy * uxy
    }

    #[test]
    fn example1_values() {
        let p = example1();
        assert!(((p.f)(Point2::new(0.0, 0.0)) - 1.0).abs() < 1e-15);
        let u = p.exact.as_ref().unwrap();
        assert!((u(Point2::new(0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((u(Point2::new(1.0, 1.0)) - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn example2_values_and_c1_match() {
        let p = example2();
        assert!(((p.f)(Point2::new(0.1, 0.1)) - 16.0).abs() < 1e-12);
        assert!(((p.f)(Point2::new(1.0, 0.0)) - 48.0).abs() < 1e-12);
        let u = p.exact.as_ref().unwrap();
        let gu = p.exact_grad.as_ref().unwrap();
        for k in 0..64 {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let dir = Point2::new(a.cos(), a.sin());
            let inner = dir.scale(0.5 - 1e-12);
            let outer = dir.scale(0.5 + 1e-12);
            assert!((u(inner) - u(outer)).abs() < 1e-10);
            assert!((gu(inner) - gu(outer)).norm() < 1e-9);
        }
    }

    #[test]
    fn example3_values_and_branch_agreement() {
        let p = example3();
        let u = p.exact.as_ref().unwrap();
        assert!((u(Point2::new(0.0, 1.0)) - 2.0).abs() < 1e-15);
        assert!(((p.f)(Point2::new(1.0, 0.5)) - 33.75).abs() < 1e-12);
        for k in 1..50 {
            let x = k as f64 / 50.0;
            let y = x.powi(3);
            // both branch formulas at the interface
            let b1 = x.powi(4) + 1.5 * (y / x) * (y / x);
            let y13 = y.cbrt();
            let b2 = 0.5 * x * x * y13 * y13 + 2.0 * y13.powi(4);
            assert!((b1 - b2).abs() < 1e-10, "branch mismatch at x = {x}");
        }
    }

    #[test]
    fn quadratic_determinants() {
        assert!(((quadratic(1.0, 0.0, 1.0).unwrap().f)(Point2::new(0.3, 0.7)) - 1.0).abs() < 1e-15);
        assert!(((quadratic(2.0, 0.0, 3.0).unwrap().f)(Point2::new(0.0, 0.0)) - 6.0).abs() < 1e-15);
        assert!(((quadratic(2.0, 1.0, 2.0).unwrap().f)(Point2::new(0.0, 0.0)) - 3.0).abs() < 1e-15);
        assert!(quadratic(1.0, 2.0, 1.0).is_err());
        assert!(quadratic(-1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn determinant_of_fd_hessian_matches_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for prob in [example1(), example2(), example3()] {
            let u = prob.exact.as_ref().unwrap();
            let mut tested = 0;
            while tested < 100 {
                let p = Point2::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
                // keep away from the singular curves where the Hessian jumps
                let near_sing = match prob.label {
                    "example2" => (p.norm() - 0.5).abs() < 0.05,
                    "example3" => {
                        p.y.abs() < 0.15 || (p.y.abs() - p.x.abs().powi(3)).abs() < 0.1
                    }
                    _ => false,
                };
                if near_sing {
                    continue;
                }
                let det = fd_hessian_det(u, p, 1e-4);
                let fv = (prob.f)(p);
                assert!(
                    (det - fv).abs() <= 1e-5 * (1.0 + fv.abs()),
                    "{}: det {det} vs f {fv} at {p:?}",
                    prob.label
                );
                tested += 1;
            }
        }
    }

    #[test]
    fn densities_are_positive_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for prob in [example1(), example2(), example3()] {
            for _ in 0..2000 {
                let p = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let fv = (prob.f)(p);
                assert!(fv > 0.0, "{}: f({p:?}) = {fv}", prob.label);
            }
        }
    }

    #[test]
    fn exact_solutions_are_convex_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let step = 1e-3;
        for prob in [example1(), example2(), example3()] {
            let u = prob.exact.as_ref().unwrap();
            for _ in 0..500 {
                let p = Point2::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
                for e in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)] {
                    let d = Point2::new(e.0 * step, e.1 * step);
                    let dd = u(p + d) - 2.0 * u(p) + u(p - d);
                    assert!(dd >= -1e-8, "{}: non-convex at {p:?}", prob.label);
                }
            }
        }
    }
}
