//! Structural checks on discrete convex functions: contact sets of the
//! perturbation `u - (1 - eps) v`, the measure and second-difference bounds
//! they satisfy, the discrete comparison principle, subdifferential
//! additivity, Brunn-Minkowski, a layer-cake level-set bound, and the decay
//! of the consistency defect of exact solutions.

use crate::assembly::{assemble_load, BackgroundMesh, Refinement};
use crate::domain_nodes::{generate_nodal_set, NodalSet, NodeId};
use crate::envelope::LowerEnvelope;
use crate::error::{Error, Result};
use crate::geom::{convex_hull, minkowski_sum, polygon_area, Point2};
use crate::norms::STENCIL;
use crate::problems::Problem;
use crate::subdifferential::{cell_oracle, measure_from_star};
use rand::Rng;

/// Spatial dimension, kept symbolic in the exponents below.
const D: f64 = 2.0;

/// Contact-set decomposition for a pair of convex nodal functions `u <= v`
/// and a parameter `eps` in (0, 1].
#[derive(Debug)]
pub struct ContactReport {
    pub eps: f64,
    /// `tau = eps / (1 - eps)` (infinite when `eps = 1`).
    pub tau: f64,
    /// Interior nodes where `u - (1 - eps) v` touches its convex envelope.
    pub lower_contact: Vec<NodeId>,
    /// Interior nodes where `v - (1 - eps) u` touches its convex envelope.
    pub upper_contact: Vec<NodeId>,
    /// Complements within the interior nodes.
    pub lower_noncontact: Vec<NodeId>,
    pub upper_noncontact: Vec<NodeId>,
    /// Subdifferential measures per node (zero at boundary nodes).
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `f_i^{1/d} - g_i^{1/d}` per node.
    pub e_root: Vec<f64>,
    /// Total `u`-measure of the lower non-contact set.
    pub mu_s: f64,
    /// Total `u`-measure of the lower contact set.
    pub mu_c: f64,
    /// `sum_{C} (f_i^{1/d} + |e_i^{1/d}| / tau)^d` over the lower contact set.
    pub nu_c: f64,
}

/// Builds an envelope and refuses values that lie strictly above it anywhere.
fn require_convex(positions: &[Point2], values: &[f64], what: &str) -> Result<LowerEnvelope> {
    let env = LowerEnvelope::new(positions.to_vec(), values.to_vec())?;
    let vmax = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * (1.0 + vmax);
    for (i, &vi) in values.iter().enumerate() {
        let below = env.evaluate(positions[i])?;
        if vi - below > tol {
            return Err(Error::Hypothesis {
                node: i,
                what: format!("{what} is not convex: value exceeds its envelope by {:.3e}", vi - below),
            });
        }
    }
    Ok(env)
}

/// Nodes of the interior where `w` coincides with its own convex envelope.
fn contact_nodes(nodes: &NodalSet, w: &[f64]) -> Result<Vec<NodeId>> {
    let env = LowerEnvelope::new(nodes.positions().to_vec(), w.to_vec())?;
    let wmax = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * (1.0 + wmax);
    let mut out = Vec::new();
    for i in nodes.interior_ids() {
        if w[i] - env.evaluate(nodes.position(i))? <= tol {
            out.push(i);
        }
    }
    Ok(out)
}

fn check_pair_hypotheses(nodes: &NodalSet, u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != nodes.len() || v.len() != nodes.len() {
        return Err(Error::MismatchedNodes(u.len().min(v.len()), nodes.len()));
    }
    let scale = u
        .iter()
        .chain(v.iter())
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    let tol = 1e-10 * (1.0 + scale);
    for i in nodes.boundary_ids() {
        if (u[i] - v[i]).abs() > tol {
            return Err(Error::Hypothesis {
                node: i,
                what: format!("boundary values differ by {:.3e}", u[i] - v[i]),
            });
        }
    }
    for i in nodes.interior_ids() {
        if u[i] > v[i] + tol {
            return Err(Error::Hypothesis {
                node: i,
                what: format!("ordering u <= v fails by {:.3e}", u[i] - v[i]),
            });
        }
    }
    Ok(())
}

/// Computes the contact sets of `u - (1 - eps) v` and `v - (1 - eps) u`
/// over the interior nodes, together with the measure tallies entering the
/// non-contact measure bounds.  Requires `u` and `v` convex, equal on the
/// boundary, and `u <= v` at interior nodes.
pub fn contact_sets(nodes: &NodalSet, u: &[f64], v: &[f64], eps: f64) -> Result<ContactReport> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidConfig(format!("eps = {eps} must lie in (0, 1]")));
    }
    check_pair_hypotheses(nodes, u, v)?;
    let env_u = require_convex(nodes.positions(), u, "u")?;
    let env_v = require_convex(nodes.positions(), v, "v")?;

    let mut f = vec![0.0; nodes.len()];
    let mut g = vec![0.0; nodes.len()];
    let mut e_root = vec![0.0; nodes.len()];
    for i in nodes.interior_ids() {
        f[i] = measure_from_star(&env_u, i)?;
        g[i] = measure_from_star(&env_v, i)?;
        e_root[i] = f[i].powf(1.0 / D) - g[i].powf(1.0 / D);
    }

    let w_lo: Vec<f64> = (0..nodes.len()).map(|i| u[i] - (1.0 - eps) * v[i]).collect();
    let w_hi: Vec<f64> = (0..nodes.len()).map(|i| v[i] - (1.0 - eps) * u[i]).collect();
    let lower_contact = contact_nodes(nodes, &w_lo)?;
    let upper_contact = contact_nodes(nodes, &w_hi)?;
    let complement = |inside: &[NodeId]| -> Vec<NodeId> {
        let mut mark = vec![false; nodes.len()];
        for &i in inside {
            mark[i] = true;
        }
        nodes.interior_ids().filter(|&i| !mark[i]).collect()
    };
    let lower_noncontact = complement(&lower_contact);
    let upper_noncontact = complement(&upper_contact);

    let tau = if eps < 1.0 { eps / (1.0 - eps) } else { f64::INFINITY };
    let mu_s: f64 = lower_noncontact.iter().map(|&i| f[i]).sum();
    let mu_c: f64 = lower_contact.iter().map(|&i| f[i]).sum();
    let nu_c: f64 = lower_contact
        .iter()
        .map(|&i| (f[i].powf(1.0 / D) + e_root[i].abs() / tau).powf(D))
        .sum();

    Ok(ContactReport {
        eps,
        tau,
        lower_contact,
        upper_contact,
        lower_noncontact,
        upper_noncontact,
        f,
        g,
        e_root,
        mu_s,
        mu_c,
        nu_c,
    })
}

/// Result of the non-contact measure bounds derived from a contact report.
pub struct MeasureBounds {
    pub mu_s: f64,
    /// `nu_tau(C_eps) - mu(C_eps)`.
    pub contact_excess: f64,
    /// `tau^{-1} * d * ||f^{1/d}||^{d-1} * ||e^{1/d}||_{l^d(C_eps)}`.
    pub defect_bound: f64,
}

impl MeasureBounds {
    pub fn holds(&self, slack: f64) -> bool {
        self.mu_s <= self.contact_excess + slack && self.mu_s <= self.defect_bound + slack
    }
}

/// Checks that the measure of the lower non-contact set is controlled by the
/// contact-set excess and by the measure defect `e_i^{1/d} = f_i^{1/d} -
/// g_i^{1/d}`.
pub fn check_measure_bound(report: &ContactReport, nodes: &NodalSet) -> MeasureBounds {
    let c_f = D
        * nodes
            .interior_ids()
            .map(|i| report.f[i])
            .sum::<f64>()
            .powf((D - 1.0) / D);
    let e_norm = report
        .lower_contact
        .iter()
        .map(|&i| report.e_root[i].abs().powf(D))
        .sum::<f64>()
        .powf(1.0 / D);
    MeasureBounds {
        mu_s: report.mu_s,
        contact_excess: report.nu_c - report.mu_c,
        defect_bound: if report.tau.is_finite() {
            c_f * e_norm / report.tau
        } else {
            0.0
        },
    }
}

/// One failed second-difference comparison.
#[derive(Debug)]
pub struct SecondDiffViolation {
    pub node: NodeId,
    pub direction: (i64, i64),
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Undivided centered second difference along a full lattice stencil, if the
/// two neighbours exist in the nodal set.
fn lattice_dd(nodes: &NodalSet, w: &[f64], i: NodeId, e: (i64, i64)) -> Option<f64> {
    let p = nodes.step(i, e, 1)?;
    let m = nodes.step(i, e, -1)?;
    Some(w[p] - 2.0 * w[i] + w[m])
}

/// On nodes lying in both contact sets, second differences of `u - v` are
/// pinched between `-eps * dd v` and `eps / (1 - eps) * dd v` for every full
/// lattice stencil direction.  Returns the violations (empty on success).
pub fn check_second_diff_bounds(
    nodes: &NodalSet,
    u: &[f64],
    v: &[f64],
    eps: f64,
) -> Result<Vec<SecondDiffViolation>> {
    let report = contact_sets(nodes, u, v, eps)?;
    let mut in_upper = vec![false; nodes.len()];
    for &i in &report.upper_contact {
        in_upper[i] = true;
    }
    let diff: Vec<f64> = (0..nodes.len()).map(|i| u[i] - v[i]).collect();
    let mut violations = Vec::new();
    for &i in &report.lower_contact {
        if !in_upper[i] {
            continue;
        }
        for e in STENCIL {
            let (Some(ddw), Some(ddv)) = (lattice_dd(nodes, &diff, i, e), lattice_dd(nodes, v, i, e))
            else {
                continue;
            };
            let slack = 1e-9 * (1.0 + ddv.abs() + ddw.abs());
            let lower = -eps * ddv;
            let upper = if eps < 1.0 { eps / (1.0 - eps) * ddv } else { f64::INFINITY };
            if ddw < lower - slack || ddw > upper + slack {
                violations.push(SecondDiffViolation {
                    node: i,
                    direction: e,
                    value: ddw,
                    lower,
                    upper,
                });
            }
        }
    }
    Ok(violations)
}

/// Nodes where a second difference of `v - u` exceeds `tau` times that of `v`
/// must lie outside the lower contact set (and symmetrically for `u`).
/// Returns nodes breaking either inclusion.
pub fn check_tau_exceptional_sets(
    nodes: &NodalSet,
    u: &[f64],
    v: &[f64],
    eps: f64,
) -> Result<Vec<NodeId>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidConfig(format!("eps = {eps} must lie in (0, 1)")));
    }
    let report = contact_sets(nodes, u, v, eps)?;
    let tau = report.tau;
    let mut in_lower = vec![false; nodes.len()];
    let mut in_upper = vec![false; nodes.len()];
    for &i in &report.lower_contact {
        in_lower[i] = true;
    }
    for &i in &report.upper_contact {
        in_upper[i] = true;
    }
    let vu: Vec<f64> = (0..nodes.len()).map(|i| v[i] - u[i]).collect();
    let uv: Vec<f64> = (0..nodes.len()).map(|i| u[i] - v[i]).collect();
    let mut violations = Vec::new();
    for i in nodes.interior_ids() {
        let mut in_e_lower = false;
        let mut in_e_upper = false;
        for e in STENCIL {
            if let (Some(d_vu), Some(d_v)) = (lattice_dd(nodes, &vu, i, e), lattice_dd(nodes, v, i, e)) {
                let margin = 1e-9 * (1.0 + d_v.abs() + d_vu.abs());
                if d_vu >= tau * d_v + margin {
                    in_e_lower = true;
                }
            }
            if let (Some(d_uv), Some(d_u)) = (lattice_dd(nodes, &uv, i, e), lattice_dd(nodes, u, i, e)) {
                let margin = 1e-9 * (1.0 + d_u.abs() + d_uv.abs());
                if d_uv >= tau * d_u + margin {
                    in_e_upper = true;
                }
            }
        }
        if (in_e_lower && in_lower[i]) || (in_e_upper && in_upper[i]) {
            violations.push(i);
        }
    }
    Ok(violations)
}

/// Discrete comparison principle: if `u <= v` at boundary nodes and the
/// subdifferential measure of `u` dominates that of `v` at interior nodes,
/// then `u <= v` everywhere.  Hypothesis failures are errors; returns the
/// interior nodes violating the conclusion (empty on success).
pub fn check_comparison(nodes: &NodalSet, u: &[f64], v: &[f64]) -> Result<Vec<NodeId>> {
    let env_u = require_convex(nodes.positions(), u, "u")?;
    let env_v = require_convex(nodes.positions(), v, "v")?;
    let scale = u.iter().chain(v.iter()).fold(0.0_f64, |m, x| m.max(x.abs()));
    let tol = 1e-10 * (1.0 + scale);
    for i in nodes.boundary_ids() {
        if u[i] > v[i] + tol {
            return Err(Error::Hypothesis {
                node: i,
                what: format!("boundary ordering u <= v fails by {:.3e}", u[i] - v[i]),
            });
        }
    }
    for i in nodes.interior_ids() {
        let mu = measure_from_star(&env_u, i)?;
        let mv = measure_from_star(&env_v, i)?;
        if mu < mv - 1e-10 * (1.0 + mv) {
            return Err(Error::Hypothesis {
                node: i,
                what: format!("measure ordering |du| >= |dv| fails: {mu:.6e} < {mv:.6e}"),
            });
        }
    }
    Ok(nodes
        .interior_ids()
        .filter(|&i| u[i] > v[i] + tol)
        .collect())
}

/// Subdifferential additivity by membership sampling: for random gradients
/// `p` of `u` and `q` of `v` at an interior node, `p + q` must support
/// `u + v` there.  Returns nodes with a failed sample.
pub fn check_subdiff_additivity(
    nodes: &NodalSet,
    u: &[f64],
    v: &[f64],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<Vec<NodeId>> {
    require_convex(nodes.positions(), u, "u")?;
    require_convex(nodes.positions(), v, "v")?;
    let positions = nodes.positions();
    let sum: Vec<f64> = (0..nodes.len()).map(|i| u[i] + v[i]).collect();
    let scale = sum.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * (1.0 + scale);
    let sample_cell = |verts: &[Point2], rng: &mut dyn rand::RngCore| -> Point2 {
        // random convex combination of the cell vertices
        let mut w: Vec<f64> = verts.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = w.iter().sum();
        for wi in &mut w {
            *wi /= total.max(1e-300);
        }
        verts
            .iter()
            .zip(&w)
            .fold(Point2::new(0.0, 0.0), |acc, (p, wi)| acc + p.scale(*wi))
    };
    let mut violations = Vec::new();
    for i in nodes.interior_ids() {
        let cu = cell_oracle(positions, u, i)?;
        let cv = cell_oracle(positions, v, i)?;
        if cu.vertices.is_empty() || cv.vertices.is_empty() {
            continue;
        }
        let xi = positions[i];
        let mut bad = false;
        for _ in 0..samples {
            let p = sample_cell(&cu.vertices, rng);
            let q = sample_cell(&cv.vertices, rng);
            let pq = p + q;
            for j in 0..nodes.len() {
                if j == i {
                    continue;
                }
                if pq.dot(positions[j] - xi) > sum[j] - sum[i] + tol {
                    bad = true;
                    break;
                }
            }
            if bad {
                break;
            }
        }
        if bad {
            violations.push(i);
        }
    }
    Ok(violations)
}

/// At interior nodes where `u - v` touches its convex envelope, the measure
/// of that envelope obeys `m^{1/d} <= |du|^{1/d} - |dv|^{1/d}`.  Returns
/// violating nodes.
pub fn check_convexity_subdifferential(
    nodes: &NodalSet,
    u: &[f64],
    v: &[f64],
) -> Result<Vec<NodeId>> {
    let env_u = require_convex(nodes.positions(), u, "u")?;
    let env_v = require_convex(nodes.positions(), v, "v")?;
    let w: Vec<f64> = (0..nodes.len()).map(|i| u[i] - v[i]).collect();
    let env_w = LowerEnvelope::new(nodes.positions().to_vec(), w.clone())?;
    let wmax = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * (1.0 + wmax);
    let mut violations = Vec::new();
    for i in nodes.interior_ids() {
        if w[i] - env_w.evaluate(nodes.position(i))? > tol {
            continue; // not a contact node
        }
        let mw = measure_from_star(&env_w, i)?;
        let mu = measure_from_star(&env_u, i)?;
        let mv = measure_from_star(&env_v, i)?;
        let lhs = mw.powf(1.0 / D);
        let rhs = mu.powf(1.0 / D) - mv.powf(1.0 / D);
        if lhs > rhs + 1e-9 * (1.0 + mu.powf(1.0 / D)) {
            violations.push(i);
        }
    }
    Ok(violations)
}

/// Brunn-Minkowski on random convex polygon pairs:
/// `|A + B|^{1/d} >= |A|^{1/d} + |B|^{1/d}`.  Returns the number of failures.
pub fn check_brunn_minkowski(pairs: usize, rng: &mut impl Rng) -> usize {
    let random_polygon = |rng: &mut dyn rand::RngCore| -> Vec<Point2> {
        loop {
            let n = rng.gen_range(3..12);
            let pts: Vec<Point2> = (0..n)
                .map(|_| Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let hull = convex_hull(&pts);
            if hull.len() >= 3 && polygon_area(&hull) > 1e-6 {
                return hull;
            }
        }
    };
    let mut failures = 0;
    for _ in 0..pairs {
        let a = random_polygon(rng);
        let b = random_polygon(rng);
        let s = minkowski_sum(&a, &b);
        let lhs = polygon_area(&s).powf(1.0 / D);
        let rhs = polygon_area(&a).powf(1.0 / D) + polygon_area(&b).powf(1.0 / D);
        if lhs < rhs - 1e-9 * (1.0 + rhs) {
            failures += 1;
        }
    }
    failures
}

/// Layer-cake bound: `sum_i f_i |s_i| <= sigma * sum_{k=0..N} mu(A_k)` with
/// `A_k = { i : |s_i| >= k sigma }` and `N = ceil(max |s_i| / sigma)`.
/// Returns `(lhs, rhs)`.
pub fn check_level_set_bound(
    nodes: &NodalSet,
    s: &[f64],
    loads: &[f64],
    sigma: f64,
) -> Result<(f64, f64)> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig(format!("sigma = {sigma} must be positive")));
    }
    if s.len() != nodes.len() || loads.len() != nodes.len() {
        return Err(Error::MismatchedNodes(s.len().min(loads.len()), nodes.len()));
    }
    let lhs: f64 = nodes.interior_ids().map(|i| loads[i] * s[i].abs()).sum();
    let smax = nodes.interior_ids().map(|i| s[i].abs()).fold(0.0_f64, f64::max);
    let n = (smax / sigma).ceil() as usize;
    let mut rhs = 0.0;
    for k in 0..=n {
        let level = k as f64 * sigma;
        rhs += nodes
            .interior_ids()
            .filter(|&i| s[i].abs() >= level)
            .map(|i| loads[i])
            .sum::<f64>();
    }
    Ok((lhs, sigma * rhs))
}

/// Consistency defect of an exact solution on one refinement level.
pub struct ConsistencyRow {
    pub h: f64,
    /// Max defect `| |dN_h u(x_i)| - f_i |` over nodes at distance at least
    /// `r_test * h` from the boundary.
    pub interior_defect: f64,
    /// Max defect over the remaining interior nodes (the boundary band).
    pub boundary_defect: f64,
}

/// Interpolates the exact solution on a sequence of mesh sizes and measures
/// how far the subdifferential measures of the interpolant sit from the hat
/// loads, split into a deep-interior part and a near-boundary band.
pub fn consistency_decay(
    problem: &Problem,
    levels: &[f64],
    offset: Point2,
    r_test: f64,
) -> Result<Vec<ConsistencyRow>> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("problem has no exact solution".into()))?;
    let mut rows = Vec::new();
    for &h in levels {
        let nodes = generate_nodal_set(&problem.domain, h, offset)?;
        let mesh = BackgroundMesh::new(&nodes)?;
        let refine = problem.singular.as_ref().map(|flag| Refinement {
            flag: flag.as_ref(),
            depth: problem.refine_depth,
        });
        let loads = assemble_load(&mesh, problem.f.as_ref(), refine.as_ref());
        let values: Vec<f64> = nodes.positions().iter().map(|&p| exact(p)).collect();
        let env = LowerEnvelope::new(nodes.positions().to_vec(), values)?;
        let mut interior = 0.0_f64;
        let mut band = 0.0_f64;
        for i in nodes.interior_ids() {
            let defect = (measure_from_star(&env, i)? - loads[i]).abs();
            let dist = -problem.domain.signed_distance(nodes.position(i));
            if dist >= r_test * h {
                interior = interior.max(defect);
            } else {
                band = band.max(defect);
            }
        }
        rows.push(ConsistencyRow {
            h,
            interior_defect: interior,
            boundary_defect: band,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `log2(y)` against `log2(1/h)` decay order:
/// returns `p` such that `y ~ h^p`.
pub fn regression_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(h, _)| h.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Nodal values of a random convex function: a random positive-definite
/// quadratic plus a max of a few random affine pieces.
pub fn random_convex_values(positions: &[Point2], rng: &mut impl Rng) -> Vec<f64> {
    let a11: f64 = rng.gen_range(0.2..2.0);
    let a22: f64 = rng.gen_range(0.2..2.0);
    let a12: f64 = rng.gen_range(-0.9..0.9) * (a11 * a22).sqrt();
    let n_planes = rng.gen_range(1..6);
    let planes: Vec<(Point2, f64)> = (0..n_planes)
        .map(|_| {
            (
                Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    positions
        .iter()
        .map(|&p| {
            let quad = 0.5 * (a11 * p.x * p.x + 2.0 * a12 * p.x * p.y + a22 * p.y * p.y);
            let aff = planes
                .iter()
                .map(|&(n, c)| n.dot(p) + c)
                .fold(f64::NEG_INFINITY, f64::max);
            quad + aff
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain_nodes::Domain;
    use crate::problems::example1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square_nodes(h: f64) -> NodalSet {
        generate_nodal_set(&Domain::unit_square2(), h, Point2::new(0.0, 0.0)).unwrap()
    }

    /// A convex pair with equal boundary values and u <= v inside: v is a
    /// paraboloid, u sits below it by a multiple of a bump vanishing on the
    /// boundary of the square.
    fn test_pair(nodes: &NodalSet, drop: f64) -> (Vec<f64>, Vec<f64>) {
        let v: Vec<f64> = nodes.positions().iter().map(|p| p.norm_sq()).collect();
        let u: Vec<f64> = nodes
            .positions()
            .iter()
            .map(|p| p.norm_sq() - drop * (1.0 - p.x * p.x) * (1.0 - p.y * p.y))
            .collect();
        (u, v)
    }

    #[test]
    fn contact_covers_everything_at_eps_one() {
        let nodes = square_nodes(0.25);
        let (u, v) = test_pair(&nodes, 0.05);
        let rep = contact_sets(&nodes, &u, &v, 1.0).unwrap();
        assert!(rep.lower_noncontact.is_empty());
        assert_eq!(rep.lower_contact.len(), nodes.interior_count());
        assert!((rep.mu_s).abs() < 1e-15);
    }

    #[test]
    fn identical_functions_are_pure_contact() {
        let nodes = square_nodes(0.25);
        let v: Vec<f64> = nodes.positions().iter().map(|p| p.norm_sq()).collect();
        let rep = contact_sets(&nodes, &v, &v, 0.5).unwrap();
        assert!(rep.lower_noncontact.is_empty());
        assert!(rep.upper_noncontact.is_empty());
        for i in nodes.interior_ids() {
            assert!(rep.e_root[i].abs() < 1e-9);
        }
    }

    #[test]
    fn non_convex_input_is_refused() {
        let nodes = square_nodes(0.5);
        let (u, v) = test_pair(&nodes, 0.05);
        let mut bad = v.clone();
        let mid = nodes.interior_ids().next().unwrap();
        bad[mid] += 1.0;
        let err = contact_sets(&nodes, &u, &bad, 0.5).unwrap_err();
        assert!(matches!(err, Error::Hypothesis { .. }), "{err}");
    }

    #[test]
    fn boundary_mismatch_is_refused() {
        let nodes = square_nodes(0.5);
        let (u, v) = test_pair(&nodes, 0.05);
        let mut bad = v.clone();
        let b = nodes.boundary_ids().next().unwrap();
        bad[b] += 0.5;
        let err = contact_sets(&nodes, &u, &bad, 0.5).unwrap_err();
        match err {
            Error::Hypothesis { node, .. } => assert_eq!(node, b),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn measure_bounds_hold_for_test_pair() {
        let nodes = square_nodes(0.125);
        let (u, v) = test_pair(&nodes, 0.02);
        for eps in [0.1, 0.3, 0.6, 0.9] {
            let rep = contact_sets(&nodes, &u, &v, eps).unwrap();
            let b = check_measure_bound(&rep, &nodes);
            assert!(
                b.holds(1e-9 * (1.0 + b.mu_s)),
                "eps {eps}: mu_s {} excess {} defect {}",
                b.mu_s,
                b.contact_excess,
                b.defect_bound
            );
        }
    }

    #[test]
    fn second_diff_bounds_hold_for_test_pair() {
        let nodes = square_nodes(0.125);
        let (u, v) = test_pair(&nodes, 0.02);
        for eps in [0.2, 0.5, 0.8] {
            let viol = check_second_diff_bounds(&nodes, &u, &v, eps).unwrap();
            assert!(viol.is_empty(), "eps {eps}: {viol:?}");
        }
    }

    #[test]
    fn tau_exceptional_sets_avoid_contact() {
        let nodes = square_nodes(0.125);
        let (u, v) = test_pair(&nodes, 0.05);
        for eps in [0.2, 0.5, 0.8] {
            let viol = check_tau_exceptional_sets(&nodes, &u, &v, eps).unwrap();
            assert!(viol.is_empty(), "eps {eps}: {viol:?}");
        }
    }

    #[test]
    fn comparison_principle_holds_and_rejects_bad_hypotheses() {
        let nodes = square_nodes(0.25);
        // u has larger Hessian and smaller boundary values than v
        let u: Vec<f64> = nodes.positions().iter().map(|p| 2.0 * p.norm_sq() - 4.0).collect();
        let v: Vec<f64> = nodes.positions().iter().map(|p| p.norm_sq()).collect();
        assert!(check_comparison(&nodes, &u, &v).unwrap().is_empty());
        // reversed roles: measure ordering fails
        assert!(matches!(
            check_comparison(&nodes, &v, &u),
            Err(Error::Hypothesis { .. })
        ));
    }

    #[test]
    fn additivity_membership_sampling() {
        let nodes = square_nodes(0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let u = random_convex_values(nodes.positions(), &mut rng);
            let v = random_convex_values(nodes.positions(), &mut rng);
            let viol = check_subdiff_additivity(&nodes, &u, &v, 10, &mut rng).unwrap();
            assert!(viol.is_empty(), "{viol:?}");
        }
    }

    #[test]
    fn convexity_subdifferential_inequality() {
        let nodes = square_nodes(0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..10 {
            let v = random_convex_values(nodes.positions(), &mut rng);
            // u = v + independent convex part, so u - v is convex and all
            // interior nodes are contact nodes
            let w = random_convex_values(nodes.positions(), &mut rng);
            let u: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
            let viol = check_convexity_subdifferential(&nodes, &u, &v).unwrap();
            assert!(viol.is_empty(), "{viol:?}");
        }
    }

    #[test]
    fn brunn_minkowski_on_random_polygons() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(check_brunn_minkowski(100, &mut rng), 0);
    }

    #[test]
    fn level_set_bound_random_functions() {
        let nodes = square_nodes(0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let s: Vec<f64> = (0..nodes.len()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let loads: Vec<f64> = (0..nodes.len()).map(|_| rng.gen_range(0.01..2.0)).collect();
            let sigma = rng.gen_range(0.05..2.0);
            let (lhs, rhs) = check_level_set_bound(&nodes, &s, &loads, sigma).unwrap();
            assert!(lhs <= rhs + 1e-12 * (1.0 + rhs), "{lhs} > {rhs}");
        }
    }

    #[test]
    fn consistency_defect_decays_for_smooth_problem() {
        let prob = example1();
        let rows =
            consistency_decay(&prob, &[0.25, 0.125], Point2::new(0.0, 0.0), 3.0).unwrap();
        assert!(rows[1].interior_defect < rows[0].interior_defect);
        // near-boundary band stays O(h^2)
        for r in &rows {
            assert!(r.boundary_defect <= 10.0 * r.h * r.h, "{} at h {}", r.boundary_defect, r.h);
        }
    }

    #[test]
    fn regression_slope_recovers_exact_power() {
        let pts: Vec<(f64, f64)> = [0.5, 0.25, 0.125]
            .iter()
            .map(|&h: &f64| (h, 3.0 * h.powf(1.7)))
            .collect();
        assert!((regression_slope(&pts) - 1.7).abs() < 1e-12);
    }
}
