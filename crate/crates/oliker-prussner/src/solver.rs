//! Monotone solver for the discrete Monge-Ampere problem: find the convex
//! nodal function whose subdifferential measure at every interior node equals
//! the prescribed load, with given boundary values.
//!
//! Starting from a discrete supersolution, a Gauss-Seidel sweep lowers each
//! interior node until its subdifferential cell has the target measure.
//! Lowering a node only enlarges its own cell and shrinks the cells of other
//! nodes, so the iterates decrease monotonically to the solution.

use crate::domain_nodes::{NodalFunction, NodalSet, NodeId};
use crate::envelope::LowerEnvelope;
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::subdifferential::{cell_from_constraints, measure_from_star};

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Convergence threshold on `max_i |mu_i - f_i| / f_i`.
    pub rel_tol: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor applied to the per-node value decrement.
    /// 1.0 recovers the plain monotone sweep; `None` picks a factor from the
    /// node count. The overshoot is proportional to the decrement, so it
    /// vanishes as the iteration converges and the final measures still land
    /// in the tolerance band.
    pub omega: Option<f64>,
    /// Per-sweep progress on stderr.
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { rel_tol: 1e-6, max_sweeps: 10_000, omega: None, verbose: false }
    }
}

#[derive(Debug, Clone)]
pub struct SolveStats {
    pub sweeps: usize,
    pub node_updates: usize,
    /// Relative residual after each sweep.
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    /// Residual recomputed on a freshly rebuilt envelope.
    pub verified_residual: f64,
    /// Whether a supplied initial guess passed the supersolution check.
    pub warm_start_used: bool,
}

/// Solves for the nodal values.  `g` supplies boundary data, `loads` the
/// target measures (only interior entries are read).  `initial` may carry a
/// warm-start guess; it is used only if it verifies as a supersolution
/// (`mu_i <= f_i` everywhere), otherwise the solve falls back to the constant
/// upper initialization.
pub fn solve(
    nodes: &NodalSet,
    g: &dyn Fn(Point2) -> f64,
    loads: &[f64],
    initial: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<(NodalFunction, SolveStats)> {
    if loads.len() != nodes.len() {
        return Err(Error::MismatchedNodes(loads.len(), nodes.len()));
    }
    for i in nodes.interior_ids() {
        if !(loads[i] > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "load at interior node {i} is {}; must be positive",
                loads[i]
            )));
        }
    }
    let positions = nodes.positions().to_vec();
    let boundary: Vec<f64> = nodes.boundary_ids().map(|i| g(nodes.position(i))).collect();
    let top = boundary.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));

    let mut values = vec![0.0; nodes.len()];
    for i in nodes.interior_ids() {
        values[i] = top;
    }
    for (k, i) in nodes.boundary_ids().enumerate() {
        values[i] = boundary[k];
    }

    let mut warm_start_used = false;
    let mut env = if let Some(init) = initial {
        let mut v = init.to_vec();
        for (k, i) in nodes.boundary_ids().enumerate() {
            v[i] = boundary[k];
        }
        let cand = LowerEnvelope::new(positions.clone(), v)?;
        // a useful guess may overshoot moderately (the raise pass repairs
        // it); only badly overshot guesses are worse than the cold start
        let slack = 10.0;
        let ok = nodes.interior_ids().all(|i| {
            matches!(measure_from_star(&cand, i), Ok(m) if m <= loads[i] * slack)
        });
        if ok {
            warm_start_used = true;
            cand
        } else {
            if cfg.verbose {
                eprintln!("warm start rejected: not a measure supersolution");
            }
            LowerEnvelope::new(positions.clone(), values.clone())?
        }
    } else {
        LowerEnvelope::new(positions.clone(), values)?
    };

    let kappa = 0.5 * cfg.rel_tol;
    // Over-relaxation factor; the classical optimum for lattice diffusion is
    // 2/(1 + c h) and the measure-matching sweep behaves the same way.
    let omega = cfg.omega.unwrap_or_else(|| (2.0 / (1.0 + 2.5 * nodes.h)).clamp(1.0, 1.95));
    if !(omega >= 1.0 && omega < 2.0) {
        return Err(Error::InvalidConfig(format!("relaxation factor {omega} outside [1, 2)")));
    }
    let mut stats = SolveStats {
        sweeps: 0,
        node_updates: 0,
        residual_history: Vec::new(),
        final_residual: f64::INFINITY,
        verified_residual: f64::INFINITY,
        warm_start_used,
    };

    let mut res_prev = f64::INFINITY;
    let mut omega = omega;
    let mut res_best = f64::INFINITY;
    let mut stall = 0usize;
    let mut newton_threshold = 0.8;
    for sweep in 0..cfg.max_sweeps {
        // Overshot nodes (measure above target) are pulled back up only once
        // their excess is serious relative to the sweep's progress; smaller
        // excesses drain away as the neighbors keep descending.
        let raise_factor = 1.0 + (0.25 * res_prev).clamp(kappa, 1.0);
        // refine each node only as tightly as the current residual warrants;
        // neighbors still in motion would spoil a tight band anyway
        let kappa_sweep = (0.25 * res_prev).clamp(kappa, 0.25);
        let n_interior = nodes.interior_count();
        // raises are queued and applied in one batch: each one forces a full
        // hull rebuild, so the batch costs one rebuild instead of many
        let mut raises: Vec<(NodeId, f64)> = Vec::new();
        for i in nodes.interior_ids() {
            if update_node(
                &mut env,
                &positions,
                nodes.h,
                n_interior,
                i,
                loads[i],
                kappa_sweep,
                omega,
                raise_factor,
                &mut raises,
            )? {
                stats.node_updates += 1;
            }
        }
        if !raises.is_empty() {
            env.set_values(&raises)?;
        }
        stats.sweeps = sweep + 1;
        let res = max_residual(&env, nodes, loads)?;
        res_prev = res;
        stats.residual_history.push(res);
        if cfg.verbose {
            eprintln!("sweep {:4}: residual {:.3e}", sweep + 1, res);
        }
        if res <= cfg.rel_tol {
            stats.final_residual = res;
            break;
        }
        // once the sweeps have the iterate in the right neighbourhood, the
        // coupled measure equations are solved much faster by damped Newton
        // steps (the Jacobian is a weighted graph Laplacian); fall back to
        // sweeping whenever a step cannot make progress
        if res <= newton_threshold {
            match newton_phase(&mut env, nodes, loads, cfg, &mut stats)? {
                Some(final_res) => {
                    res_prev = final_res;
                    if final_res <= cfg.rel_tol {
                        stats.final_residual = final_res;
                        break;
                    }
                    newton_threshold = 0.5 * final_res;
                }
                None => {
                    // demand real sweep progress before trying again
                    newton_threshold = 0.5 * res;
                }
            }
        }
        // a relaxation factor past the stable limit makes the residual
        // oscillate instead of contract; back it off only when there is
        // essentially no progress, so slow-but-steady phases are left alone
        if res < 0.98 * res_best {
            res_best = res;
            stall = 0;
        } else {
            stall += 1;
            if stall >= 40 && omega > 1.0 {
                omega = 1.0 + 0.5 * (omega - 1.0);
                if omega < 1.05 {
                    omega = 1.0;
                }
                stall = 0;
                res_best = res;
                if cfg.verbose {
                    eprintln!("stalled: relaxation factor reduced to {omega:.3}");
                }
            }
        }
    }
    if stats.final_residual.is_infinite() {
        return Err(Error::NonConvergence {
            sweeps: stats.sweeps,
            final_residual: *stats.residual_history.last().unwrap_or(&f64::INFINITY),
            history: stats.residual_history,
        });
    }

    // independent verification on a rebuilt envelope
    let rebuilt = LowerEnvelope::new(positions, env.values().to_vec())?;
    stats.verified_residual = max_residual(&rebuilt, nodes, loads)?;
    if stats.verified_residual > 10.0 * cfg.rel_tol {
        return Err(Error::NonConvergence {
            sweeps: stats.sweeps,
            final_residual: stats.verified_residual,
            history: stats.residual_history,
        });
    }

    let u = NodalFunction::new(env.values().to_vec())?;
    Ok((u, stats))
}

/// Damped Newton iteration on the interior measure equations
/// `mu_i(z) = f_i`.  The Jacobian row of node `i` couples it to its envelope
/// neighbours `w` with weight `|e_iw| / |x_w - x_i|`, where `e_iw` is the
/// shared edge of the two subdifferential cells; the system matrix is the
/// corresponding Dirichlet graph Laplacian (symmetric positive definite) and
/// is solved matrix-free by conjugate gradients.  Iterates until the residual
/// reaches the tolerance or a damped step fails to reduce the defect;
/// returns the residual reached, or `None` when no step could be taken.
fn newton_phase(
    env: &mut LowerEnvelope,
    nodes: &NodalSet,
    loads: &[f64],
    cfg: &SolverConfig,
    stats: &mut SolveStats,
) -> Result<Option<f64>> {
    let n_int = nodes.interior_count();
    let positions = nodes.positions();
    let mut took_any = false;
    let mut res = f64::INFINITY;
    'newton: for _ in 0..60 {
        // assemble: measures, defect, and Laplacian weights from the stars
        let mut diag = vec![0.0; n_int];
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_int];
        let mut defect = vec![0.0; n_int];
        let mut l2 = 0.0;
        res = 0.0;
        for i in 0..n_int {
            let Some(edges) = cell_edge_weights(env, positions, i) else {
                // a node off the hull (or degenerate fan) has no usable row
                break 'newton;
            };
            let m = measure_from_star(env, i)?;
            for &(w, a) in &edges {
                diag[i] += a;
                if w < n_int {
                    adj[i].push((w, a));
                }
            }
            if diag[i] <= 0.0 {
                break 'newton;
            }
            defect[i] = m - loads[i];
            let rel = defect[i].abs() / loads[i];
            res = res.max(rel);
            l2 += rel * rel;
        }
        if res <= cfg.rel_tol {
            return Ok(Some(res));
        }
        let delta = cg_solve(&adj, &diag, &defect);

        // backtracking line search on the l2 defect
        let mut alpha = 1.0;
        let mut stepped = false;
        for _ in 0..6 {
            let mut trial = env.values().to_vec();
            for i in 0..n_int {
                trial[i] += alpha * delta[i];
            }
            if let Ok(cand) = LowerEnvelope::new(positions.to_vec(), trial) {
                if let Some((l2_new, res_new)) = defect_norms(&cand, nodes, loads) {
                    if l2_new < (1.0 - 0.25 * alpha) * l2 {
                        *env = cand;
                        stats.sweeps += 1;
                        stats.node_updates += n_int;
                        stats.residual_history.push(res_new);
                        if cfg.verbose {
                            eprintln!(
                                "newton step (alpha {alpha:.3}): residual {res_new:.3e}"
                            );
                        }
                        res = res_new;
                        took_any = true;
                        stepped = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !stepped {
            break;
        }
        if res <= cfg.rel_tol {
            return Ok(Some(res));
        }
    }
    Ok(if took_any { Some(res) } else { None })
}

/// Squared-relative-defect sum and max over interior nodes; `None` when any
/// interior cell is unreadable (node dropped off the hull interior).
fn defect_norms(env: &LowerEnvelope, nodes: &NodalSet, loads: &[f64]) -> Option<(f64, f64)> {
    let mut l2 = 0.0;
    let mut res: f64 = 0.0;
    for i in nodes.interior_ids() {
        let m = measure_from_star(env, i).ok()?;
        let rel = (m - loads[i]).abs() / loads[i];
        l2 += rel * rel;
        res = res.max(rel);
    }
    Some((l2, res))
}

/// Jacobian weights of node `i`: for each envelope neighbour `w`, the length
/// of the shared subdifferential-cell edge divided by `|x_w - x_i|`.
/// Consecutive facets of the star share the hull edge `i`-`w`, and their
/// gradients are the endpoints of the cell edge dual to `w`.
fn cell_edge_weights(
    env: &LowerEnvelope,
    positions: &[Point2],
    i: NodeId,
) -> Option<Vec<(NodeId, f64)>> {
    if !env.is_vertex(i) || env.on_hull_boundary(i) {
        return None;
    }
    let star = env.star(i);
    let k = star.len();
    if k < 3 {
        return None;
    }
    let mut out = Vec::with_capacity(k);
    for idx in 0..k {
        let f1 = env.facet(star[idx]);
        let f2 = env.facet(star[(idx + 1) % k]);
        let w = *f1
            .vertices
            .iter()
            .find(|&&v| v != i && f2.vertices.contains(&v))?;
        let len = (f1.gradient - f2.gradient).norm();
        let dist = (positions[w] - positions[i]).norm();
        out.push((w, len / dist));
    }
    Some(out)
}

/// Conjugate gradients with Jacobi preconditioning for the Dirichlet graph
/// Laplacian `L x = b` given by `diag` and the (interior-interior) adjacency.
fn cg_solve(adj: &[Vec<(usize, f64)>], diag: &[f64], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let apply = |x: &[f64], y: &mut [f64]| {
        for i in 0..n {
            let mut s = diag[i] * x[i];
            for &(j, a) in &adj[i] {
                s -= a * x[j];
            }
            y[i] = s;
        }
    };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let b_norm: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut ap = vec![0.0; n];
    for _ in 0..(4 * n.max(50)) {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= 1e-10 * b_norm {
            break;
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

/// Largest relative measure defect over the interior nodes.
pub fn max_residual(env: &LowerEnvelope, nodes: &NodalSet, loads: &[f64]) -> Result<f64> {
    let mut r: f64 = 0.0;
    for i in nodes.interior_ids() {
        let m = measure_from_star(env, i)
            .map_err(|e| Error::Geometry(format!("residual at node {i}: {e}")))?;
        r = r.max((loads[i] - m).abs() / loads[i]);
    }
    Ok(r)
}

/// Moves node `i` toward the value where its cell measure lands in
/// `[(1 - kappa) f, f]`: lowers undershot nodes (with over-relaxation
/// `omega`), raises nodes whose measure exceeds `raise_factor * f`.
/// Returns whether the value changed.
#[allow(clippy::too_many_arguments)]
fn update_node(
    env: &mut LowerEnvelope,
    positions: &[Point2],
    h: f64,
    n_interior: usize,
    i: NodeId,
    f: f64,
    kappa: f64,
    omega: f64,
    raise_factor: f64,
    raises: &mut Vec<(NodeId, f64)>,
) -> Result<bool> {
    let x = positions[i];
    let m0 = measure_from_star(env, i)
        .map_err(|e| Error::Geometry(format!("m0 at node {i}: {e}")))?;
    if m0 > raise_factor * f {
        if let Some(t) = raise_target(env, positions, h, i, f, kappa, m0)? {
            raises.push((i, t));
            return Ok(true);
        }
        return Ok(false);
    }
    if m0 >= (1.0 - kappa) * f {
        return Ok(false);
    }

    // bracket: walk the value down until the measure reaches the target
    let mut t_hi = env.evaluate(x)?; // m(t_hi) = m0 < (1 - kappa) f
    let t_start = t_hi;
    let mut m_hi = m0;
    let mut step = h * f.sqrt().max(1e-3);
    let mut t_lo = t_hi;
    let mut m_lo = m0;
    let mut bracketed = false;
    for _ in 0..200 {
        t_lo -= step;
        step *= 2.0;
        let cons = env.conflict_vertices(i, t_lo)?;
        m_lo = measure_at(env, positions, x, t_lo, &cons)?;
        if m_lo >= f {
            bracketed = true;
            break;
        }
        t_hi = t_lo;
        m_hi = m_lo;
    }
    if !bracketed {
        return Err(Error::Geometry(format!(
            "node {i}: failed to bracket target measure {f} (reached {m_lo})"
        )));
    }

    // the conflict set at the bracket bottom constrains the cell exactly for
    // every trial value in [t_lo, t_hi]
    let cons = env.conflict_vertices(i, t_lo)?;
    let t_band =
        refine_to_band(|t| measure_at(env, positions, x, t, &cons), t_lo, m_lo, t_hi, m_hi, f, kappa)?;

    // over-relax: push past the matching value in proportion to the decrement.
    // Back off when the cell measure would explode or when the move could
    // undercut a boundary vertex (its loss corrupts the stars nearby).
    let mut t_final = t_band;
    if omega > 1.0 && t_start > t_band {
        let mut extra = (omega - 1.0) * (t_start - t_band);
        for _ in 0..8 {
            let t_try = t_band - extra;
            let cons_try = env.conflict_vertices(i, t_try)?;
            if cons_try.iter().all(|&j| j < n_interior) {
                // an unbounded intersection means the interior constraints no
                // longer pin the cell down: treat as an over-deep trial
                match cell_from_constraints(positions, env.values(), x, t_try, &cons_try) {
                    Ok(cell) if cell.measure <= 4.0 * f => {
                        t_final = t_try;
                        break;
                    }
                    Ok(_) | Err(Error::UnboundedCell) => {}
                    Err(e) => return Err(e),
                }
            }
            extra *= 0.5;
        }
    }
    env.set_value(i, t_final)?;
    Ok(true)
}

/// Value that brings an overshot node's measure back into the band; the
/// caller applies it (batched with other raises).
fn raise_target(
    env: &mut LowerEnvelope,
    positions: &[Point2],
    h: f64,
    i: NodeId,
    f: f64,
    kappa: f64,
    m0: f64,
) -> Result<Option<f64>> {
    let x = positions[i];
    let t_cur = env.evaluate(x)?;
    // constraint superset for every higher trial value: the current star
    // vertices, plus every node projecting into the star region -- a node
    // above the hull there can become binding as the centre rises
    let star = env.star(i);
    if star.is_empty() {
        return Err(Error::Geometry(format!(
            "node {i} has positive measure but no incident facets"
        )));
    }
    let mut cons: Vec<NodeId> = Vec::new();
    let (mut lo, mut hi) = (x, x);
    for &fid in &star {
        for &w in &env.facet(fid).vertices {
            if w != i && !cons.contains(&w) {
                cons.push(w);
                let p = positions[w];
                lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
    }
    for (w, p) in positions.iter().enumerate() {
        if w != i
            && (lo.x..=hi.x).contains(&p.x)
            && (lo.y..=hi.y).contains(&p.y)
            && !cons.contains(&w)
        {
            cons.push(w);
        }
    }
    let mut t_lo = t_cur;
    let mut m_lo = m0;
    let mut t_hi = t_cur;
    let mut m_hi = m0;
    let mut step = h * f.sqrt().max(1e-3);
    let mut bracketed = false;
    for _ in 0..200 {
        t_hi += step;
        step *= 2.0;
        m_hi = measure_at_or_empty(env, positions, x, t_hi, &cons)?;
        if m_hi < f {
            bracketed = true;
            break;
        }
        t_lo = t_hi;
        m_lo = m_hi;
    }
    if !bracketed {
        return Err(Error::Geometry(format!(
            "node {i}: failed to bracket target measure {f} from below (reached {m_hi})"
        )));
    }
    let t_band = refine_to_band(
        |t| measure_at_or_empty(env, positions, x, t, &cons),
        t_lo,
        m_lo,
        t_hi,
        m_hi,
        f,
        kappa,
    )?;
    Ok(Some(t_band))
}

/// Finds a value in `[t_lo, t_hi]` whose measure lies in `[(1 - kappa) f, f]`
/// given `m(t_lo) = m_lo >= f` and `m(t_hi) = m_hi <= (1 - kappa) f`; `m` is
/// decreasing in `t`. Regula falsi with bisection fallback; on floating-point
/// exhaustion returns the side with measure <= f.
fn refine_to_band(
    mut m_of: impl FnMut(f64) -> Result<f64>,
    mut t_lo: f64,
    mut m_lo: f64,
    mut t_hi: f64,
    mut m_hi: f64,
    f: f64,
    kappa: f64,
) -> Result<f64> {
    if m_lo <= f {
        return Ok(t_lo);
    }
    for it in 0..200 {
        let t = if it % 3 == 2 || !(m_lo > m_hi) {
            0.5 * (t_lo + t_hi)
        } else {
            // secant through the bracket, kept strictly inside
            let s = t_hi + (t_lo - t_hi) * (f - m_hi) / (m_lo - m_hi);
            let inset = 1e-3 * (t_hi - t_lo);
            s.clamp(t_lo + inset, t_hi - inset)
        };
        let m = m_of(t)?;
        if m > f {
            t_lo = t;
            m_lo = m;
        } else if m < (1.0 - kappa) * f {
            t_hi = t;
            m_hi = m;
        } else {
            return Ok(t);
        }
        if t_hi - t_lo <= 1e-14 * (1.0 + t_hi.abs()) {
            break;
        }
    }
    // band narrower than floating point: prefer the side not exceeding the
    // target measure
    Ok(t_hi)
}

fn measure_at(
    env: &LowerEnvelope,
    positions: &[Point2],
    x: Point2,
    t: f64,
    cons: &[NodeId],
) -> Result<f64> {
    Ok(cell_from_constraints(positions, env.values(), x, t, cons)?.measure)
}

/// Like `measure_at`, but a trial value at or above the node's lift-off
/// height (where the cell degenerates to an unbounded sliver numerically)
/// counts as an empty cell.
fn measure_at_or_empty(
    env: &LowerEnvelope,
    positions: &[Point2],
    x: Point2,
    t: f64,
    cons: &[NodeId],
) -> Result<f64> {
    match cell_from_constraints(positions, env.values(), x, t, cons) {
        Ok(cell) => Ok(cell.measure),
        Err(Error::UnboundedCell) => Ok(0.0),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_load, BackgroundMesh};
    use crate::domain_nodes::{generate_nodal_set, Domain};
    use crate::subdifferential::cell_oracle;

    #[test]
    fn single_node_cone_solution() {
        // one interior node, zero boundary data, target measure 2:
        // the cell is the diamond |p_1| + |p_2| <= -t with area 2 t^2,
        // so the solution value is -1
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 1.0, Point2::new(0.0, 0.0)).unwrap();
        let mut loads = vec![0.0; nodes.len()];
        loads[0] = 2.0;
        let cfg = SolverConfig { rel_tol: 1e-10, ..Default::default() };
        let (u, stats) = solve(&nodes, &|_| 0.0, &loads, None, &cfg).unwrap();
        assert!((u[0] + 1.0).abs() < 1e-7, "u(0,0) = {}", u[0]);
        assert!(stats.final_residual <= 1e-10);
        assert!(stats.verified_residual <= 1e-9);
    }

    #[test]
    fn quadratic_data_is_reproduced() {
        // u = x^2 + x y / 2 + y^2, f = det D^2 u = 15/4
        let a = (2.0, 0.5, 2.0); // (u_xx, u_xy, u_yy)
        let exact = |p: Point2| 0.5 * (a.0 * p.x * p.x + 2.0 * a.1 * p.x * p.y + a.2 * p.y * p.y);
        let det = a.0 * a.2 - a.1 * a.1;
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.25, Point2::new(0.0, 0.0)).unwrap();
        let mesh = BackgroundMesh::new(&nodes).unwrap();
        let loads = assemble_load(&mesh, &|_| det, None);
        let cfg = SolverConfig { rel_tol: 1e-9, ..Default::default() };
        let (u, _) = solve(&nodes, &|p| exact(p), &loads, None, &cfg).unwrap();
        for i in nodes.interior_ids() {
            let e = (u[i] - exact(nodes.position(i))).abs();
            assert!(e < 1e-6, "node {i}: error {e}");
        }
    }

    #[test]
    fn solution_measures_match_oracle() {
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.5, Point2::new(0.0, 0.0)).unwrap();
        let mesh = BackgroundMesh::new(&nodes).unwrap();
        let loads = assemble_load(&mesh, &|_| 1.0, None);
        let cfg = SolverConfig { rel_tol: 1e-8, ..Default::default() };
        let (u, _) = solve(&nodes, &|_| 0.0, &loads, None, &cfg).unwrap();
        for i in nodes.interior_ids() {
            let cell = cell_oracle(nodes.positions(), &u.values, i).unwrap();
            assert!(
                (cell.measure - loads[i]).abs() <= 1e-7 * loads[i],
                "node {i}: oracle measure {} vs load {}",
                cell.measure,
                loads[i]
            );
        }
    }

    #[test]
    fn warm_start_from_the_solution_is_accepted() {
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.5, Point2::new(0.0, 0.0)).unwrap();
        let mesh = BackgroundMesh::new(&nodes).unwrap();
        let loads = assemble_load(&mesh, &|_| 1.0, None);
        let cfg = SolverConfig { rel_tol: 1e-8, ..Default::default() };
        let g = |p: Point2| p.norm_sq();
        let (u, _) = solve(&nodes, &g, &loads, None, &cfg).unwrap();
        let (v, stats) = solve(&nodes, &g, &loads, Some(&u.values), &cfg).unwrap();
        assert!(stats.warm_start_used);
        assert!(stats.sweeps <= 2);
        for i in nodes.interior_ids() {
            assert!((u[i] - v[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn bad_warm_start_is_rejected() {
        // values far below the solution are not a supersolution
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 0.5, Point2::new(0.0, 0.0)).unwrap();
        let mesh = BackgroundMesh::new(&nodes).unwrap();
        let loads = assemble_load(&mesh, &|_| 1.0, None);
        let mut bad = vec![0.0; nodes.len()];
        for i in nodes.interior_ids() {
            bad[i] = -100.0;
        }
        let cfg = SolverConfig::default();
        let (_, stats) = solve(&nodes, &|_| 0.0, &loads, Some(&bad), &cfg).unwrap();
        assert!(!stats.warm_start_used);
    }

    #[test]
    fn nonpositive_load_is_a_config_error() {
        let domain = Domain::unit_square2();
        let nodes = generate_nodal_set(&domain, 1.0, Point2::new(0.0, 0.0)).unwrap();
        let loads = vec![0.0; nodes.len()];
        assert!(matches!(
            solve(&nodes, &|_| 0.0, &loads, None, &SolverConfig::default()),
            Err(Error::InvalidConfig(_))
        ));
    }
}
