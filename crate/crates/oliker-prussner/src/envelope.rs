//! Lower convex envelope of nodal values.
//!
//! The envelope of values `v_i` at nodes `x_i` is the largest convex function
//! below all lifted points `(x_i, v_i)`; its graph is the lower convex hull of
//! the lifted points and it induces a triangulation of the convex hull of the
//! nodes.  The structure here maintains that triangulation under point-wise
//! *lowering* of values incrementally (Bowyer–Watson style cavity re-coning on
//! the lifted hull); raising a value falls back to a full rebuild.
//!
//! Hull boundary edges carry ghost facets (third vertex [`GHOST`]) so that
//! insertions outside or on the boundary of the current hull need no special
//! top-level casing.

use std::cell::Cell;
use std::collections::HashMap;
use std::io::Write as IoWrite;

use crate::domain_nodes::NodeId;
use crate::error::{Error, Result};
use crate::geom::{orient2d, Point2};

/// Sentinel vertex id used by hull-boundary (ghost) facets.
pub const GHOST: usize = usize::MAX;

const UNSET: usize = usize::MAX - 1;

#[derive(Debug, Clone, Copy)]
struct Facet {
    /// Vertex ids, counter-clockwise in the plane for real facets; ghost
    /// facets have exactly one [`GHOST`] entry and their real edge directed
    /// opposite to the neighboring real facet's copy of it.
    v: [usize; 3],
    /// `nbr[k]` is the facet across the edge opposite `v[k]`,
    /// i.e. across the directed edge `(v[k+1], v[k+2])`.
    nbr: [usize; 3],
    /// Supporting plane `z = grad . x + icept` (real facets only).
    grad: Point2,
    icept: f64,
    alive: bool,
}

impl Facet {
    fn ghost_index(&self) -> Option<usize> {
        self.v.iter().position(|&w| w == GHOST)
    }

    fn is_ghost(&self) -> bool {
        self.ghost_index().is_some()
    }

    fn edge(&self, k: usize) -> (usize, usize) {
        (self.v[(k + 1) % 3], self.v[(k + 2) % 3])
    }
}

/// A live real facet of the induced triangulation.
#[derive(Debug, Clone, Copy)]
pub struct FacetView {
    pub id: usize,
    pub vertices: [NodeId; 3],
    pub gradient: Point2,
    pub intercept: f64,
}

enum Location {
    /// Real facet whose closure contains the query point.
    Inside(usize),
    /// Ghost facet reached while walking out of the hull.
    Outside(usize),
}

pub struct LowerEnvelope {
    positions: Vec<Point2>,
    values: Vec<f64>,
    facets: Vec<Facet>,
    free: Vec<usize>,
    mark: Vec<u64>,
    epoch: u64,
    vertex_facet: Vec<Option<usize>>,
    hint: Cell<usize>,
    xtol: f64,
    ztol: f64,
    zmax: f64,
}

impl LowerEnvelope {
    pub fn new(positions: Vec<Point2>, values: Vec<f64>) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::MismatchedNodes(positions.len(), values.len()));
        }
        if positions.len() < 3 {
            return Err(Error::Geometry("an envelope needs at least 3 nodes".into()));
        }
        if let Some(bad) = values.iter().find(|z| !z.is_finite()) {
            return Err(Error::NonFinite(format!("nodal value {bad}")));
        }
        let mut xscale: f64 = 1.0;
        for p in &positions {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::NonFinite(format!("node position ({}, {})", p.x, p.y)));
            }
            xscale = xscale.max(p.x.abs()).max(p.y.abs());
        }
        let n = positions.len();
        let mut env = LowerEnvelope {
            positions,
            values,
            facets: Vec::new(),
            free: Vec::new(),
            mark: Vec::new(),
            epoch: 0,
            vertex_facet: vec![None; n],
            hint: Cell::new(0),
            xtol: 1e-13 * xscale * xscale,
            ztol: 0.0,
            zmax: 0.0,
        };
        env.rebuild()?;
        Ok(env)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, i: NodeId) -> Point2 {
        self.positions[i]
    }

    pub fn value(&self, i: NodeId) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Whether node `i` is a vertex of the lifted hull.
    pub fn is_vertex(&self, i: NodeId) -> bool {
        self.vertex_facet[i].is_some()
    }

    /// Whether the envelope touches the value at node `i`, within the
    /// relative tolerance `1e-10 * (1 + max |v|)`.  Hull vertices are always
    /// active; non-vertices can still be active in degenerate (flat) spots.
    pub fn is_active(&self, i: NodeId) -> Result<bool> {
        if self.is_vertex(i) {
            return Ok(true);
        }
        let gamma = self.evaluate(self.positions[i])?;
        Ok(self.values[i] - gamma <= 1e-10 * (1.0 + self.zmax))
    }

    /// Envelope value at `p`; fails outside the convex hull of the nodes.
    pub fn evaluate(&self, p: Point2) -> Result<f64> {
        match self.locate(p) {
            Location::Inside(f) => {
                let fc = &self.facets[f];
                Ok(fc.grad.dot(p) + fc.icept)
            }
            Location::Outside(g) => {
                // points on a hull boundary edge still have a value
                let gi = self.facets[g].ghost_index().unwrap();
                let (u, v) = self.facets[g].edge(gi);
                let (pu, pv) = (self.positions[u], self.positions[v]);
                let s = orient2d(pu, pv, p);
                let d = pv - pu;
                let t = d.dot(p - pu) / d.norm_sq();
                if s.abs() <= self.xtol && (-1e-12..=1.0 + 1e-12).contains(&t) {
                    Ok(self.values[u] + t * (self.values[v] - self.values[u]))
                } else {
                    Err(Error::OutsideHull(p.x, p.y))
                }
            }
        }
    }

    /// Sets the value at node `i`.  Lowering is incremental; raising rebuilds.
    pub fn set_value(&mut self, i: NodeId, z: f64) -> Result<()> {
        if !z.is_finite() {
            return Err(Error::NonFinite(format!("nodal value {z}")));
        }
        let old = self.values[i];
        self.values[i] = z;
        if z.abs() > self.zmax {
            self.zmax = z.abs();
            self.ztol = 1e-13 * (1.0 + self.zmax);
        }
        if z <= old {
            self.insert(i)?;
            Ok(())
        } else if self.vertex_facet[i].is_none()
            && self.evaluate(self.positions[i]).map(|g| g <= z).unwrap_or(false)
        {
            // was above the hull and still is: nothing to update
            Ok(())
        } else {
            self.rebuild()
        }
    }

    /// Sets several nodal values at once.  Pure lowerings are applied
    /// incrementally; if any value rises the hull is rebuilt once at the end,
    /// which is far cheaper than a rebuild per raised node.
    pub fn set_values(&mut self, updates: &[(NodeId, f64)]) -> Result<()> {
        let mut any_raise = false;
        for &(i, z) in updates {
            if !z.is_finite() {
                return Err(Error::NonFinite(format!("nodal value {z}")));
            }
            if z > self.values[i] {
                any_raise = true;
            }
            self.values[i] = z;
            if z.abs() > self.zmax {
                self.zmax = z.abs();
                self.ztol = 1e-13 * (1.0 + self.zmax);
            }
        }
        if any_raise {
            self.rebuild()
        } else {
            for &(i, _) in updates {
                self.insert(i)?;
            }
            Ok(())
        }
    }

    /// Live real facets of the induced triangulation.
    pub fn live_facets(&self) -> impl Iterator<Item = FacetView> + '_ {
        self.facets.iter().enumerate().filter_map(|(id, f)| {
            if f.alive && !f.is_ghost() {
                Some(FacetView { id, vertices: f.v, gradient: f.grad, intercept: f.icept })
            } else {
                None
            }
        })
    }

    pub fn facet(&self, id: usize) -> FacetView {
        let f = &self.facets[id];
        debug_assert!(f.alive && !f.is_ghost());
        FacetView { id, vertices: f.v, gradient: f.grad, intercept: f.icept }
    }

    /// Real facets incident to hull vertex `i`; empty if `i` is not a vertex.
    pub fn star(&self, i: NodeId) -> Vec<usize> {
        let Some(f0) = self.vertex_facet[i] else { return Vec::new() };
        let mut out = Vec::new();
        // rotate counter-clockwise, then clockwise if a ghost blocked the loop
        let mut cur = f0;
        loop {
            if self.facets[cur].is_ghost() {
                break;
            }
            out.push(cur);
            let k = self.facets[cur].v.iter().position(|&w| w == i).unwrap();
            cur = self.facets[cur].nbr[(k + 2) % 3];
            if cur == f0 {
                return out;
            }
        }
        let mut cur = f0;
        loop {
            let k = self.facets[cur].v.iter().position(|&w| w == i).unwrap();
            cur = self.facets[cur].nbr[(k + 1) % 3];
            if cur == f0 || self.facets[cur].is_ghost() {
                return out;
            }
            out.push(cur);
        }
    }

    /// Whether hull vertex `i` lies on the boundary of the projected hull
    /// (its facet fan touches a ghost).  False for non-vertices.
    pub fn on_hull_boundary(&self, i: NodeId) -> bool {
        let Some(f0) = self.vertex_facet[i] else { return false };
        let mut cur = f0;
        loop {
            if self.facets[cur].is_ghost() {
                return true;
            }
            let k = self.facets[cur].v.iter().position(|&w| w == i).unwrap();
            cur = self.facets[cur].nbr[(k + 2) % 3];
            if cur == f0 {
                return false;
            }
        }
    }

    /// Real facets whose closure contains `p`.
    pub fn facets_containing(&self, p: Point2) -> Result<Vec<usize>> {
        let f0 = match self.locate(p) {
            Location::Inside(f) => f,
            Location::Outside(g) => {
                // only points on the hull boundary are acceptable here
                let gi = self.facets[g].ghost_index().unwrap();
                let (u, v) = self.facets[g].edge(gi);
                let s = orient2d(self.positions[u], self.positions[v], p);
                if s.abs() > self.xtol {
                    return Err(Error::OutsideHull(p.x, p.y));
                }
                g
            }
        };
        let mut out = Vec::new();
        let mut stack = vec![f0];
        let mut seen = vec![f0];
        while let Some(f) = stack.pop() {
            if !self.facets[f].is_ghost() && self.contains(f, p) {
                out.push(f);
            }
            for k in 0..3 {
                let g = self.facets[f].nbr[k];
                if !seen.contains(&g) && !self.facets[g].is_ghost() && self.contains(g, p) {
                    seen.push(g);
                    stack.push(g);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::OutsideHull(p.x, p.y));
        }
        Ok(out)
    }

    fn contains(&self, f: usize, p: Point2) -> bool {
        let fc = &self.facets[f];
        if fc.is_ghost() {
            return false;
        }
        (0..3).all(|k| {
            let (a, b) = fc.edge(k);
            orient2d(self.positions[a], self.positions[b], p) >= -self.xtol
        })
    }

    /// Node ids that constrain a hypothetical insertion of value `z` at the
    /// position of node `i`: all vertices of facets in conflict with the
    /// lifted point.  The set is a superset of the star `i` would get when
    /// actually inserted at any value `>= z`, which makes it a sound
    /// constraint set for subgradient cells along the whole range.
    pub fn conflict_vertices(&mut self, i: NodeId, z: f64) -> Result<Vec<NodeId>> {
        let x = self.positions[i];
        let cavity = self.cavity_for(i, x, z)?;
        let mut out: Vec<NodeId> = cavity
            .iter()
            .flat_map(|&f| self.facets[f].v)
            .filter(|&w| w != GHOST && w != i)
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Checks that every interior edge of the triangulation is convex and the
    /// hull supports all lifted points from below.  Intended for tests.
    pub fn check_valid(&self) -> Result<()> {
        let tol = 1e-9 * (1.0 + self.zmax);
        for fv in self.live_facets() {
            let fc = &self.facets[fv.id];
            for k in 0..3 {
                let g = fc.nbr[k];
                let gc = &self.facets[g];
                if !gc.alive {
                    return Err(Error::Geometry(format!("facet {} has dead neighbor", fv.id)));
                }
                if gc.is_ghost() {
                    continue;
                }
                let (a, b) = fc.edge(k);
                let opp = *gc.v.iter().find(|&&w| w != a && w != b).unwrap();
                let p = self.positions[opp];
                if self.values[opp] < fc.grad.dot(p) + fc.icept - tol {
                    return Err(Error::Geometry(format!(
                        "non-convex edge between facets {} and {g}",
                        fv.id
                    )));
                }
            }
        }
        for i in 0..self.positions.len() {
            let gamma = self.evaluate(self.positions[i])?;
            if gamma > self.values[i] + tol {
                return Err(Error::Geometry(format!("hull passes above node {i}")));
            }
        }
        Ok(())
    }

    /// Writes the lifted hull as an OFF mesh.
    pub fn write_off(&self, mut w: impl IoWrite) -> Result<()> {
        let faces: Vec<[usize; 3]> = self
            .facets
            .iter()
            .filter(|f| f.alive && !f.is_ghost())
            .map(|f| f.v)
            .collect();
        writeln!(w, "OFF")?;
        writeln!(w, "{} {} 0", self.positions.len(), faces.len())?;
        for (p, z) in self.positions.iter().zip(&self.values) {
            writeln!(w, "{} {} {}", p.x, p.y, z)?;
        }
        for f in faces {
            writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
        }
        Ok(())
    }

    // ---- internals -------------------------------------------------------

    fn rebuild(&mut self) -> Result<()> {
        self.facets.clear();
        self.free.clear();
        self.mark.clear();
        self.epoch = 0;
        self.vertex_facet = vec![None; self.positions.len()];
        self.zmax = self.values.iter().fold(0.0, |m, z| z.abs().max(m));
        self.ztol = 1e-13 * (1.0 + self.zmax);

        // initial non-collinear triple, searched in id order
        let i0 = 0;
        let i1 = 1;
        let mut i2 = None;
        for i in 2..self.positions.len() {
            if orient2d(self.positions[i0], self.positions[i1], self.positions[i]).abs()
                > self.xtol
            {
                i2 = Some(i);
                break;
            }
        }
        let Some(i2) = i2 else { return Err(Error::CollinearNodes) };
        let (a, b, c) = if orient2d(self.positions[i0], self.positions[i1], self.positions[i2])
            > 0.0
        {
            (i0, i1, i2)
        } else {
            (i0, i2, i1)
        };
        let (grad, icept) = self.plane_through(a, b, c);
        let real = self.alloc(Facet { v: [a, b, c], nbr: [UNSET; 3], grad, icept, alive: true });
        let mut new = vec![real];
        for k in 0..3 {
            let (u, v) = self.facets[real].edge(k);
            new.push(self.alloc(Facet {
                v: [v, u, GHOST],
                nbr: [UNSET; 3],
                grad: Point2::new(0.0, 0.0),
                icept: 0.0,
                alive: true,
            }));
        }
        self.link_new(&new);
        for w in [a, b, c] {
            self.vertex_facet[w] = Some(real);
        }
        self.hint.set(real);

        for i in 0..self.positions.len() {
            if i != a && i != b && i != c {
                self.insert(i)?;
            }
        }
        Ok(())
    }

    fn plane_through(&self, a: usize, b: usize, c: usize) -> (Point2, f64) {
        let (pa, pb, pc) = (self.positions[a], self.positions[b], self.positions[c]);
        let (za, zb, zc) = (self.values[a], self.values[b], self.values[c]);
        let e1 = pb - pa;
        let e2 = pc - pa;
        let det = e1.cross(e2);
        let gx = ((zb - za) * e2.y - (zc - za) * e1.y) / det;
        let gy = ((zc - za) * e1.x - (zb - za) * e2.x) / det;
        let grad = Point2::new(gx, gy);
        (grad, za - grad.dot(pa))
    }

    fn alloc(&mut self, f: Facet) -> usize {
        if let Some(id) = self.free.pop() {
            self.facets[id] = f;
            self.mark[id] = 0;
            id
        } else {
            self.facets.push(f);
            self.mark.push(0);
            self.facets.len() - 1
        }
    }

    fn link_new(&mut self, new: &[usize]) {
        let mut map: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for &f in new {
            for k in 0..3 {
                map.insert(self.facets[f].edge(k), (f, k));
            }
        }
        for &f in new {
            for k in 0..3 {
                if self.facets[f].nbr[k] != UNSET {
                    continue;
                }
                let (u, v) = self.facets[f].edge(k);
                let (g, j) = *map
                    .get(&(v, u))
                    .expect("unmatched interior edge while linking new facets");
                self.facets[f].nbr[k] = g;
                self.facets[g].nbr[j] = f;
            }
        }
    }

    /// Whether the lifted point `(x, z)` sees facet `f` from below.
    fn conflicts(&self, f: usize, x: Point2, z: f64) -> bool {
        let fc = &self.facets[f];
        if let Some(gk) = fc.ghost_index() {
            let (u, v) = fc.edge(gk);
            let (pu, pv) = (self.positions[u], self.positions[v]);
            // re-insertion at a hull boundary vertex always claims its ghosts
            if (x - pu).norm_sq() <= self.xtol * self.xtol
                || (x - pv).norm_sq() <= self.xtol * self.xtol
            {
                return true;
            }
            let s = orient2d(pu, pv, x);
            if s > self.xtol {
                return true; // strictly outside the hull across this edge
            }
            if s < -self.xtol {
                return false; // strictly inside
            }
            // on the hull edge's line: compare against the lifted edge line
            let d = pv - pu;
            let t = d.dot(x - pu) / d.norm_sq();
            z < self.values[u] + t * (self.values[v] - self.values[u]) - self.ztol
        } else {
            z < fc.grad.dot(x) + fc.icept - self.ztol
        }
    }

    fn any_live(&self) -> usize {
        self.facets
            .iter()
            .position(|f| f.alive)
            .expect("envelope has no live facets")
    }

    fn locate(&self, p: Point2) -> Location {
        let mut f = self.hint.get();
        if f >= self.facets.len() || !self.facets[f].alive {
            f = self.any_live();
        }
        if let Some(gk) = self.facets[f].ghost_index() {
            f = self.facets[f].nbr[gk];
        }
        let limit = 4 * self.facets.len() + 16;
        for _ in 0..limit {
            let fc = &self.facets[f];
            let mut worst = (-self.xtol, usize::MAX);
            for k in 0..3 {
                let (a, b) = fc.edge(k);
                let s = orient2d(self.positions[a], self.positions[b], p);
                if s < worst.0 {
                    worst = (s, k);
                }
            }
            if worst.1 == usize::MAX {
                self.hint.set(f);
                return Location::Inside(f);
            }
            let g = fc.nbr[worst.1];
            if self.facets[g].is_ghost() {
                self.hint.set(f);
                return Location::Outside(g);
            }
            f = g;
        }
        // fallback: exhaustive scan (degenerate walks only)
        for (id, fc) in self.facets.iter().enumerate() {
            if fc.alive && !fc.is_ghost() && self.contains(id, p) {
                return Location::Inside(id);
            }
        }
        for (id, fc) in self.facets.iter().enumerate() {
            if fc.alive && fc.is_ghost() {
                let (u, v) = fc.edge(fc.ghost_index().unwrap());
                if orient2d(self.positions[u], self.positions[v], p) >= -self.xtol {
                    return Location::Outside(id);
                }
            }
        }
        Location::Outside(
            self.facets
                .iter()
                .position(|fc| fc.alive && fc.is_ghost())
                .expect("envelope has no ghost facets"),
        )
    }

    /// Conflict seeds for inserting node `i` (position `x`, lifted value `z`).
    fn seed_conflicts(&self, i: NodeId, x: Point2, z: f64) -> Vec<usize> {
        let raw: Vec<usize> = if let Some(f0) = self.vertex_facet[i] {
            vec![f0]
        } else {
            match self.locate(x) {
                Location::Inside(f) => vec![f],
                Location::Outside(_) => self
                    .facets
                    .iter()
                    .enumerate()
                    .filter(|(_, fc)| fc.alive && fc.is_ghost())
                    .map(|(id, _)| id)
                    .collect(),
            }
        };
        raw.into_iter().filter(|&f| self.conflicts(f, x, z)).collect()
    }

    /// Flood-fills the conflict region from `seeds`; returns facet ids and
    /// leaves them marked with the current epoch.
    fn flood(&mut self, x: Point2, z: f64, seeds: &[usize]) -> Vec<usize> {
        self.epoch += 1;
        let mut cavity = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        for &f in seeds {
            if self.mark[f] != self.epoch {
                self.mark[f] = self.epoch;
                stack.push(f);
            }
        }
        while let Some(f) = stack.pop() {
            cavity.push(f);
            for k in 0..3 {
                let g = self.facets[f].nbr[k];
                if self.mark[g] != self.epoch && self.conflicts(g, x, z) {
                    self.mark[g] = self.epoch;
                    stack.push(g);
                }
            }
        }
        cavity
    }

    /// Directed boundary edges of the marked cavity: `(a, b, outer, outer_k)`
    /// with `(a, b)` as seen from the dead side.
    fn cavity_boundary(&self, cavity: &[usize]) -> Vec<(usize, usize, usize, usize)> {
        let mut out = Vec::new();
        for &f in cavity {
            for k in 0..3 {
                let g = self.facets[f].nbr[k];
                if self.mark[g] != self.epoch {
                    let (a, b) = self.facets[f].edge(k);
                    let gk = self.facets[g]
                        .v
                        .iter()
                        .position(|&w| w != a && w != b)
                        .expect("neighbor does not share the edge");
                    out.push((a, b, g, gk));
                }
            }
        }
        out
    }

    /// Conflict cavity for inserting value `z` at the position of node `i`,
    /// including the collinear-edge repair applied by `insert`; the facets
    /// are left marked with the current epoch.  Empty when the lifted point
    /// is on or above the hull.
    fn cavity_for(&mut self, i: NodeId, x: Point2, z: f64) -> Result<Vec<usize>> {
        let seeds = self.seed_conflicts(i, x, z);
        if seeds.is_empty() {
            return Ok(Vec::new());
        }
        let mut cavity = self.flood(x, z, &seeds);

        // repair: cone facets over real boundary edges must stay oriented;
        // a (near-)collinear edge forces its outer facet into the cavity
        loop {
            let boundary = self.cavity_boundary(&cavity);
            let mut forced = Vec::new();
            for &(a, b, g, _) in &boundary {
                if a == GHOST || b == GHOST {
                    continue;
                }
                if orient2d(self.positions[a], self.positions[b], x) <= self.xtol {
                    forced.push(g);
                }
            }
            if forced.is_empty() {
                break;
            }
            let live = self.facets.iter().filter(|f| f.alive).count();
            if cavity.len() + forced.len() >= live {
                return Err(Error::Geometry(format!(
                    "degenerate cavity while inserting node {i}"
                )));
            }
            for g in forced {
                if self.mark[g] != self.epoch {
                    self.mark[g] = self.epoch;
                    // continue the flood from the forced facet
                    cavity.push(g);
                    let mut stack = vec![g];
                    while let Some(f) = stack.pop() {
                        for k in 0..3 {
                            let n = self.facets[f].nbr[k];
                            if self.mark[n] != self.epoch && self.conflicts(n, x, z) {
                                self.mark[n] = self.epoch;
                                stack.push(n);
                                cavity.push(n);
                            }
                        }
                    }
                }
            }
        }
        Ok(cavity)
    }

    /// Inserts node `i` at its current value; no-op when the lifted point is
    /// on or above the hull.  Returns whether the hull changed.
    fn insert(&mut self, i: NodeId) -> Result<bool> {
        let x = self.positions[i];
        let z = self.values[i];
        let cavity = self.cavity_for(i, x, z)?;
        if cavity.is_empty() {
            return Ok(false);
        }

        let boundary = self.cavity_boundary(&cavity);

        // re-cone the cavity boundary to the new lifted point
        let mut new = Vec::with_capacity(boundary.len());
        for &(a, b, outer, outer_k) in &boundary {
            debug_assert!(a != i && b != i, "cavity boundary touches the inserted node");
            let (grad, icept) = if a == GHOST || b == GHOST {
                (Point2::new(0.0, 0.0), 0.0)
            } else {
                self.plane_through(a, b, i)
            };
            let f = self.alloc(Facet { v: [a, b, i], nbr: [UNSET; 3], grad, icept, alive: true });
            self.facets[f].nbr[2] = outer;
            self.facets[outer].nbr[outer_k] = f;
            new.push(f);
        }
        self.link_new(&new);

        for &f in &cavity {
            self.facets[f].alive = false;
            self.free.push(f);
        }
        // vertex bookkeeping: cavity-boundary vertices get fresh facets,
        // vertices strictly inside the cavity drop off the hull
        let mut dead_verts: Vec<usize> = cavity
            .iter()
            .flat_map(|&f| self.facets[f].v)
            .filter(|&w| w != GHOST)
            .collect();
        dead_verts.sort_unstable();
        dead_verts.dedup();
        for &w in &dead_verts {
            self.vertex_facet[w] = None;
        }
        for &f in &new {
            for &w in &self.facets[f].v {
                if w != GHOST && !self.facets[f].is_ghost() {
                    self.vertex_facet[w] = Some(f);
                }
            }
        }
        if self.vertex_facet[i].is_none() {
            // all-ghost cone cannot happen for a point below the hull
            return Err(Error::Geometry(format!(
                "node {i} inserted without a real facet"
            )));
        }
        self.hint.set(self.vertex_facet[i].unwrap());
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(n: usize, h: f64, f: impl Fn(Point2) -> f64) -> (Vec<Point2>, Vec<f64>) {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                pts.push(Point2::new(i as f64 * h, j as f64 * h));
            }
        }
        let vals = pts.iter().map(|&p| f(p)).collect();
        (pts, vals)
    }

    /// Exhaustive lower-hull oracle: max over all admissible 3-point planes.
    fn brute_evaluate(pts: &[Point2], vals: &[f64], x: Point2) -> f64 {
        let n = pts.len();
        let mut best = f64::NEG_INFINITY;
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    let det = orient2d(pts[a], pts[b], pts[c]);
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let e1 = pts[b] - pts[a];
                    let e2 = pts[c] - pts[a];
                    let gx = ((vals[b] - vals[a]) * e2.y - (vals[c] - vals[a]) * e1.y) / det;
                    let gy = ((vals[c] - vals[a]) * e1.x - (vals[b] - vals[a]) * e2.x) / det;
                    let g = Point2::new(gx, gy);
                    let ic = vals[a] - g.dot(pts[a]);
                    if (0..n).all(|m| vals[m] >= g.dot(pts[m]) + ic - 1e-9) {
                        best = best.max(g.dot(x) + ic);
                    }
                }
            }
        }
        best
    }

    #[test]
    fn paraboloid_lattice_everything_is_a_vertex() {
        let (pts, vals) = lattice(5, 0.25, |p| p.norm_sq());
        let env = LowerEnvelope::new(pts.clone(), vals.clone()).unwrap();
        env.check_valid().unwrap();
        for i in 0..pts.len() {
            assert!(env.is_vertex(i), "node {i} should be a hull vertex");
            assert!((env.evaluate(pts[i]).unwrap() - vals[i]).abs() < 1e-12);
        }
        // Euler count: F = 2V - H - 2 with 16 hull-boundary vertices
        assert_eq!(env.live_facets().count(), 2 * 25 - 16 - 2);
    }

    #[test]
    fn single_dip_makes_a_cone() {
        let pts = vec![
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
            Point2::new(0.0, 0.0),
        ];
        let vals = vec![0.0, 0.0, 0.0, 0.0, -1.0];
        let env = LowerEnvelope::new(pts, vals).unwrap();
        env.check_valid().unwrap();
        assert!(env.is_vertex(4));
        assert_eq!(env.star(4).len(), 4);
        assert!((env.evaluate(Point2::new(0.5, 0.0)).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn point_above_hull_is_not_active() {
        let pts = vec![
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
            Point2::new(0.0, 0.0),
        ];
        let vals = vec![0.0, 0.0, 0.0, 0.0, 0.5];
        let env = LowerEnvelope::new(pts, vals).unwrap();
        assert!(!env.is_vertex(4));
        assert!(!env.is_active(4).unwrap());
        assert!((env.evaluate(Point2::new(0.0, 0.0)).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn tie_is_active_but_not_a_vertex() {
        let pts = vec![
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
            Point2::new(0.0, 0.0),
        ];
        let vals = vec![0.0, 0.0, 0.0, 0.0, 0.0];
        let env = LowerEnvelope::new(pts, vals).unwrap();
        assert!(!env.is_vertex(4));
        assert!(env.is_active(4).unwrap());
    }

    #[test]
    fn lowering_matches_fresh_build() {
        let (pts, mut vals) = lattice(4, 1.0 / 3.0, |p| p.norm_sq());
        let mut env = LowerEnvelope::new(pts.clone(), vals.clone()).unwrap();
        vals[5] -= 0.3;
        vals[10] -= 0.7;
        env.set_value(5, vals[5]).unwrap();
        env.set_value(10, vals[10]).unwrap();
        env.check_valid().unwrap();
        let fresh = LowerEnvelope::new(pts.clone(), vals).unwrap();
        for k in 0..40 {
            let p = Point2::new(0.017 * k as f64 % 1.0, 0.029 * k as f64 % 1.0);
            let a = env.evaluate(p).unwrap();
            let b = fresh.evaluate(p).unwrap();
            assert!((a - b).abs() < 1e-10, "mismatch at {p:?}: {a} vs {b}");
        }
    }

    #[test]
    fn raising_rebuilds() {
        let (pts, vals) = lattice(4, 1.0 / 3.0, |p| p.norm_sq());
        let mut env = LowerEnvelope::new(pts.clone(), vals.clone()).unwrap();
        env.set_value(5, vals[5] - 0.5).unwrap();
        env.set_value(5, vals[5]).unwrap();
        env.check_valid().unwrap();
        let fresh = LowerEnvelope::new(pts, vals).unwrap();
        for k in 0..40 {
            let p = Point2::new(0.013 * k as f64 % 1.0, 0.031 * k as f64 % 1.0);
            assert!((env.evaluate(p).unwrap() - fresh.evaluate(p).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn collinear_nodes_rejected() {
        let pts: Vec<Point2> = (0..5).map(|k| Point2::new(k as f64, 2.0 * k as f64)).collect();
        let vals = vec![0.0; 5];
        assert!(matches!(LowerEnvelope::new(pts, vals), Err(Error::CollinearNodes)));
    }

    #[test]
    fn evaluate_outside_hull_fails() {
        let (pts, vals) = lattice(3, 0.5, |p| p.norm_sq());
        let env = LowerEnvelope::new(pts, vals).unwrap();
        assert!(matches!(
            env.evaluate(Point2::new(5.0, 5.0)),
            Err(Error::OutsideHull(_, _))
        ));
    }

    #[test]
    fn evaluate_on_hull_boundary_interpolates() {
        let (pts, vals) = lattice(3, 0.5, |p| p.norm_sq());
        let env = LowerEnvelope::new(pts, vals).unwrap();
        // midpoint of a boundary edge of the hull
        let v = env.evaluate(Point2::new(0.25, 0.0)).unwrap();
        assert!((v - 0.5 * (0.0 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_oracle() {
        // deterministic scattered values over a small lattice
        let (pts, _) = lattice(4, 1.0 / 3.0, |_| 0.0);
        let vals: Vec<f64> = (0..pts.len())
            .map(|k| ((k * 2654435761usize) % 1000) as f64 / 500.0 - 1.0)
            .collect();
        let env = LowerEnvelope::new(pts.clone(), vals.clone()).unwrap();
        env.check_valid().unwrap();
        for k in 0..25 {
            let p = Point2::new(0.041 * k as f64 % 1.0, 0.059 * k as f64 % 1.0);
            let a = env.evaluate(p).unwrap();
            let b = brute_evaluate(&pts, &vals, p);
            assert!((a - b).abs() < 1e-9, "mismatch at {p:?}: {a} vs {b}");
        }
    }

    #[test]
    fn conflict_vertices_cover_the_new_star() {
        let (pts, vals) = lattice(5, 0.25, |p| p.norm_sq());
        let mut env = LowerEnvelope::new(pts.clone(), vals.clone()).unwrap();
        let i = 12; // center node
        let z = vals[i] - 0.4;
        let cons = env.conflict_vertices(i, z).unwrap();
        env.set_value(i, z).unwrap();
        let star_verts: Vec<usize> = env
            .star(i)
            .iter()
            .flat_map(|&f| env.facet(f).vertices)
            .filter(|&w| w != i)
            .collect();
        for w in star_verts {
            assert!(cons.contains(&w), "constraint set misses star vertex {w}");
        }
    }

    #[test]
    fn constant_values_are_degenerate_but_valid() {
        let (pts, vals) = lattice(4, 1.0 / 3.0, |_| 2.0);
        let env = LowerEnvelope::new(pts.clone(), vals).unwrap();
        for i in 0..pts.len() {
            assert!(env.is_active(i).unwrap());
            assert!((env.evaluate(pts[i]).unwrap() - 2.0).abs() < 1e-9);
        }
    }
}
