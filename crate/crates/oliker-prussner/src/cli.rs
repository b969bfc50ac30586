//! Run configuration and the two front-end pipelines: convergence studies
//! (error tables against the exact solution) and diagnostics sweeps
//! (contact sets, measure bounds, consistency decay).

use crate::assembly::{assemble_load, BackgroundMesh, Refinement};
use crate::diagnostics::{
    check_measure_bound, check_second_diff_bounds, consistency_decay, contact_sets,
};
use crate::domain_nodes::{generate_nodal_set, NodalSet};
use crate::envelope::LowerEnvelope;
use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::norms::{h1_error_discrete, linf_error, w2p_ninepoint, w2p_weighted, STENCIL};
use crate::problems::{example1, example2, example3, quadratic, Problem};
use crate::report::{ErrorReport, ErrorRow};
use crate::solver::{solve, SolveStats, SolverConfig};
use crate::subdifferential::measure_from_star;
use crate::domain_nodes::NodalFunction;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleId {
    One,
    Two,
    Three,
    Quadratic,
}

impl std::str::FromStr for ExampleId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(ExampleId::One),
            "2" => Ok(ExampleId::Two),
            "3" => Ok(ExampleId::Three),
            "quadratic" => Ok(ExampleId::Quadratic),
            other => Err(Error::InvalidConfig(format!(
                "unknown example '{other}' (expected 1, 2, 3, or quadratic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" => Ok(OutputFormat::Markdown),
            other => Err(Error::InvalidConfig(format!(
                "unknown format '{other}' (expected csv or markdown)"
            ))),
        }
    }
}

/// How the target measures f_i are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadScheme {
    /// `h^2 f(x_i)` point sampling (the variant behind the reference tables).
    Point,
    /// Hat-function quadrature against the background mesh.
    Hat,
    /// Exact subdifferential measures of the interpolated exact solution
    /// (makes the scheme exact for quadratics).
    ExactMeasure,
}

impl std::str::FromStr for LoadScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point" => Ok(LoadScheme::Point),
            "hat" => Ok(LoadScheme::Hat),
            "exact" => Ok(LoadScheme::ExactMeasure),
            other => Err(Error::InvalidConfig(format!(
                "unknown load scheme '{other}' (expected point, hat, or exact)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormVariant {
    /// Unweighted sum over the four lattice directions (table layout).
    NinePoint,
    /// Load-weighted functional; reported as the worst direction.
    Weighted,
}

impl std::str::FromStr for NormVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ninepoint" => Ok(NormVariant::NinePoint),
            "weighted" => Ok(NormVariant::Weighted),
            other => Err(Error::InvalidConfig(format!(
                "unknown norm variant '{other}' (expected ninepoint or weighted)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub example: ExampleId,
    /// Mesh sizes, strictly descending.
    pub levels: Vec<f64>,
    pub rel_tol: f64,
    pub max_sweeps: usize,
    pub norm_variant: NormVariant,
    pub h1_seminorm: bool,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Contact-set parameters for the diagnostics sweep (empty = skip).
    pub eps: Vec<f64>,
    pub r_test: f64,
    pub offset: Point2,
    pub dump_mesh: Option<PathBuf>,
    pub verbose: bool,
    /// Load assembly override; `None` picks the per-example default
    /// (point loads for smooth data, hat quadrature for singular data).
    pub loads: Option<LoadScheme>,
    /// Matrix for the quadratic problem: (a11, a12, a22).
    pub quadratic_matrix: (f64, f64, f64),
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            example: ExampleId::One,
            levels: levels_from(1.0, 5),
            rel_tol: 1e-6,
            max_sweeps: 100_000,
            norm_variant: NormVariant::NinePoint,
            h1_seminorm: false,
            format: OutputFormat::Markdown,
            out: None,
            eps: Vec::new(),
            r_test: 3.0,
            offset: Point2::new(0.0, 0.0),
            dump_mesh: None,
            verbose: false,
            loads: None,
            quadratic_matrix: (1.0, 0.0, 1.0),
        }
    }
}

/// `count` halvings starting at `h0`.
pub fn levels_from(h0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| h0 / (1u64 << k) as f64).collect()
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidConfig("no refinement levels given".into()));
        }
        for w in self.levels.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidConfig(format!(
                    "levels must be strictly descending, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        if !self.levels.iter().all(|&h| h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidConfig("levels must be positive".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol = {} must be positive", self.rel_tol)));
        }
        if !(self.r_test > 0.0) {
            return Err(Error::InvalidConfig(format!("rtest = {} must be positive", self.r_test)));
        }
        for &e in &self.eps {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::InvalidConfig(format!("eps = {e} must lie in (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        match self.example {
            ExampleId::One => Ok(example1()),
            ExampleId::Two => Ok(example2()),
            ExampleId::Three => Ok(example3()),
            ExampleId::Quadratic => {
                let (a11, a12, a22) = self.quadratic_matrix;
                quadratic(a11, a12, a22)
            }
        }
    }

    /// Applies one `key=value` setting (the config-file and flag vocabulary
    /// coincide; flags are applied after the file, so they win).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidConfig(format!("invalid {what}: '{value}'"));
        match key {
            "example" => self.example = value.parse()?,
            "levels" => {
                let n: usize = value.parse().map_err(|_| bad("level count"))?;
                if n == 0 {
                    return Err(bad("level count"));
                }
                let h0 = self.levels.first().copied().unwrap_or(1.0);
                self.levels = levels_from(h0, n);
            }
            "h0" => {
                let h0: f64 = value.parse().map_err(|_| bad("h0"))?;
                let n = self.levels.len().max(1);
                self.levels = levels_from(h0, n);
            }
            "tol" => self.rel_tol = value.parse().map_err(|_| bad("tol"))?,
            "max-sweeps" => self.max_sweeps = value.parse().map_err(|_| bad("max-sweeps"))?,
            "norm-variant" => self.norm_variant = value.parse()?,
            "h1" => {
                self.h1_seminorm = match value {
                    "norm" => false,
                    "seminorm" => true,
                    _ => return Err(bad("h1 variant (norm|seminorm)")),
                }
            }
            "format" => self.format = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "eps" => {
                self.eps = value
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.trim().parse::<f64>().map_err(|_| bad("eps list")))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "rtest" => self.r_test = value.parse().map_err(|_| bad("rtest"))?,
            "offset" => {
                let (x, y) = value
                    .split_once(',')
                    .ok_or_else(|| bad("offset (expected X,Y)"))?;
                self.offset = Point2::new(
                    x.trim().parse().map_err(|_| bad("offset x"))?,
                    y.trim().parse().map_err(|_| bad("offset y"))?,
                );
            }
            "dump-mesh" => self.dump_mesh = Some(PathBuf::from(value)),
            "loads" => self.loads = Some(value.parse()?),
            "verbose" => {
                self.verbose = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(bad("verbose (true|false)")),
                }
            }
            "quadratic" => {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != 3 {
                    return Err(bad("quadratic matrix (expected a11,a12,a22)"));
                }
                let mut v = [0.0; 3];
                for (slot, p) in v.iter_mut().zip(&parts) {
                    *slot = p.trim().parse().map_err(|_| bad("quadratic matrix entry"))?;
                }
                self.quadratic_matrix = (v[0], v[1], v[2]);
            }
            other => {
                return Err(Error::InvalidConfig(format!("unknown configuration key '{other}'")))
            }
        }
        Ok(())
    }

    /// Reads a flat `key=value` file (blank lines and `#` comments allowed).
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("{}:{}: expected key=value", path.display(), lineno + 1))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }
}

/// Everything computed on one refinement level.
pub struct LevelResult {
    pub row: ErrorRow,
    pub values: NodalFunction,
    pub nodes: NodalSet,
    pub stats: SolveStats,
}

/// Default load assembly per example: point loads for smooth right-hand
/// sides, hat quadrature (with local refinement near the singular set) when
/// the density is discontinuous or unbounded, and exact subdifferential
/// measures for the quadratic fixture.
pub fn default_loads(example: ExampleId) -> LoadScheme {
    match example {
        ExampleId::One => LoadScheme::Point,
        ExampleId::Two | ExampleId::Three => LoadScheme::Hat,
        ExampleId::Quadratic => LoadScheme::ExactMeasure,
    }
}

/// Hat-function loads for a problem, or exact subdifferential measures of
/// the interpolant for the quadratic fixture (which makes the scheme exact).
pub fn problem_loads(problem: &Problem, nodes: &NodalSet, scheme: LoadScheme) -> Result<Vec<f64>> {
    match scheme {
        LoadScheme::ExactMeasure => {
            let exact = problem
                .exact
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("problem has no exact solution".into()))?;
            let values: Vec<f64> = nodes.positions().iter().map(|&p| exact(p)).collect();
            let env = LowerEnvelope::new(nodes.positions().to_vec(), values)?;
            let mut loads = vec![0.0; nodes.len()];
            for i in nodes.interior_ids() {
                loads[i] = measure_from_star(&env, i)?;
            }
            Ok(loads)
        }
        LoadScheme::Point => {
            let mut loads = vec![0.0; nodes.len()];
            for i in nodes.interior_ids() {
                loads[i] = nodes.h * nodes.h * (problem.f)(nodes.position(i));
            }
            Ok(loads)
        }
        LoadScheme::Hat => {
            let mesh = BackgroundMesh::new(nodes)?;
            let refine = problem.singular.as_ref().map(|flag| Refinement {
                flag: flag.as_ref(),
                depth: problem.refine_depth,
            });
            Ok(assemble_load(&mesh, problem.f.as_ref(), refine.as_ref()))
        }
    }
}

fn solve_level(
    cfg: &RunConfig,
    problem: &Problem,
    h: f64,
    warm: Option<&LowerEnvelope>,
) -> Result<LevelResult> {
    let nodes = generate_nodal_set(&problem.domain, h, cfg.offset)?;
    let scheme = cfg.loads.unwrap_or_else(|| default_loads(cfg.example));
    let loads = problem_loads(problem, &nodes, scheme)?;
    let solver_cfg = SolverConfig {
        rel_tol: cfg.rel_tol,
        max_sweeps: cfg.max_sweeps,
        omega: None,
        verbose: cfg.verbose,
    };
    // warm start: the previous (coarser) solution evaluated at this level's
    // nodes; dropped if any node falls outside the coarse hull
    let initial: Option<Vec<f64>> = warm.and_then(|coarse| {
        nodes.positions().iter().map(|&p| coarse.evaluate(p).ok()).collect()
    });
    let (values, stats) =
        solve(&nodes, problem.g.as_ref(), &loads, initial.as_deref(), &solver_cfg)?;

    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("problem has no exact solution".into()))?;
    let grad = problem
        .exact_grad
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("problem has no exact gradient".into()))?;
    let env = LowerEnvelope::new(nodes.positions().to_vec(), values.values.clone())?;

    let exact_nodal = NodalFunction::from_fn(&nodes, |p| exact(p))?;
    let linf = linf_error(&values, &exact_nodal)?;
    // discrete H^1: solution vs interpolant of the exact solution on the
    // induced mesh (the continuous-field variant converges only first order
    // and does not match the reference tables)
    let _ = grad;
    let h1 = h1_error_discrete(&env, &exact_nodal.values, cfg.h1_seminorm)?;
    // error field as the difference of the two piecewise linear functions
    // (their boundary traces coincide, unlike the exact curved data)
    let env_exact = LowerEnvelope::new(nodes.positions().to_vec(), exact_nodal.values.clone())?;
    let err_field =
        |p: Point2| -> Result<f64> { Ok(env.evaluate(p)? - env_exact.evaluate(p)?) };
    let (w21, w22) = match cfg.norm_variant {
        NormVariant::NinePoint => (
            w2p_ninepoint(&err_field, &nodes, &problem.domain, 1.0)?,
            w2p_ninepoint(&err_field, &nodes, &problem.domain, 2.0)?,
        ),
        NormVariant::Weighted => {
            let worst = |p: f64| -> Result<f64> {
                let mut m = 0.0_f64;
                for e in STENCIL {
                    m = m.max(w2p_weighted(&err_field, &nodes, &problem.domain, &loads, e, p)?);
                }
                Ok(m)
            };
            (worst(1.0)?, worst(2.0)?)
        }
    };
    Ok(LevelResult {
        row: ErrorRow { h, linf, h1, w21, w22 },
        values,
        nodes,
        stats,
    })
}

/// Runs the convergence study over all levels (coarse to fine, each level
/// warm-started from the previous solution), renders the
/// table, and writes it to `cfg.out` or stdout.  On solver failure at some
/// level, the table of completed levels is still emitted before the error
/// is returned.
pub fn run_convergence(cfg: &RunConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let problem = cfg.problem()?;
    let results = run_levels(cfg, &problem);

    let mut rows = Vec::new();
    let mut failure: Option<Error> = None;
    let mut last_ok: Option<LevelResult> = None;
    for res in results {
        match res {
            Ok(level) => {
                rows.push(level.row.clone());
                last_ok = Some(level);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let report = ErrorReport { label: problem.label.to_string(), rows };
    let rendered = match cfg.format {
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Markdown => report.to_markdown(),
    };
    emit(cfg.out.as_deref(), &rendered)?;

    if let (Some(path), Some(level)) = (cfg.dump_mesh.as_deref(), last_ok.as_ref()) {
        let env = LowerEnvelope::new(
            level.nodes.positions().to_vec(),
            level.values.values.clone(),
        )?;
        env.write_off(std::fs::File::create(path)?)?;
    }
    match failure {
        Some(e) => {
            // attach what we know about the failed run to stderr
            eprintln!("solver failed after {} completed level(s): {e}", report.rows.len());
            Err(e)
        }
        None => Ok(report),
    }
}

fn run_levels(cfg: &RunConfig, problem: &Problem) -> Vec<Result<LevelResult>> {
    let mut out = Vec::new();
    let mut prev: Option<LowerEnvelope> = None;
    for &h in &cfg.levels {
        let res = solve_level(cfg, problem, h, prev.as_ref());
        match &res {
            Ok(level) => {
                prev = LowerEnvelope::new(
                    level.nodes.positions().to_vec(),
                    level.values.values.clone(),
                )
                .ok();
            }
            Err(_) => {
                out.push(res);
                break;
            }
        }
        out.push(res);
    }
    out
}

/// Diagnostics sweep: for every level, solves the problem twice (once with
/// inflated loads, giving an ordered convex pair with equal boundary data)
/// and tabulates contact-set sizes, the measure bounds, and the
/// second-difference violation count per `eps`; appends the consistency
/// decay of the exact interpolant.  Returns the CSV text (also written to
/// `cfg.out` when set).
pub fn run_diagnostics(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    if cfg.eps.is_empty() {
        return Err(Error::InvalidConfig("diagnostics needs a non-empty eps list".into()));
    }
    let problem = cfg.problem()?;
    let solver_cfg = SolverConfig {
        rel_tol: cfg.rel_tol,
        max_sweeps: cfg.max_sweeps,
        omega: None,
        verbose: cfg.verbose,
    };
    let mut csv = String::from(
        "h,eps,lower_contact,upper_contact,lower_noncontact,mu_s,contact_excess,defect_bound,second_diff_violations\n",
    );
    for &h in &cfg.levels {
        let nodes = generate_nodal_set(&problem.domain, h, cfg.offset)?;
        let scheme = cfg.loads.unwrap_or_else(|| default_loads(cfg.example));
        let loads = problem_loads(&problem, &nodes, scheme)?;
        let (v_h, _) = solve(&nodes, problem.g.as_ref(), &loads, None, &solver_cfg)?;
        // inflating the density pushes the solution down: ordered pair
        let inflated: Vec<f64> = loads.iter().map(|&f| f * 1.2).collect();
        let (u_h, _) = solve(&nodes, problem.g.as_ref(), &inflated, None, &solver_cfg)?;
        for &eps in &cfg.eps {
            let rep = contact_sets(&nodes, &u_h.values, &v_h.values, eps)?;
            let bounds = check_measure_bound(&rep, &nodes);
            let violations = check_second_diff_bounds(&nodes, &u_h.values, &v_h.values, eps)?;
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                h,
                eps,
                rep.lower_contact.len(),
                rep.upper_contact.len(),
                rep.lower_noncontact.len(),
                rep.mu_s,
                bounds.contact_excess,
                bounds.defect_bound,
                violations.len(),
            ));
        }
    }
    csv.push('\n');
    csv.push_str("h,interior_defect,boundary_defect\n");
    for row in consistency_decay(&problem, &cfg.levels, cfg.offset, cfg.r_test)? {
        csv.push_str(&format!(
            "{},{},{}\n",
            row.h, row.interior_defect, row.boundary_defect
        ));
    }
    emit(cfg.out.as_deref(), &csv)?;
    Ok(csv)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleId::One => write!(f, "1"),
            ExampleId::Two => write!(f, "2"),
            ExampleId::Three => write!(f, "3"),
            ExampleId::Quadratic => write!(f, "quadratic"),
        }
    }
}
