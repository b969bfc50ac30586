use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("nodal set has empty interior (h too large for the domain)")]
    EmptyInterior,

    #[error("polygon is not strictly convex and CCW")]
    NonConvexPolygon,

    #[error("nodes are collinear; no envelope exists")]
    CollinearNodes,

    #[error("point ({0}, {1}) lies outside the convex hull of the nodes")]
    OutsideHull(f64, f64),

    #[error("node {0} is a boundary node; subdifferential cells are defined at interior nodes")]
    BoundaryNode(usize),

    #[error("subdifferential cell is unbounded (node on hull boundary)")]
    UnboundedCell,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("mismatched nodal sets ({0} vs {1} nodes)")]
    MismatchedNodes(usize, usize),

    #[error("solver did not converge in {sweeps} sweeps (final residual {final_residual:.3e})")]
    NonConvergence {
        sweeps: usize,
        final_residual: f64,
        history: Vec<f64>,
    },

    #[error("hypothesis violated at node {node}: {what}")]
    Hypothesis { node: usize, what: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
