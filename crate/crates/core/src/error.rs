use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alist line {line}: {msg}")]
    Alist { line: usize, msg: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("permutation for block ({row}, {col}) is not a bijection on 0..{size}")]
    NonBijective { row: usize, col: usize, size: usize },

    #[error("invalid variable set: {0}")]
    InvalidSet(String),

    #[error("work bound exceeded: {needed} subset tests requested, bound is {bound}")]
    WorkBound { needed: u128, bound: u128 },

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("graph has 4-cycles; guided search requires a 4-cycle-free code")]
    FourCycles,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("check {check} touches the set {multiplicity} times; only 2 or 4 are modelled")]
    UnsupportedMultiplicity { check: usize, multiplicity: usize },

    #[error(
        "power iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("catalog has no ({a},{b}) family")]
    MissingFamily { a: usize, b: usize },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
