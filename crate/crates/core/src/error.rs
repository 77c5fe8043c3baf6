use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    pub fn invariant(msg: impl Into<String>) -> Self {
        ConfigError::Invariant(msg.into())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("singular system: free node {node} has no conductance to the network")]
    Singular { node: usize },
    #[error("Newton iteration did not converge after {iterations} iterations (last residual {residual:e}, last update {update:e} V)")]
    Nonlinear {
        iterations: usize,
        residual: f64,
        update: f64,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("statistics requested on an empty sample")]
    Empty,
    #[error("effective energy is undefined when every write fails")]
    UndefinedEec,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("cycle {cycle} failed: {source}")]
    Cycle {
        cycle: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("experiment error: {0}")]
    Experiment(String),
    #[error("output error on {path}: {message}")]
    Output { path: String, message: String },
}

impl Error {
    pub fn experiment(msg: impl Into<String>) -> Self {
        Error::Experiment(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
