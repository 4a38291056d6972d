use thiserror::Error;

/// Errors raised while building or loading a triangulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("element {element} is inverted or degenerate (signed area {area:e})")]
    InvertedElement { element: usize, area: f64 },
    #[error("element {element} references missing vertex {vertex}")]
    MissingVertex { element: usize, vertex: usize },
    #[error("non-manifold edge ({0}, {1}): more than two incident elements")]
    NonManifoldEdge(usize, usize),
    #[error("inconsistent orientation on edge ({0}, {1})")]
    InconsistentOrientation(usize, usize),
    #[error("mesh file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("polynomial order {0} is not supported (maximum is 3)")]
    UnsupportedOrder(usize),
    #[error("point ({0}, {1}) lies outside the reference triangle")]
    OutsideReference(f64, f64),
}

/// Failures inside the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("non-positive depth {depth:e} at element {element} (min-depth control must run first)")]
    NonPositiveDepth { element: usize, depth: f64 },
    #[error("depth degeneracy in auxiliary solve at element {element}: pivot {pivot:e} at row {row}")]
    DepthDegeneracy { element: usize, row: usize, pivot: f64 },
    #[error("non-finite value in element {element} after {context}")]
    NonFinite { element: usize, context: String },
    #[error("configuration error: {0}")]
    Config(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("missing timing for kernel `{kernel}` on lane {lane}")]
    MissingTiming { kernel: String, lane: char },
    #[error("unknown kernel name `{0}`")]
    UnknownKernel(String),
    #[error("timing table line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("kernel `{kernel}` failed on lane {lane}: {msg}")]
    LaneFailure { kernel: String, lane: char, msg: String },
    #[error("schedule does not match graph: {0}")]
    Mismatch(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("config line {line}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

/// Top-level error used by scenario runs and the command-line tool.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
