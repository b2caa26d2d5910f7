use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("topology error in triangle {element}: {message}")]
    Topology { element: usize, message: String },

    #[error("non-manifold boundary of subdomain {subdomain} at vertex {vertex}")]
    NonManifold { subdomain: usize, vertex: usize },

    #[error("subdomain {0} has no triangles")]
    EmptySubdomain(usize),

    #[error("singular pivot {pivot} (|d| = {magnitude:e}){}", subdomain_suffix(*.subdomain))]
    SingularPivot {
        subdomain: Option<usize>,
        pivot: usize,
        magnitude: f64,
    },

    #[error("dense factorization failed: {0}")]
    Factorization(String),

    #[error("special function overflow: {0}")]
    Overflow(String),

    #[error("kernel evaluated at its singularity")]
    KernelSingularity,

    #[error("evaluation point at distance {distance:e} from the boundary, need at least {required:e}")]
    TooCloseToBoundary { distance: f64, required: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("restriction map is rank deficient: {0}")]
    RankDeficient(String),

    #[error("{dofs} skeleton unknowns exceed the dense limit {limit}")]
    DenseLimit { dofs: usize, limit: usize },

    #[error("iterative solver breakdown: {0}")]
    Breakdown(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn subdomain_suffix(subdomain: Option<usize>) -> String {
    match subdomain {
        Some(j) => format!(" in subdomain {j}"),
        None => String::new(),
    }
}

impl Error {
    /// Attach a subdomain id to a pivot failure raised by a generic factorization.
    pub fn in_subdomain(self, j: usize) -> Self {
        match self {
            Error::SingularPivot {
                pivot, magnitude, ..
            } => Error::SingularPivot {
                subdomain: Some(j),
                pivot,
                magnitude,
            },
            other => other,
        }
    }
}
