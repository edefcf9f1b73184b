use thiserror::Error;

/// Errors raised by the bench. Every variant corresponds to a violated
/// precondition; numerical noise inside the declared tolerances never errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate state: amplitude vector has zero norm")]
    DegenerateState,

    #[error("expected a vector (pure) state, got a density matrix")]
    ExpectedVectorState,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |M - M^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not a projector (max |P^2 - P| = {deviation:.3e})")]
    NotProjector { deviation: f64 },

    #[error("operator is not unitary (max |U^dagger U - 1| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("invalid effect: eigenvalue {eigenvalue:.3e} outside [0, 1]")]
    InvalidEffect { eigenvalue: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("degenerate conditioning: conditioning projector has zero trace")]
    DegenerateConditioning,

    #[error("probability {value:.6e} outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange { value: f64 },

    #[error("incomplete projector family: {0}")]
    IncompleteFamily(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("times must be strictly increasing: {0}")]
    TimeOrdering(String),

    #[error("composite dimension {required} exceeds the cap {cap}; raise the cap to at least {required}")]
    DimensionCap { required: usize, cap: usize },

    #[error("vector is not a unit vector (norm {norm:.15})")]
    NonUnitVector { norm: f64 },

    #[error("directions {0}, {1}, {2} are linearly dependent")]
    NotTriplewiseIndependent(usize, usize, usize),

    #[error("observable has a degenerate spectrum near eigenvalue {eigenvalue}; refine the outcome basis")]
    DegenerateSpectrum { eigenvalue: f64 },

    #[error("lattice too small: eigenvector tail mass {tail_mass:.3e} exceeds {limit:.1e}")]
    LatticeTooSmall { tail_mass: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
