use thiserror::Error;

/// Everything that can go wrong across the crate.
///
/// The variants mirror the failure modes of the public operations: malformed
/// input documents, violated structural invariants, evaluation outside the
/// domain, integrals that provably fail to exist, and iteration budgets that
/// run out before a certificate is reached.
#[derive(Debug, Error)]
pub enum Error {
    /// The JSON document does not match the expected shape.
    #[error("schema error: {0}")]
    Schema(String),

    /// The document parses but violates a structural invariant.  `pointer`
    /// is a JSON-pointer-style path to the offending element.
    #[error("invariant violation at {pointer}: {message}")]
    Invariant { pointer: String, message: String },

    /// Evaluation point lies outside the function's domain.
    #[error("argument {value} outside domain [{a}, {b}]")]
    Domain { value: f64, a: f64, b: f64 },

    /// Pointwise products cannot carry infinite jump families.
    #[error("product with a jump series is not representable; materialize or drop the series first")]
    UnsupportedProduct,

    /// The Riemann-Stieltjes integral does not exist; `loc` is a witness
    /// point ( shared discontinuity or an accumulating jump family ).
    #[error("integral does not exist ({reason} at t = {loc})")]
    Nonexistent { loc: f64, reason: String },

    /// An operation that requires an increasing integrator got one whose
    /// downward movement exceeds tolerance.
    #[error("integrator is not increasing: downward movement {defect:.3e}")]
    NotIncreasing { defect: f64 },

    /// Neither endpoint ordering nor variation admits the requested pairing.
    #[error("unsupported integrand/integrator pairing: {0}")]
    UnsupportedPair(String),

    /// Work limit hit before the requested certificate was obtained.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// Conjugate-exponent inequalities need p > 1.
    #[error("exponent must exceed 1, got {0}")]
    BadExponent(f64),

    /// The averaging window must fit twice into the domain.
    #[error("averaging width {eps} too large for the domain (limit {limit})")]
    EpsTooLarge { eps: f64, limit: f64 },

    /// Total variation is flagged as infinite; the requested construction
    /// needs a finite value.
    #[error("total variation appears to be infinite")]
    InfiniteVariation,

    /// Coefficient functions do not satisfy the conditions required by the
    /// requested differential-equation construction.
    #[error("coefficient conditions violated: {0}")]
    ConditionViolation(String),

    /// A diagonal entry of the factorization vanished or changed sign.
    #[error("singular pivot in quasi-derivative factorization near t = {0}")]
    SingularPivot(f64),

    /// The adaptive integrator drove the step size below representable
    /// resolution without meeting the error target.
    #[error("step size underflow near t = {0}")]
    StepFailure(f64),

    /// File level problems when loading documents.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invariant(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant { pointer: pointer.into(), message: message.into() }
    }
}
