use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("nome modulus |p| = {0} is not below 1")]
    DivergedModulus(f64),

    #[error("product or sum did not reach tolerance within {0} terms")]
    TruncationExceeded(usize),

    #[error("argument must be nonzero")]
    ZeroArgument,

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("auxiliary variable makes the denominator vanish")]
    SingularAuxiliary,

    #[error("pole: factor {factor} vanishes at index n = {n}")]
    PoleHit { factor: String, n: i64 },

    #[error("|z| lies on the circle of convergence")]
    OnBoundary,

    #[error("evaluation point lies outside the radius of convergence")]
    OutsideRadius,

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("z lies on the branch cut of z^mu")]
    BranchCut,

    #[error("argument outside the domain |x| <= 1")]
    OutsideDomain,

    #[error("parameter {0} lies on the line (N + M tau) R")]
    OnLine(String),

    #[error("balancing condition violated (relative deviation {0:.3e})")]
    Unbalanced(f64),

    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("orbit point k = {k} is too close to a pole")]
    PoleProximity { k: u64 },

    #[error("continued fraction exhausted the available precision")]
    PrecisionExhausted,

    #[error("q^n coincides with a power of p")]
    LatticeDegenerate,

    #[error("series for the bound constant is undefined (sigma k is an integer)")]
    UndefinedSeries,

    #[error("infimum proxy is not positive")]
    NonPositiveInfimumProxy,
}
