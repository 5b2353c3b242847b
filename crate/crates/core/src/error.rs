use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree {degree} exceeds the available bound {bound}")]
    DegreeOverflow { degree: u32, bound: u32 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("inconsistent problem data: {0}")]
    InconsistentDimensions(String),

    #[error("{count} generators exceed the preordering guard of {limit}")]
    TooManyGenerators { count: usize, limit: usize },

    #[error("polynomial of odd degree {0} cannot be a sum of squares")]
    OddDegree(u32),

    #[error("the zero polynomial has no Gram system")]
    ZeroPolynomial,

    #[error("moment data is not flat: rank {rank_n} at order n, rank {rank_n1} at order n+1")]
    NotFlat { rank_n: usize, rank_n1: usize },

    #[error("column-space reduction is unstable: residual {residual:e} exceeds {tol:e}")]
    RankDeficiencyInstability { residual: f64, tol: f64 },

    #[error("random combination of multiplication operators has clustered eigenvalues after {attempts} attempts")]
    DegenerateCombination { attempts: usize },

    #[error("Vandermonde system for weight recovery is ill conditioned (smallest pivot ratio {ratio:e})")]
    IllConditionedVandermonde { ratio: f64 },

    #[error("polynomial takes the negative value {value:e} at x = {point}")]
    NotNonnegative { point: f64, value: f64 },

    #[error("even moment s_{index} = {value:e} is not positive")]
    NonpositiveMoment { index: usize, value: f64 },

    #[error("atom {index} at {point:?} lies outside K (generator {generator} evaluates to {value:e})")]
    AtomOutsideK {
        index: usize,
        point: Vec<f64>,
        generator: usize,
        value: f64,
    },

    #[error("sequence of degree {available} is too short, degree {required} required")]
    InsufficientDegree { required: u32, available: u32 },

    #[error("selector {selector:?} has more than one active generator in a module certificate")]
    MalformedSelector { selector: Vec<u8> },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid input: {0}")]
    Parse(String),

    #[error("numerical result misses tolerance: error {error:e} > {tol:e}")]
    ToleranceExceeded { error: f64, tol: f64 },
}
