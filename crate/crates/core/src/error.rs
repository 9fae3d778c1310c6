use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("component {index} is negative")]
    NegativeComponent { index: usize },

    #[error("all components are zero")]
    AllZero,

    #[error("a composition needs at least 2 parts, got {len}")]
    TooShort { len: usize },

    #[error("composition parts sum to {sum}, not 1")]
    NotClosed { sum: f64 },

    #[error("component {index} is not finite")]
    NonFinite { index: usize },

    #[error("alpha = {alpha} is not allowed for compositions containing zeros")]
    ZeroWithNonpositiveAlpha { alpha: f64 },

    #[error("theta = {theta} is not allowed for compositions containing zeros")]
    ZeroWithNonpositiveTheta { theta: f64 },

    #[error("alpha must be finite, got {0}")]
    NonFiniteAlpha(f64),

    #[error("vector is outside the image of the alpha-transformation (component {index} maps to {value})")]
    OutsideImage { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid contrast matrix: {0}")]
    InvalidBasis(String),

    #[error("distance between a[{row}] and b[{col}] failed: {source}")]
    PairFailed {
        row: usize,
        col: usize,
        source: Box<Error>,
    },

    #[error("group {group} has {size} training observations, at least 2 are needed")]
    GroupTooSmall { group: usize, size: usize },

    #[error("{name} = {value} is outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("covariance of group {group} is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { group: usize, condition: f64 },

    #[error("invalid prior vector: {0}")]
    InvalidPriors(String),

    #[error("k = {k} is invalid for {n} training points")]
    InvalidK { k: usize, n: usize },

    #[error("label {label} is out of range for {groups} groups")]
    LabelOutOfRange { label: usize, groups: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("test set of size {n_test} cannot represent {groups} groups")]
    TestTooSmall { n_test: usize, groups: usize },

    #[error("invalid cross-validation settings: {0}")]
    InvalidCv(String),

    #[error("{method} is ill-conditioned in replicate {replicate}: {source}")]
    IllConditionedAt {
        method: String,
        replicate: usize,
        source: Box<Error>,
    },

    #[error("grid has no admissible parameter combinations")]
    EmptyGrid,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("row {row}, column '{column}': negative component")]
    NegativeValue { row: usize, column: String },

    #[error("row {row}: all components are zero")]
    AllZeroRow { row: usize },

    #[error("missing column '{0}'")]
    MissingColumn(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by a singular or near-singular covariance.
    pub fn is_ill_conditioned(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. } | Error::IllConditionedAt { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
