use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("space must contain at least one point")]
    EmptySpace,

    #[error("weight at index {index} is {value}; weights must be strictly positive and finite")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("weights sum to {sum}, expected 1 within {tol}")]
    WeightSum { sum: f64, tol: f64 },

    #[error("mixed point representations: {first} at index 0, {other} at index {index}")]
    MixedRepresentation {
        first: &'static str,
        other: &'static str,
        index: usize,
    },

    #[error("semimetric for {expected} points cannot evaluate a {found} point")]
    RepresentationMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("weighted sum has {components} components but point has arity {arity}")]
    ArityMismatch { components: usize, arity: usize },

    #[error("labeling does not cover the point: {reason}")]
    PartialLabeling { reason: String },

    #[error("epsilon must be strictly positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("distance matrix is {n} points but {expected} were supplied")]
    MatrixSizeMismatch { n: usize, expected: usize },

    #[error("instance has {effective} atoms after collapsing, above the oracle limit {limit}")]
    OracleLimit { effective: usize, limit: usize },

    #[error("exact search exceeded its node budget on a component of {component} atoms")]
    SearchBudget { component: usize },

    #[error("orbit table depth {have} is below the requested depth {need}")]
    OrbitDepth { need: usize, have: usize },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("enumeration is only available for finite exact systems ({0})")]
    NotEnumerable(String),

    #[error("requested sample size {requested} exceeds the atom count {atoms} in enumerate mode")]
    EnumerationSize { requested: usize, atoms: usize },

    #[error("system has {atoms} atoms, above the enumeration limit {limit}")]
    AtomLimit { atoms: u128, limit: u128 },

    #[error("profile grids do not share an n grid: {left:?} vs {right:?}")]
    GridMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("epsilon grid must be strictly decreasing at position {index}: {prev} then {next}")]
    EpsilonOrder { index: usize, prev: f64, next: f64 },

    #[error("grid has no row for epsilon = {0}")]
    MissingEpsilonRow(f64),

    #[error("product bound requires epsilon in (0, 1), got {0}")]
    ProductBoundRange(f64),

    #[error("sequence must cover n = 1..={expected}, got length {got}")]
    SequenceLength { expected: usize, got: usize },

    #[error("hypothesis {name} fails at {location}: {detail}")]
    HypothesisViolated {
        name: &'static str,
        location: String,
        detail: String,
    },

    #[error("cache file rejected: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
