use thiserror::Error;

use crate::words::CyclicWord;

/// Malformed text: words, rationals, polynomials, model documents.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error: {message}")]
pub struct ParseError {
    pub message: String,
}

impl ParseError {
    pub fn new(message: impl Into<String>) -> Self {
        ParseError {
            message: message.into(),
        }
    }
}

/// Failures of the exact-arithmetic layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("variable lists differ: {left:?} vs {right:?}")]
    VariableMismatch { left: Vec<String>, right: Vec<String> },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("denominator vanishes at the evaluation point")]
    DenominatorZero,
    #[error("pole at g = 0 survives: numerator order {num_order} < denominator order {den_order}")]
    PoleAtZero { num_order: usize, den_order: usize },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("no series supplied for symbol {0:?}")]
    MissingSeries(String),
}

/// Model documents that parse but do not describe a valid model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("letter {letter} out of range for a {matrices}-matrix model (in {context})")]
    LetterOutOfRange {
        letter: char,
        matrices: usize,
        context: String,
    },
    #[error("potential term {word} has length {len}; terms must have length at least 3")]
    TermTooShort { word: String, len: usize },
    #[error("potential term {0} has zero coefficient")]
    ZeroCoefficient(String),
    #[error("generator {0} declared twice")]
    DuplicateGenerator(String),
    #[error("symmetry rule {rule} does not preserve the potential: {detail}")]
    NotAnAutomorphism { rule: String, detail: String },
    #[error("invalid symmetry rule: {0}")]
    InvalidRule(String),
}

/// Failures while solving the Schwinger-Dyson system.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("inconsistent system: equation reduces to {residual} = 0")]
    InconsistentSystem { residual: String },
    #[error("cutoff {cutoff} is below the longest generator length {needed}")]
    CutoffTooSmall { cutoff: usize, needed: usize },
    #[error("quadratic obstruction: {word} only appears non-linearly, e.g. in {equation}")]
    QuadraticObstruction { word: String, equation: String },
    #[error("moment {0} is not available in the table")]
    MissingMoment(CyclicWord),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Failures of the order-by-order series solver.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("order {order}: moment {word} needs words longer than the tracking limit {limit}")]
    UnderdeterminedAtOrder {
        order: usize,
        word: String,
        limit: usize,
    },
    #[error("moment {0} is not tracked")]
    MissingMoment(CyclicWord),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Hankel assembly and positivity errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HankelError {
    #[error("moment {0} missing from the table (raise the cutoff)")]
    MissingMoment(CyclicWord),
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("row index {index} out of range for a {size}x{size} matrix")]
    RowOutOfRange { index: usize, size: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Scan, critical-point and fitting errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScanError {
    #[error("feasible sets are not nested: cell {cell} feasible at n = {larger} but not at n = {smaller}")]
    NonNested {
        cell: String,
        smaller: usize,
        larger: usize,
    },
    #[error("grids do not share the same axes")]
    AxisMismatch,
    #[error("coupling {0} is below the critical point of the quartic model")]
    BelowCritical(f64),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("input is not monotone in g")]
    NonMonotone,
    #[error("numerator of m_{0} does not depend on the generator")]
    NoGeneratorDependence(String),
    #[error("numerator of m_{0} involves more than one generator")]
    SeveralGenerators(String),
    #[error("the discriminant has no real root where the number of real solutions changes")]
    NoCriticalRoot,
    #[error(transparent)]
    Hankel(#[from] HankelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Map enumeration errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapsError {
    #[error("polygon {0} has an odd number of edges")]
    OddLength(String),
    #[error("gluing needs {edges} edges; the enumeration cap is {cap}")]
    ResourceCap { edges: usize, cap: usize },
}
