//! Large-N Schwinger-Dyson equations, exact moment reduction and Hankel
//! positivity bootstrap for Hermitian multi-matrix models.
//!
//! The pipeline: a [`model::ModelSpec`] declares the potential, symmetries
//! and generator moments; [`sde`] derives the loop equations; [`reduce`]
//! solves them for every moment as a rational function of the coupling `g`
//! and the generators; [`hankel`] and [`scan`] turn those into exact
//! positivity verdicts over parameter grids; [`series`] expands everything
//! at `g = 0`; [`maps`] counts polygon gluings as an independent check.

pub mod error;
pub mod exactalg;
pub mod hankel;
pub mod maps;
pub mod model;
pub mod par;
pub mod reduce;
pub mod scan;
pub mod sde;
pub mod series;
pub mod words;

pub use error::{
    AlgebraError, HankelError, MapsError, ModelError, ParseError, ScanError, SeriesError,
    SolveError,
};
pub use exactalg::{BigRational, Poly, RatFunc, TruncSeries};
pub use model::ModelSpec;
pub use par::Execution;
pub use words::{CyclicWord, Word};
