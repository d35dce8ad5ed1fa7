//! Exact arithmetic: rationals, multivariate polynomials, rational functions
//! and truncated power series.

pub mod linalg;
pub mod parse;
pub mod poly;
pub mod ratfunc;
pub mod rational;
pub mod trunc;

pub use num_rational::BigRational;
pub use linalg::{det_bareiss, resultant, UniPoly};
pub use parse::{parse_poly, parse_ratfunc};
pub use poly::{poly_arith, vars, Mono, Poly, PolyOp, Vars};
pub use ratfunc::{eval_rational, ratfunc_normalize, RatFunc};
pub use rational::{format_rational, parse_rational};
pub use trunc::{series_compose, TruncSeries};
