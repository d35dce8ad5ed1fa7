//! Closed-form planar solution of the one-matrix quartic model
//! `V = ½A² + (g/4)A⁴`.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ScanError;
use crate::exactalg::rational::to_f64;
use crate::exactalg::TruncSeries;

/// Critical coupling `-1/12`.
pub const QUARTIC_GC: f64 = -1.0 / 12.0;

/// Moments and free-energy derivatives at one coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarticPoint {
    /// Squared half-width of the eigenvalue support over 4: `3g a² + a = 1`.
    pub a: f64,
    pub m2: f64,
    pub m4: f64,
    /// `dF₀/dg = −m₄/4`.
    pub dfdg: f64,
    /// `d²F₀/dg²`.
    pub d2fdg2: f64,
}

/// Evaluate the closed form at `g ≥ -1/12`.
pub fn quartic_analytic(g: &BigRational) -> Result<QuarticPoint, ScanError> {
    let twelve = BigRational::from_integer(12.into());
    let disc = BigRational::one() + &twelve * g;
    if disc < BigRational::zero() {
        return Err(ScanError::BelowCritical(to_f64(g)));
    }
    Ok(quartic_at(to_f64(g)))
}

/// Same, in floating point (callers guarantee `g ≥ -1/12`).
pub fn quartic_at(g: f64) -> QuarticPoint {
    // a = (√(1+12g) − 1)/(6g), written without cancellation.
    let s = (1.0 + 12.0 * g).max(0.0).sqrt();
    let a = 2.0 / (1.0 + s);
    let m2 = (4.0 * a - a * a) / 3.0;
    let m4 = a * a * (3.0 - a);
    // Implicit differentiation of 3g a² + a = 1 gives a' = −3a³/(2 − a), and
    // m₄' = 3a(2 − a)·a' = −9a⁴: finite at the critical point.
    let dm4 = -9.0 * a.powi(4);
    QuarticPoint {
        a,
        m2,
        m4,
        dfdg: -m4 / 4.0,
        d2fdg2: -dm4 / 4.0,
    }
}

/// Exact Taylor series of `m₂ = (4a − a²)/3` to order `k`, from the
/// fixed point `a = 1 − 3g a²`.
pub fn quartic_m2_series(k: usize) -> TruncSeries {
    let mut a = TruncSeries::constant(BigRational::one(), k);
    let three = BigRational::from_integer(3.into());
    for _ in 0..=k {
        let next = TruncSeries::constant(BigRational::one(), k)
            .sub(&a.mul(&a).shift_up(1).truncate(k).scale(&three));
        a = next;
    }
    let four = BigRational::from_integer(4.into());
    a.scale(&four).sub(&a.mul(&a)).scale(&three.recip())
}
