//! Critical couplings from truncated moment formulas: where the real
//! solutions of `numerator(m_w) = 0` in the generator appear or disappear.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{CriticalEstimate, Method};
use crate::error::{ScanError, SolveError};
use crate::exactalg::linalg::{isolate_real_roots, resultant, RootInterval, UniPoly};
use crate::exactalg::rational::to_f64;
use crate::exactalg::TruncSeries;
use crate::reduce::MomentTable;
use crate::words::CyclicWord;

/// Set the numerator of `m_w` to zero, follow the real generator root that
/// starts at the Gaussian value at `g = 0`, and report the discriminant root
/// at which that branch stops being real — on whichever side of zero that
/// happens first.
pub fn truncation_critical(table: &MomentTable, w: &CyclicWord) -> Result<CriticalEstimate, ScanError> {
    let f = table
        .get(w)
        .ok_or_else(|| SolveError::MissingMoment(w.clone()))?;
    let num = f.num();
    let gens: Vec<usize> = (1..num.nvars()).filter(|&i| num.depends_on(i)).collect();
    let x = match gens.as_slice() {
        [] => return Err(ScanError::NoGeneratorDependence(w.to_string())),
        [x] => *x,
        _ => return Err(ScanError::SeveralGenerators(w.to_string())),
    };
    let disc = resultant(num, &num.derivative(x), x);
    let disc = UniPoly::from_poly(&disc, 0).ok_or(ScanError::NoCriticalRoot)?;
    let width = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(15));
    let roots: Vec<RootInterval> = isolate_real_roots(&disc, &width)
        .into_iter()
        .filter(|r| !(r.is_exact() && r.lo.is_zero()))
        .collect();
    let branch = Branch::new(num, x)?;
    let mut best: Option<(f64, &RootInterval, f64)> = None;
    for dir in [-1.0, 1.0] {
        let Some(end) = branch.terminus(dir) else { continue };
        // Snap to the nearest isolated discriminant root on that side.
        let snapped = roots
            .iter()
            .filter(|r| to_f64(&r.midpoint()) * dir > 0.0)
            .map(|r| ((to_f64(&r.midpoint()) - end).abs(), r))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((err, r)) = snapped {
            if err < 1e-6 && best.as_ref().is_none_or(|(d, ..)| end.abs() < *d) {
                best = Some((end.abs(), r, branch.last_value(dir)));
            }
        }
    }
    let (_, r, value) = best.ok_or(ScanError::NoCriticalRoot)?;
    Ok(CriticalEstimate {
        g_c: Some(to_f64(&r.midpoint())),
        exact: r.is_exact().then(|| r.lo.clone()),
        method: Method::TruncationRoot,
        size: w.len(),
        trend: Vec::new(),
        note: format!("the branch through the Gaussian value ends at generator value {value:.6}"),
    })
}

/// Floating-point continuation of one real root of `N(g, x) = 0` in `x`.
struct Branch {
    /// `coeffs[k]` = coefficient of `x^k`, as a polynomial in `g`.
    coeffs: Vec<UniPoly>,
    x0: f64,
}

impl Branch {
    fn new(num: &crate::exactalg::Poly, x: usize) -> Result<Branch, ScanError> {
        let coeffs: Vec<UniPoly> = num
            .coeffs_in(x)
            .iter()
            .map(|c| UniPoly::from_poly(c, 0).ok_or(ScanError::NoCriticalRoot))
            .collect::<Result<_, _>>()?;
        // At g = 0 the equation fixes the Gaussian value.
        let at0 = UniPoly::new(coeffs.iter().map(|c| c.eval(&BigRational::zero())).collect());
        let roots = isolate_real_roots(&at0, &BigRational::new(BigInt::one(), BigInt::from(10u64).pow(15)));
        let x0 = match roots.as_slice() {
            [r] => to_f64(&r.midpoint()),
            _ => return Err(ScanError::NoCriticalRoot),
        };
        Ok(Branch { coeffs, x0 })
    }

    fn eval(&self, g: f64, x: f64) -> (f64, f64) {
        let (mut v, mut d) = (0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            d = d * x + v;
            v = v * x + c.eval_f64(g);
        }
        (v, d)
    }

    fn newton(&self, g: f64, mut x: f64) -> Option<f64> {
        for _ in 0..60 {
            let (v, d) = self.eval(g, x);
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            let step = v / d;
            x -= step;
            if step.abs() <= 1e-13 * (1.0 + x.abs()) {
                return Some(x);
            }
        }
        None
    }

    /// Follow the branch in direction `dir` up to `|g| = 1`; the coupling
    /// where it can no longer be continued, if any.
    fn terminus(&self, dir: f64) -> Option<f64> {
        self.walk(dir).0
    }

    fn last_value(&self, dir: f64) -> f64 {
        self.walk(dir).1
    }

    fn walk(&self, dir: f64) -> (Option<f64>, f64) {
        let mut g = 0.0f64;
        let mut x = self.x0;
        let mut h = 1e-4;
        while g.abs() < 1.0 {
            let gn = g + dir * h;
            match self.newton(gn, x) {
                Some(xn) if (xn - x).abs() < 0.05 * (1.0 + x.abs()) => {
                    g = gn;
                    x = xn;
                    h = (h * 1.5).min(1e-3);
                }
                _ => {
                    h /= 2.0;
                    if h < 1e-14 {
                        return (Some(g), x);
                    }
                }
            }
        }
        (None, x)
    }
}

/// Taylor series of `-2 g_c (√(1 − g/g_c) − 1)/g` to order `k`.
pub fn ansatz_series(gc: &BigRational, k: usize) -> TruncSeries {
    // √(1−u) = Σ binom(1/2, n)(−u)^n; the ansatz is −2 Σ_{n≥1} binom(1/2,n)(−1)^n u^{n−1}.
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut binom = BigRational::one();
    let mut coeffs = Vec::with_capacity(k + 1);
    let inv = gc.recip();
    let mut upow = BigRational::one();
    for n in 1..=k + 1 {
        binom = binom * (&half - BigRational::from_integer((n - 1).into()))
            / BigRational::from_integer(n.into());
        let sign = if n % 2 == 0 { BigRational::one() } else { -BigRational::one() };
        coeffs.push(BigRational::from_integer((-2).into()) * &binom * sign * &upow);
        upow *= &inv;
    }
    TruncSeries::new(coeffs)
}

/// Fit `g_c` of the square-root ansatz to the linear coefficient of a
/// second-moment series and report the first order where the two differ:
/// `(g_c, order, ansatz coefficient, series coefficient)`.
pub fn ansatz_mismatch(m2: &TruncSeries) -> Option<(BigRational, usize, BigRational, BigRational)> {
    let c1 = m2.coeff(1);
    if c1.is_zero() {
        return None;
    }
    let gc = (BigRational::from_integer(4.into()) * c1).recip();
    let a = ansatz_series(&gc, m2.order());
    (0..=m2.order())
        .find(|&k| a.coeff(k) != m2.coeff(k))
        .map(|k| (gc.clone(), k, a.coeff(k), m2.coeff(k)))
}
