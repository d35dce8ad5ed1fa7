//! Rational functions: reduced quotients of polynomials over a shared
//! variable list.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::AlgebraError;

use super::poly::{same_vars, Poly, Vars};

/// `num / den` with `gcd(num, den)` constant, integer coefficients whose
/// combined content is 1, and a positive leading coefficient on `den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

/// Reduce `num / den` to canonical form.
pub fn ratfunc_normalize(num: Poly, den: Poly) -> Result<RatFunc, AlgebraError> {
    RatFunc::new(num, den)
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::ZeroDenominator);
        }
        if !same_vars(num.vars(), den.vars()) {
            return Err(AlgebraError::VariableMismatch {
                left: num.vars().to_vec(),
                right: den.vars().to_vec(),
            });
        }
        Ok(RatFunc::reduce(num, den))
    }

    /// Assumes `den != 0` and equal variable lists.
    fn reduce(num: Poly, den: Poly) -> RatFunc {
        if num.is_zero() {
            return RatFunc::zero(num.vars());
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = num.gcd(&den);
            if g.is_constant() {
                (num, den)
            } else {
                (
                    num.div_exact(&g).expect("gcd divides numerator"),
                    den.div_exact(&g).expect("gcd divides denominator"),
                )
            }
        };
        RatFunc::rescale(num, den)
    }

    /// Normalise scalar factors only (numerator and denominator coprime).
    fn rescale(num: Poly, den: Poly) -> RatFunc {
        let (cn, pn) = num.integer_primitive();
        let (cd, pd) = den.integer_primitive();
        let r = cn / cd;
        let a = BigRational::from_integer(r.numer().clone());
        let b = BigRational::from_integer(r.denom().clone());
        RatFunc {
            num: pn.scale(&a),
            den: pd.scale(&b),
        }
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        let den = Poly::one(p.vars());
        RatFunc::rescale(p, den)
    }

    pub fn zero(vars: &Vars) -> RatFunc {
        RatFunc {
            num: Poly::zero(vars),
            den: Poly::one(vars),
        }
    }

    pub fn one(vars: &Vars) -> RatFunc {
        RatFunc::constant(vars, BigRational::one())
    }

    pub fn constant(vars: &Vars, c: BigRational) -> RatFunc {
        RatFunc::from_poly(Poly::constant(vars, c))
    }

    pub fn var(vars: &Vars, i: usize) -> RatFunc {
        RatFunc::from_poly(Poly::var(vars, i))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn vars(&self) -> &Vars {
        self.num.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        Some(self.num.constant_value()? / self.den.constant_value()?)
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.num.depends_on(i) || self.den.depends_on(i)
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den == other.den {
            return RatFunc::reduce(self.num.add(&other.num), self.den.clone());
        }
        if self.den.is_constant() && other.den.is_constant() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            return RatFunc::rescale(num, self.den.mul(&other.den));
        }
        let g = self.den.gcd(&other.den);
        let a = self.den.div_exact(&g).expect("gcd divides");
        let b = other.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&b).add(&other.num.mul(&a));
        RatFunc::reduce(num, a.mul(&other.den))
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return RatFunc::zero(self.vars());
        }
        let (a, d) = cancel(&self.num, &other.den);
        let (c, b) = cancel(&other.num, &self.den);
        RatFunc::rescale(a.mul(&c), b.mul(&d))
    }

    pub fn scale(&self, k: &BigRational) -> RatFunc {
        if k.is_zero() {
            return RatFunc::zero(self.vars());
        }
        RatFunc::rescale(self.num.scale(k), self.den.clone())
    }

    pub fn mul_poly(&self, p: &Poly) -> RatFunc {
        self.mul(&RatFunc::from_poly(p.clone()))
    }

    pub fn recip(&self) -> Result<RatFunc, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::ZeroDenominator);
        }
        Ok(RatFunc::rescale(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc, AlgebraError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        RatFunc::rescale(self.num.pow(e), self.den.pow(e))
    }

    /// Exact value at a full point.
    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational, AlgebraError> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return Err(AlgebraError::DenominatorZero);
        }
        Ok(self.num.eval(point) / d)
    }

    /// Fix variable `i` to `value`, keeping the variable list.
    pub fn specialize(&self, i: usize, value: &BigRational) -> Result<RatFunc, AlgebraError> {
        let den = self.den.specialize(i, value);
        if den.is_zero() {
            return Err(AlgebraError::DenominatorZero);
        }
        RatFunc::new(self.num.specialize(i, value), den)
    }

    /// Substitute rational functions (over `target`) for every variable.
    pub fn compose(&self, images: &[RatFunc], target: &Vars) -> Result<RatFunc, AlgebraError> {
        let eval_poly = |p: &Poly| -> RatFunc {
            let mut out = RatFunc::zero(target);
            for (m, c) in p.terms() {
                let mut t = RatFunc::constant(target, c.clone());
                for (i, &e) in m.exps().iter().enumerate() {
                    if e > 0 {
                        t = t.mul(&images[i].pow(e));
                    }
                }
                out = out.add(&t);
            }
            out
        };
        eval_poly(&self.num).div(&eval_poly(&self.den))
    }

    /// Partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> RatFunc {
        let num = self
            .num
            .derivative(i)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative(i)));
        RatFunc::reduce(num, self.den.mul(&self.den))
    }

    /// Re-express over another variable list containing every used symbol.
    pub fn embed(&self, target: &Vars) -> Result<RatFunc, AlgebraError> {
        Ok(RatFunc {
            num: self.num.embed(target)?,
            den: self.den.embed(target)?,
        })
    }

    /// Is the (canonical) denominator a positive constant times a power of
    /// the variable `i`?
    pub fn den_is_power_of(&self, i: usize) -> bool {
        self.den.is_monomial()
            && self
                .den
                .leading()
                .map(|(m, _)| m.exps().iter().enumerate().all(|(j, &e)| j == i || e == 0))
                .unwrap_or(false)
    }

    /// Sign of the constant leading coefficient of the numerator (used for
    /// quick sanity checks).
    pub fn num_leading_sign(&self) -> i32 {
        let c = self.num.leading_coeff();
        if c.is_positive() {
            1
        } else if c.is_negative() {
            -1
        } else {
            0
        }
    }
}

/// Remove the common factor of `a` and `b`.
fn cancel(a: &Poly, b: &Poly) -> (Poly, Poly) {
    if b.is_constant() || a.is_constant() {
        return (a.clone(), b.clone());
    }
    let g = a.gcd(b);
    if g.is_constant() {
        (a.clone(), b.clone())
    } else {
        (
            a.div_exact(&g).expect("gcd divides"),
            b.div_exact(&g).expect("gcd divides"),
        )
    }
}

/// Exact value of `f` at a point given per variable.
pub fn eval_rational(f: &RatFunc, point: &[BigRational]) -> Result<BigRational, AlgebraError> {
    f.eval(point)
}

impl fmt::Display for RatFunc {
    /// `num` when the denominator is 1, otherwise `(num)/(den)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
