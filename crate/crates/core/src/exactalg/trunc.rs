//! Truncated power series in `g` with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::AlgebraError;

use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::rational::format_rational;

/// `c_0 + c_1 g + … + c_K g^K + O(g^{K+1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries {
    coeffs: Vec<BigRational>,
}

impl TruncSeries {
    /// Coefficients `c_0..=c_K`; the order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<BigRational>) -> TruncSeries {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        TruncSeries { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> TruncSeries {
        TruncSeries::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn zero(order: usize) -> TruncSeries {
        TruncSeries::new(vec![BigRational::zero(); order + 1])
    }

    pub fn constant(c: BigRational, order: usize) -> TruncSeries {
        let mut s = TruncSeries::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The series of `g` itself.
    pub fn g(order: usize) -> TruncSeries {
        let mut s = TruncSeries::zero(order);
        if order >= 1 {
            s.coeffs[1] = BigRational::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Drop coefficients above `order` (or pad with zeros – only valid when
    /// the caller knows the higher coefficients vanish).
    pub fn truncate(&self, order: usize) -> TruncSeries {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, BigRational::zero());
        TruncSeries::new(c)
    }

    /// Index of the first nonzero coefficient, `None` if all vanish.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        let k = self.order().min(other.order());
        TruncSeries::new((0..=k).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect())
    }

    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        let k = self.order().min(other.order());
        TruncSeries::new((0..=k).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect())
    }

    pub fn neg(&self) -> TruncSeries {
        TruncSeries::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, k: &BigRational) -> TruncSeries {
        TruncSeries::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        let k = self.order().min(other.order());
        let mut out = vec![BigRational::zero(); k + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(k + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(k + 1 - i) {
                out[i + j] += a * b;
            }
        }
        TruncSeries::new(out)
    }

    pub fn pow(&self, e: u32) -> TruncSeries {
        let mut out = TruncSeries::constant(BigRational::one(), self.order());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Multiply by `g^s`; the order grows by `s`.
    pub fn shift_up(&self, s: usize) -> TruncSeries {
        let mut c = vec![BigRational::zero(); s];
        c.extend(self.coeffs.iter().cloned());
        TruncSeries::new(c)
    }

    /// Quotient by a series, stripping common powers of `g` first. The
    /// result's order is `min(order(self), order(den)) - valuation(den)`.
    pub fn div(&self, den: &TruncSeries) -> Result<TruncSeries, AlgebraError> {
        let k = self.order().min(den.order());
        let d = match den.truncate(k).valuation() {
            Some(d) => d,
            None => {
                return Err(AlgebraError::PoleAtZero {
                    num_order: self.valuation().unwrap_or(k + 1),
                    den_order: k + 1,
                })
            }
        };
        let n = self.truncate(k).valuation().unwrap_or(k + 1);
        if n < d {
            return Err(AlgebraError::PoleAtZero {
                num_order: n,
                den_order: d,
            });
        }
        let out_order = k - d;
        let a: Vec<_> = (0..=out_order).map(|i| self.coeff(i + d)).collect();
        let b: Vec<_> = (0..=out_order).map(|i| den.coeff(i + d)).collect();
        let inv_b0 = b[0].recip();
        let mut q = vec![BigRational::zero(); out_order + 1];
        for i in 0..=out_order {
            let mut acc = a[i].clone();
            for j in 1..=i {
                acc -= &b[j] * &q[i - j];
            }
            q[i] = acc * &inv_b0;
        }
        Ok(TruncSeries::new(q))
    }

    /// Antiderivative with zero constant term; the order grows by one.
    pub fn integrate(&self) -> TruncSeries {
        let mut c = vec![BigRational::zero()];
        for (k, a) in self.coeffs.iter().enumerate() {
            c.push(a / BigRational::from_integer((k as i64 + 1).into()));
        }
        TruncSeries::new(c)
    }

    pub fn derivative(&self) -> TruncSeries {
        if self.order() == 0 {
            return TruncSeries::zero(0);
        }
        TruncSeries::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * BigRational::from_integer((k as i64).into()))
                .collect(),
        )
    }

    /// Value of the truncated polynomial at `g`.
    pub fn eval(&self, g: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * g + c;
        }
        acc
    }

    pub fn eval_f64(&self, g: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * g + super::rational::to_f64(c))
    }
}

impl fmt::Display for TruncSeries {
    /// `1 - 4*g + 36*g^2` (zero coefficients omitted, `0` if all vanish).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let var = match k {
                0 => String::new(),
                1 => "g".to_string(),
                _ => format!("g^{k}"),
            };
            if k == 0 {
                f.write_str(&format_rational(&mag))?;
            } else if mag.is_one() {
                f.write_str(&var)?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), var)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Serialize for TruncSeries {
    /// A JSON array of rational strings.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coeffs.iter().map(format_rational).collect();
        v.serialize(s)
    }
}

/// Evaluate a polynomial whose variables are replaced by series. The
/// variable named `"g"` maps to the series of `g` unless overridden.
fn poly_at_series(
    p: &Poly,
    subst: &BTreeMap<String, TruncSeries>,
    order: usize,
) -> Result<TruncSeries, AlgebraError> {
    let images: Vec<TruncSeries> = p
        .vars()
        .iter()
        .enumerate()
        .map(|(i, name)| match subst.get(name) {
            Some(s) => Ok(s.truncate(order.min(s.order()))),
            None if name == "g" => Ok(TruncSeries::g(order)),
            None if !p.depends_on(i) => Ok(TruncSeries::zero(order)),
            None => Err(AlgebraError::MissingSeries(name.clone())),
        })
        .collect::<Result<_, _>>()?;
    let mut cache: Vec<Vec<TruncSeries>> = images
        .iter()
        .map(|s| vec![TruncSeries::constant(BigRational::one(), s.order())])
        .collect();
    let mut total = TruncSeries::zero(order);
    for (m, c) in p.terms() {
        let mut t = TruncSeries::constant(c.clone(), order);
        for (i, &e) in m.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            while cache[i].len() <= e as usize {
                let next = cache[i].last().unwrap().mul(&images[i]);
                cache[i].push(next);
            }
            t = t.mul(&cache[i][e as usize]);
        }
        total = total.add(&t);
    }
    Ok(total)
}

/// Substitute generator series into a rational function and expand in `g`
/// up to order `k`.
///
/// Numerator and denominator are expanded at the precision of the supplied
/// series; the denominator's power of `g` is cancelled against the
/// numerator's. The result has order `min(k, precision - valuation(den))`.
pub fn series_compose(
    f: &RatFunc,
    subst: &BTreeMap<String, TruncSeries>,
    k: usize,
) -> Result<TruncSeries, AlgebraError> {
    let used: Vec<usize> = (0..f.vars().len())
        .filter(|&i| f.depends_on(i) && f.vars()[i] != "g")
        .collect();
    let mut precision = usize::MAX;
    for &i in &used {
        let name = &f.vars()[i];
        let s = subst
            .get(name)
            .ok_or_else(|| AlgebraError::MissingSeries(name.clone()))?;
        precision = precision.min(s.order());
    }
    let g_index = f.vars().iter().position(|v| v == "g");
    if precision == usize::MAX {
        // Only g occurs: expand exactly with enough room for the pole.
        let extra = g_index.map(|i| f.den().min_degree_in(i) as usize).unwrap_or(0);
        precision = k + extra;
    }
    let num = poly_at_series(f.num(), subst, precision)?;
    let den = poly_at_series(f.den(), subst, precision)?;
    let q = num.div(&den)?;
    Ok(if q.order() > k { q.truncate(k) } else { q })
}
