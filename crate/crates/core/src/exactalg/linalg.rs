//! Determinants over polynomial rings, resultants, and exact real-root
//! isolation for univariate rational polynomials.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{Poly, Vars};

/// Fraction-free (Bareiss) determinant of a square polynomial matrix.
pub fn det_bareiss(m: &[Vec<Poly>], vars: &Vars) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one(vars);
    }
    let mut a: Vec<Vec<Poly>> = m.to_vec();
    let mut sign = false;
    let mut prev = Poly::one(vars);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = !sign;
                }
                None => return Poly::zero(vars),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.div_exact(&prev).expect("Bareiss step divides exactly");
            }
            a[i][k] = Poly::zero(vars);
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        d.neg()
    } else {
        d
    }
}

/// Resultant of `a` and `b` with respect to variable `i` (Sylvester
/// determinant). Zero iff they share a factor involving `x_i`, or both
/// leading coefficients vanish.
pub fn resultant(a: &Poly, b: &Poly, i: usize) -> Poly {
    let vars = a.vars().clone();
    let ca = a.coeffs_in(i);
    let cb = b.coeffs_in(i);
    let (da, db) = (ca.len() - 1, cb.len() - 1);
    if da == 0 {
        return a.pow(db as u32);
    }
    if db == 0 {
        return b.pow(da as u32);
    }
    let n = da + db;
    let mut s = vec![vec![Poly::zero(&vars); n]; n];
    for r in 0..db {
        for (k, c) in ca.iter().enumerate() {
            s[r][r + da - k] = c.clone();
        }
    }
    for r in 0..da {
        for (k, c) in cb.iter().enumerate() {
            s[db + r][r + db - k] = c.clone();
        }
    }
    det_bareiss(&s, &vars)
}

/// Dense univariate polynomial with rational coefficients, lowest degree
/// first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly(Vec<BigRational>);

impl UniPoly {
    pub fn new(mut c: Vec<BigRational>) -> UniPoly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UniPoly(c)
    }

    /// View a polynomial depending on variable `i` only.
    pub fn from_poly(p: &Poly, i: usize) -> Option<UniPoly> {
        if (0..p.nvars()).any(|j| j != i && p.depends_on(j)) {
            return None;
        }
        let c = p
            .coeffs_in(i)
            .iter()
            .map(|q| q.constant_value().unwrap_or_else(BigRational::zero))
            .collect();
        Some(UniPoly::new(c))
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + super::rational::to_f64(c))
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    fn lc(&self) -> &BigRational {
        self.0.last().expect("non-zero polynomial")
    }

    /// Quotient and remainder of Euclidean division.
    pub fn div_rem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (UniPoly::new(Vec::new()), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / d.lc();
            if !c.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (UniPoly::new(q), UniPoly::new(r))
    }

    fn monic(&self) -> UniPoly {
        let lc = self.lc().clone();
        UniPoly(self.0.iter().map(|c| c / &lc).collect())
    }

    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// The product of the distinct irreducible factors.
    pub fn squarefree(&self) -> UniPoly {
        let g = self.gcd(&self.derivative());
        if g.degree().unwrap_or(0) == 0 {
            self.clone()
        } else {
            self.div_rem(&g).0
        }
    }

    /// Bound on the absolute value of every real root.
    pub fn root_bound(&self) -> BigRational {
        let lc = self.lc().abs();
        let m = self.0[..self.0.len() - 1]
            .iter()
            .map(|c| c.abs() / &lc)
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
        m + BigRational::one()
    }
}

/// Sturm sequence of a polynomial.
pub fn sturm_sequence(p: &UniPoly) -> Vec<UniPoly> {
    let mut seq = vec![p.clone(), p.derivative()];
    loop {
        let n = seq.len();
        if seq[n - 1].is_zero() {
            seq.pop();
            break;
        }
        let r = seq[n - 2].div_rem(&seq[n - 1]).1;
        if r.is_zero() {
            break;
        }
        seq.push(UniPoly(r.0.iter().map(|c| -c).collect()));
    }
    seq
}

fn sign_changes(seq: &[UniPoly], x: &BigRational) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for p in seq {
        let v = p.eval(x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Number of distinct real roots in the half-open interval `(lo, hi]`.
pub fn count_roots_in(seq: &[UniPoly], lo: &BigRational, hi: &BigRational) -> usize {
    sign_changes(seq, lo).saturating_sub(sign_changes(seq, hi))
}

/// Number of distinct real roots.
pub fn real_root_count(p: &UniPoly) -> usize {
    match p.degree() {
        None | Some(0) => 0,
        Some(_) => {
            let b = p.root_bound();
            let seq = sturm_sequence(p);
            count_roots_in(&seq, &-b.clone(), &b)
        }
    }
}

/// An isolated real root: either exact or strictly inside `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }
}

/// Isolate every distinct real root into an interval narrower than `width`,
/// in increasing order. Rational roots are found exactly.
pub fn isolate_real_roots(p: &UniPoly, width: &BigRational) -> Vec<RootInterval> {
    let p = p.squarefree();
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let seq = sturm_sequence(&p);
    let b = p.root_bound();
    let two = BigRational::from_integer(2.into());
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((lo, hi)) = stack.pop() {
        let n = count_roots_in(&seq, &lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 {
            if p.eval(&hi).is_zero() {
                out.push(RootInterval { lo: hi.clone(), hi });
                continue;
            }
            out.push(refine(&p, lo, hi, width));
            continue;
        }
        let mid = (&lo + &hi) / &two;
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

/// Narrow a single-root interval `(lo, hi]` by bisection, snapping to the
/// simplest rational inside whenever it is an exact root.
fn refine(p: &UniPoly, mut lo: BigRational, mut hi: BigRational, width: &BigRational) -> RootInterval {
    let two = BigRational::from_integer(2.into());
    let s_hi = p.eval(&hi).signum();
    for _ in 0..4096 {
        let q = simplest_between(&lo, &hi);
        if q > lo && p.eval(&q).is_zero() {
            return RootInterval { lo: q.clone(), hi: q };
        }
        if &hi - &lo < *width {
            break;
        }
        let mid = (&lo + &hi) / &two;
        let vm = p.eval(&mid);
        if vm.is_zero() {
            return RootInterval { lo: mid.clone(), hi: mid };
        }
        if vm.signum() == s_hi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    RootInterval { lo, hi }
}

/// The rational with the smallest denominator (then numerator) in the
/// closed interval `[lo, hi]`.
pub fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    if !lo.is_positive() && !hi.is_negative() {
        return BigRational::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi.clone(), &-lo.clone());
    }
    let f = lo.floor();
    if &f == lo {
        return lo.clone();
    }
    let f1 = &f + BigRational::one();
    if &f1 <= hi {
        return f1;
    }
    let inner = simplest_between(&(hi - &f).recip(), &(lo - &f).recip());
    f + inner.recip()
}

/// Least common multiple of the coefficient denominators.
pub fn denominator_lcm(coeffs: impl IntoIterator<Item = BigRational>) -> BigInt {
    coeffs
        .into_iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::parse_poly;
    use crate::exactalg::poly::vars;
    use crate::exactalg::rational::{int, rat};

    fn up(c: &[i64]) -> UniPoly {
        UniPoly::new(c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn bareiss_matches_expansion() {
        let v = vars(&["x", "y"]);
        let p = |s: &str| parse_poly(s, &v).unwrap();
        let m = vec![
            vec![p("x"), p("1"), p("0")],
            vec![p("y"), p("x"), p("1")],
            vec![p("0"), p("y"), p("x")],
        ];
        assert_eq!(det_bareiss(&m, &v), p("x^3 - 2*x*y"));
        let z = vec![vec![p("0"), p("1")], vec![p("1"), p("0")]];
        assert_eq!(det_bareiss(&z, &v), p("-1"));
    }

    #[test]
    fn discriminant_by_resultant() {
        let v = vars(&["g", "m"]);
        let f = parse_poly("-4*g*m^2 - m + 1", &v).unwrap();
        let r = resultant(&f, &f.derivative(1), 1);
        // Res(f, f') = -a · disc for a quadratic with leading coefficient a.
        assert_eq!(r, parse_poly("4*g*(1 + 16*g)", &v).unwrap());
    }

    #[test]
    fn roots_isolated_and_snapped() {
        let p = up(&[-2, 0, 1]).mul_linear(&rat(1, 16));
        let roots = isolate_real_roots(&p, &rat(1, 1_000_000));
        assert_eq!(roots.len(), 3);
        assert!(roots[1].is_exact() && roots[1].lo == rat(-1, 16));
        assert!(&roots[2].lo * &roots[2].lo < int(2));
        assert_eq!(real_root_count(&up(&[1, 0, 1])), 0);
    }

    #[test]
    fn simplest() {
        assert_eq!(simplest_between(&rat(3, 10), &rat(4, 10)), rat(1, 3));
        assert_eq!(simplest_between(&rat(-7, 10), &rat(-6, 10)), rat(-2, 3));
        assert_eq!(simplest_between(&rat(-1, 10), &rat(1, 10)), int(0));
        assert_eq!(simplest_between(&int(2), &int(2)), int(2));
    }

    impl UniPoly {
        /// `self · (x + a)`.
        fn mul_linear(&self, a: &BigRational) -> UniPoly {
            let mut c = vec![BigRational::zero(); self.0.len() + 1];
            for (k, x) in self.0.iter().enumerate() {
                c[k + 1] += x;
                c[k] += x * a;
            }
            UniPoly::new(c)
        }
    }
}
