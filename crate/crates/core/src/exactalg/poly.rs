//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors under graded
//! lexicographic order, so the last entry is always the leading term.
//! Every polynomial carries its (shared) variable list; arithmetic between
//! polynomials over different lists is a programming error and panics in
//! the operator impls, while [`poly_arith`] reports it as an error.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::error::AlgebraError;

use super::rational::format_rational;

/// Shared, ordered list of variable names.
pub type Vars = Arc<[String]>;

/// Build a variable list from names.
pub fn vars<S: AsRef<str>>(names: &[S]) -> Vars {
    names.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().into()
}

/// Exponent vector. Ordered graded-lexicographically: total degree first,
/// then lexicographically with the first variable most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub(crate) SmallVec<[u32; 4]>);

impl Mono {
    pub fn one(n: usize) -> Mono {
        Mono(SmallVec::from_elem(0, n))
    }

    pub fn var(n: usize, i: usize, e: u32) -> Mono {
        let mut m = Mono::one(n);
        m.0[i] = e;
        m
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = SmallVec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(Mono(out))
    }

    pub fn min(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

/// Which ring operation [`poly_arith`] performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

/// A polynomial in `vars` with rational coefficients; zero coefficients are
/// never stored.
#[derive(Clone, Debug)]
pub struct Poly {
    vars: Vars,
    terms: BTreeMap<Mono, BigRational>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        same_vars(&self.vars, &other.vars) && self.terms == other.terms
    }
}

impl Eq for Poly {}

pub(crate) fn same_vars(a: &Vars, b: &Vars) -> bool {
    Arc::ptr_eq(a, b) || a[..] == b[..]
}

fn check_vars(a: &Vars, b: &Vars) -> Result<(), AlgebraError> {
    if same_vars(a, b) {
        Ok(())
    } else {
        Err(AlgebraError::VariableMismatch {
            left: a.to_vec(),
            right: b.to_vec(),
        })
    }
}

/// Exact `a op b`; fails when the variable lists differ.
pub fn poly_arith(a: &Poly, b: &Poly, op: PolyOp) -> Result<Poly, AlgebraError> {
    check_vars(&a.vars, &b.vars)?;
    Ok(match op {
        PolyOp::Add => a.add(b),
        PolyOp::Sub => a.sub(b),
        PolyOp::Mul => a.mul(b),
    })
}

impl Poly {
    pub fn zero(vars: &Vars) -> Poly {
        Poly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(vars: &Vars) -> Poly {
        Poly::constant(vars, BigRational::one())
    }

    pub fn constant(vars: &Vars, c: BigRational) -> Poly {
        Poly::monomial(vars, Mono::one(vars.len()), c)
    }

    pub fn from_int(vars: &Vars, c: i64) -> Poly {
        Poly::constant(vars, BigRational::from_integer(c.into()))
    }

    /// The variable with index `i`.
    pub fn var(vars: &Vars, i: usize) -> Poly {
        assert!(i < vars.len(), "variable index out of range");
        Poly::monomial(vars, Mono::var(vars.len(), i, 1), BigRational::one())
    }

    /// The variable called `name`, if present.
    pub fn var_named(vars: &Vars, name: &str) -> Option<Poly> {
        vars.iter().position(|v| v == name).map(|i| Poly::var(vars, i))
    }

    pub fn monomial(vars: &Vars, m: Mono, c: BigRational) -> Poly {
        assert_eq!(m.0.len(), vars.len(), "exponent arity mismatch");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly {
            vars: vars.clone(),
            terms,
        }
    }

    pub fn from_terms(vars: &Vars, terms: impl IntoIterator<Item = (Mono, BigRational)>) -> Poly {
        let mut p = Poly::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.0.len(), vars.len(), "exponent arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        match self.terms.len() {
            0 => true,
            1 => self.terms.keys().next().unwrap().is_one(),
            _ => false,
        }
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// The value of a constant polynomial.
    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_zero() {
            Some(BigRational::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    /// Coefficient of the monomial `m` (zero if absent).
    pub fn coeff(&self, m: &Mono) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Largest term under graded-lex order.
    pub fn leading(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    /// Smallest exponent of variable `i` over all terms (0 for zero).
    pub fn min_degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).min().unwrap_or(0)
    }

    /// Does variable `i` occur?
    pub fn depends_on(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.0[i] > 0)
    }

    fn add_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert!(same_vars(&self.vars, &other.vars), "variable lists differ");
        let (mut big, small) = if self.terms.len() >= other.terms.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        assert!(same_vars(&self.vars, &other.vars), "variable lists differ");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Multiply by the monomial `c·m`.
    pub fn mul_term(&self, m: &Mono, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(t, d)| (t.mul(m), d * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert!(same_vars(&self.vars, &other.vars), "variable lists differ");
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.vars);
        }
        let mut out = Poly::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one(&self.vars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut n = m.clone();
                n.0[i] -= 1;
                out.add_term(n, c * BigRational::from_integer(e.into()));
            }
        }
        out
    }

    /// Evaluate at a full point (one value per variable).
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.vars.len(), "point arity mismatch");
        let mut powers: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]; point.len()];
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let table = &mut powers[i];
                while table.len() <= e as usize {
                    let next = table.last().unwrap() * &point[i];
                    table.push(next);
                }
                t *= &table[e as usize];
            }
            total += t;
        }
        total
    }

    /// Replace variable `i` by the constant `value`; the variable list is kept.
    pub fn specialize(&self, i: usize, value: &BigRational) -> Poly {
        let mut out = Poly::zero(&self.vars);
        let mut powers = vec![BigRational::one()];
        for (m, c) in &self.terms {
            let e = m.0[i] as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap() * value;
                powers.push(next);
            }
            let mut n = m.clone();
            n.0[i] = 0;
            out.add_term(n, c * &powers[e]);
        }
        out
    }

    /// Substitute polynomials (over a possibly different variable list
    /// `target`) for every variable.
    pub fn compose(&self, images: &[Poly], target: &Vars) -> Poly {
        assert_eq!(images.len(), self.vars.len(), "one image per variable");
        let mut cache: Vec<Vec<Poly>> = vec![vec![Poly::one(target)]; images.len()];
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e as usize {
                    let next = cache[i].last().unwrap().mul(&images[i]);
                    cache[i].push(next);
                }
                t = t.mul(&cache[i][e as usize]);
            }
            out = out.add(&t);
        }
        out
    }

    /// Re-express over a larger (or reordered) variable list. Every
    /// variable used by `self` must occur in `target`.
    pub fn embed(&self, target: &Vars) -> Result<Poly, AlgebraError> {
        if same_vars(&self.vars, target) {
            return Ok(self.clone());
        }
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            match target.iter().position(|t| t == v) {
                Some(j) => map.push(Some(j)),
                None if !self.depends_on(i) => map.push(None),
                None => return Err(AlgebraError::UnknownSymbol(v.clone())),
            }
        }
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut n = Mono::one(target.len());
            for (i, &e) in m.0.iter().enumerate() {
                if let Some(j) = map[i] {
                    n.0[j] += e;
                }
            }
            out.add_term(n, c.clone());
        }
        Ok(out)
    }

    /// Coefficients with respect to variable `i`: `self = Σ_k out[k]·x_i^k`,
    /// where no `out[k]` depends on `x_i`.
    pub fn coeffs_in(&self, i: usize) -> Vec<Poly> {
        let mut out = vec![Poly::zero(&self.vars); self.degree_in(i) as usize + 1];
        for (m, c) in &self.terms {
            let e = m.0[i] as usize;
            let mut n = m.clone();
            n.0[i] = 0;
            out[e].terms.insert(n, c.clone());
        }
        out
    }

    /// Leading coefficient with respect to variable `i`.
    fn lc_in(&self, i: usize) -> Poly {
        let d = self.degree_in(i);
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            if m.0[i] == d {
                let mut n = m.clone();
                n.0[i] = 0;
                out.terms.insert(n, c.clone());
            }
        }
        out
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(same_vars(&self.vars, &d.vars), "variable lists differ");
        let (dm, dc) = d.leading()?;
        if d.is_monomial() {
            let mut out = Poly::zero(&self.vars);
            for (m, c) in &self.terms {
                out.terms.insert(m.div(dm)?, c / dc);
            }
            return Some(out);
        }
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero(&self.vars);
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.div(&dm)?;
            let qc = rc / &dc;
            rem = rem.sub(&d.mul_term(&qm, &qc));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Split as `content · primitive` where the primitive part has coprime
    /// integer coefficients and a positive leading coefficient.
    pub fn integer_primitive(&self) -> (BigRational, Poly) {
        if self.is_zero() {
            return (BigRational::zero(), self.clone());
        }
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            let v = c.numer() * (&den_lcm / c.denom());
            num_gcd = num_gcd.gcd(&v);
        }
        let mut content = BigRational::new(num_gcd, den_lcm);
        if self.leading_coeff().is_negative() {
            content = -content;
        }
        let inv = content.recip();
        (content, self.scale(&inv))
    }

    /// The primitive part alone.
    pub fn primitive(&self) -> Poly {
        self.integer_primitive().1
    }

    /// Greatest common divisor, normalised to an integer-primitive
    /// polynomial with positive leading coefficient (`gcd(0, 0) = 0`).
    pub fn gcd(&self, other: &Poly) -> Poly {
        assert!(same_vars(&self.vars, &other.vars), "variable lists differ");
        let g = gcd_rec(self, other);
        if g.is_zero() {
            g
        } else {
            g.primitive()
        }
    }

    /// Display with an explicit variable renaming (same order as `vars`).
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

fn mono_gcd(m: &Poly, other: &Poly) -> Poly {
    let (mm, _) = m.leading().unwrap();
    let mut g = mm.clone();
    for t in other.terms.keys() {
        g = Mono::min(&g, t);
    }
    Poly::monomial(&m.vars, g, BigRational::one())
}

fn highest_var(a: &Poly, b: &Poly) -> Option<usize> {
    (0..a.nvars()).rev().find(|&i| a.depends_on(i) || b.depends_on(i))
}

/// Content of `p` viewed as a polynomial in `x_v` (a polynomial free of `x_v`).
fn content_in(p: &Poly, v: usize) -> Poly {
    let mut g = Poly::zero(&p.vars);
    for c in p.coeffs_in(v) {
        if c.is_zero() {
            continue;
        }
        g = if g.is_zero() { c.primitive() } else { gcd_rec(&g, &c) };
        if g.is_constant() {
            return Poly::one(&p.vars);
        }
    }
    g
}

fn primitive_in(p: &Poly, v: usize) -> Poly {
    let c = content_in(p, v);
    let pp = if c.is_constant() {
        p.clone()
    } else {
        p.div_exact(&c).expect("content divides")
    };
    pp.primitive()
}

/// Pseudo-remainder of `a` by `b` with respect to `x_v` (up to a rational
/// unit). `b` must depend on `x_v`.
fn pseudo_rem(a: &Poly, b: &Poly, v: usize) -> Poly {
    let db = b.degree_in(v);
    debug_assert!(db >= 1);
    let lb = b.lc_in(v);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = r.lc_in(v);
        let shift = Mono::var(r.nvars(), v, dr - db);
        r = r.mul(&lb).sub(&lr.mul(&b.mul_term(&shift, &BigRational::one())));
        r = r.primitive();
    }
    r
}

fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(&a.vars);
    }
    if a.is_monomial() {
        return mono_gcd(a, b);
    }
    if b.is_monomial() {
        return mono_gcd(b, a);
    }
    let v = highest_var(a, b).expect("non-constant polynomials use a variable");
    if !a.depends_on(v) {
        return gcd_rec(a, &content_in(b, v));
    }
    if !b.depends_on(v) {
        return gcd_rec(&content_in(a, v), b);
    }
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd_rec(&ca, &cb);
    let mut p = primitive_in(a, v);
    let mut q = primitive_in(b, v);
    if p.degree_in(v) < q.degree_in(v) {
        std::mem::swap(&mut p, &mut q);
    }
    let g = loop {
        let r = pseudo_rem(&p, &q, v);
        if r.is_zero() {
            break q;
        }
        if !r.depends_on(v) {
            break Poly::one(&a.vars);
        }
        p = q;
        q = primitive_in(&r, v);
    };
    c.mul(&primitive_in(&g, v))
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        Poly::add(self, rhs)
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        Poly::sub(self, rhs)
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        Poly::mul(self, rhs)
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::neg(self)
    }
}

/// Formatter produced by [`Poly::display_with`].
pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, self.poly, self.names)
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Mono, names: &[String]) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        f.write_str(&names[i])?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

/// Terms ascending under graded-lex order: `1 - 4*g + 36*g^2`.
pub(crate) fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly, names: &[String]) -> fmt::Result {
    if p.is_zero() {
        return f.write_str("0");
    }
    for (k, (m, c)) in p.terms.iter().enumerate() {
        let negative = c.is_negative();
        let mag = c.abs();
        if k == 0 {
            if negative {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if negative { " - " } else { " + " })?;
        }
        if m.is_one() {
            f.write_str(&format_rational(&mag))?;
        } else {
            if !mag.is_one() {
                write!(f, "{}*", format_rational(&mag))?;
            }
            write_monomial(f, m, names)?;
        }
    }
    Ok(())
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, self, &self.vars)
    }
}
