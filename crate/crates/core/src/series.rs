//! Formal power series at `g = 0`.
//!
//! Writing a target word as `W = w·p`, the loop equation for `(p, w)`
//! expresses `m_W` through shorter words at the same order and longer words
//! one order lower:
//!
//! ```text
//! m_W[k] = Σ_{w = x p y} Σ_{a+b=k} m_x[a] m_y[b]  −  Σ_{(V,c)} c Σ_occ m_{w ∂V}[k−1]
//! ```
//!
//! so every coefficient follows by memoised recursion, with the GUE
//! (non-crossing pairing) values at order zero.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::SeriesError;
use crate::exactalg::{format_rational, series_compose, TruncSeries};
use crate::model::{ModelSpec, Reduced, Symmetry};
use crate::reduce::{necklaces, MomentTable};
use crate::sde::SdeEquation;
use crate::words::{canonicalize, CyclicWord, Word};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 6;

/// Number of non-crossing pairings of the positions of `w` that only pair
/// equal letters: the large-N GUE mixed moment.
pub fn gue_mixed_moment(w: &CyclicWord) -> BigRational {
    BigRational::from_integer(noncrossing_pairings(w.letters()))
}

fn noncrossing_pairings(l: &[u8]) -> BigInt {
    let n = l.len();
    if n % 2 == 1 {
        return BigInt::zero();
    }
    // nc[i][j]: pairings of the half-open interval i..j.
    let mut nc = vec![vec![BigInt::zero(); n + 1]; n + 1];
    for i in 0..=n {
        nc[i][i] = BigInt::one();
    }
    for len in (2..=n).step_by(2) {
        for i in 0..=n - len {
            let j = i + len;
            let mut total = BigInt::zero();
            for k in (i + 1..j).step_by(2) {
                if l[k] == l[i] {
                    total += &nc[i + 1][k] * &nc[k + 1][j];
                }
            }
            nc[i][j] = total;
        }
    }
    nc[0][n].clone()
}

/// Memoised coefficient recursion for one model.
pub struct SeriesEngine {
    model: ModelSpec,
    sym: std::sync::Arc<Symmetry>,
    max_len: usize,
    memo: HashMap<(CyclicWord, usize), BigRational>,
}

impl SeriesEngine {
    /// `max_len` bounds the words the recursion may visit.
    pub fn new(model: &ModelSpec, max_len: usize) -> SeriesEngine {
        SeriesEngine {
            sym: model.symmetry().clone(),
            model: model.clone(),
            max_len,
            memo: HashMap::new(),
        }
    }

    /// Tracking bound sufficient for words of length `len` at order `k`.
    pub fn default_max_len(model: &ModelSpec, len: usize, k: usize) -> usize {
        let d = model.max_term_len().max(2);
        (len + k * (d - 2)).max(d * k + 2)
    }

    /// Coefficient of `g^k` in `m_w`.
    pub fn coeff(&mut self, w: &CyclicWord, k: usize) -> Result<BigRational, SeriesError> {
        if w.is_empty() {
            return Ok(if k == 0 {
                BigRational::one()
            } else {
                BigRational::zero()
            });
        }
        let (rep, sign) = match self.sym.reduce(w) {
            Reduced::Zero => return Ok(BigRational::zero()),
            Reduced::Rep(rep, sign) => (rep, sign),
        };
        let v = self.coeff_rep(&rep, k)?;
        Ok(if sign < 0 { -v } else { v })
    }

    fn coeff_rep(&mut self, rep: &CyclicWord, k: usize) -> Result<BigRational, SeriesError> {
        if let Some(v) = self.memo.get(&(rep.clone(), k)) {
            return Ok(v.clone());
        }
        if rep.len() > self.max_len {
            return Err(SeriesError::UnderdeterminedAtOrder {
                order: k,
                word: rep.to_string(),
                limit: self.max_len,
            });
        }
        let letters = rep.letters();
        let n = letters.len();
        let p = letters[n - 1];
        let w = &letters[..n - 1];
        let mut val = BigRational::zero();
        for i in 0..w.len() {
            if w[i] != p {
                continue;
            }
            let x = canonicalize(&Word::from_letters(w[..i].iter().copied()));
            let y = canonicalize(&Word::from_letters(w[i + 1..].iter().copied()));
            for a in 0..=k {
                let ca = self.coeff(&x, a)?;
                if ca.is_zero() {
                    continue;
                }
                let cb = self.coeff(&y, k - a)?;
                val += ca * cb;
            }
        }
        if k > 0 {
            let wword = Word::from_letters(w.iter().copied());
            let terms = self.model.terms.clone();
            for t in &terms {
                let v = t.word.word();
                for j in 0..v.len() {
                    if v.letters()[j] != p {
                        continue;
                    }
                    let rotated = v.rotate((j + 1) % v.len());
                    let rest = Word::from_letters(rotated.letters()[..v.len() - 1].iter().copied());
                    let word = canonicalize(&wword.concat(&rest));
                    val -= &t.coeff * self.coeff(&word, k - 1)?;
                }
            }
        }
        self.memo.insert((rep.clone(), k), val.clone());
        Ok(val)
    }

    /// Series of `m_w` to order `k`.
    pub fn moment(&mut self, w: &CyclicWord, k: usize) -> Result<TruncSeries, SeriesError> {
        let c = (0..=k).map(|i| self.coeff(w, i)).collect::<Result<Vec<_>, _>>()?;
        Ok(TruncSeries::new(c))
    }

    /// Series residual of a loop equation (all moments expanded here); zero
    /// through order `k` for a consistent expansion.
    pub fn residual(&mut self, eq: &SdeEquation, k: usize) -> Result<TruncSeries, SeriesError> {
        let mut acc = TruncSeries::zero(k);
        for t in &eq.terms {
            let shift = t.g_pow as usize;
            if shift > k {
                continue;
            }
            let mut prod = TruncSeries::constant(t.coeff.clone(), k - shift);
            for f in &t.factors {
                prod = prod.mul(&self.moment(f, k - shift)?);
            }
            acc = acc.add(&prod.shift_up(shift).truncate(k));
        }
        Ok(acc)
    }

    /// `dF₀/dg = −Σ c·m_V` to order `k`.
    pub fn free_energy_derivative(&mut self, k: usize) -> Result<TruncSeries, SeriesError> {
        let mut acc = TruncSeries::zero(k);
        for t in self.model.terms.clone() {
            acc = acc.sub(&self.moment(&t.word, k)?.scale(&t.coeff));
        }
        Ok(acc)
    }
}

/// Moment series for every word up to `table_len`, plus the free energy.
#[derive(Clone, Debug)]
pub struct SeriesTable {
    pub model: ModelSpec,
    pub order: usize,
    pub moments: BTreeMap<CyclicWord, TruncSeries>,
    /// g-dependent part of the planar free energy (no constant term).
    pub free_energy: TruncSeries,
}

/// Expand with the default word-length range for the model's alphabet.
pub fn expand_moments(model: &ModelSpec, k: usize, max_len: usize) -> Result<SeriesTable, SeriesError> {
    let table_len = if model.m <= 2 { 8 } else { 6 };
    expand_moments_upto(model, k, max_len, table_len)
}

/// Expand every necklace of length `≤ table_len` to order `k`.
pub fn expand_moments_upto(
    model: &ModelSpec,
    k: usize,
    max_len: usize,
    table_len: usize,
) -> Result<SeriesTable, SeriesError> {
    let mut engine = SeriesEngine::new(model, max_len);
    let mut moments = BTreeMap::new();
    for w in necklaces(model.m, table_len) {
        let s = engine.moment(&w, k)?;
        moments.insert(w, s);
    }
    let free_energy = if k == 0 {
        TruncSeries::zero(0)
    } else {
        engine.free_energy_derivative(k - 1)?.integrate()
    };
    Ok(SeriesTable {
        model: model.clone(),
        order: k,
        moments,
        free_energy,
    })
}

/// Free-energy series of a table (already computed at expansion time).
pub fn expand_free_energy(table: &SeriesTable) -> TruncSeries {
    table.free_energy.clone()
}

/// First non-vanishing order of a moment series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vanishing {
    /// The coefficient of `g^k` is the first non-zero one.
    At(usize),
    /// All coefficients through the truncation order vanish.
    AtLeast(usize),
}

impl Vanishing {
    /// Is the order of vanishing at least `k`?
    pub fn at_least(self, k: usize) -> bool {
        match self {
            Vanishing::At(v) => v >= k,
            Vanishing::AtLeast(v) => v >= k,
        }
    }
}

impl fmt::Display for Vanishing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vanishing::At(k) => write!(f, "{k}"),
            Vanishing::AtLeast(k) => write!(f, ">= {k}"),
        }
    }
}

pub fn vanishing_of(s: &TruncSeries) -> Vanishing {
    match s.valuation() {
        Some(v) => Vanishing::At(v),
        None => Vanishing::AtLeast(s.order() + 1),
    }
}

pub fn order_of_vanishing(table: &SeriesTable, w: &CyclicWord) -> Result<Vanishing, SeriesError> {
    let s = table
        .moments
        .get(w)
        .ok_or_else(|| SeriesError::MissingMoment(w.clone()))?;
    Ok(vanishing_of(s))
}

impl SeriesTable {
    pub fn get(&self, w: &CyclicWord) -> Option<&TruncSeries> {
        self.moments.get(w)
    }

    /// `{"order": K, "moments": {word: [c0, ...]}, "free_energy": [...]}`.
    pub fn to_json(&self) -> Value {
        let series = |s: &TruncSeries| -> Vec<String> { s.coeffs().iter().map(format_rational).collect() };
        let moments: serde_json::Map<String, Value> = self
            .moments
            .iter()
            .map(|(w, s)| (w.to_string(), json!(series(s))))
            .collect();
        json!({
            "order": self.order,
            "moments": moments,
            "free_energy": series(&self.free_energy),
        })
    }

    /// Generator series keyed by symbol, for [`series_compose`].
    pub fn generator_series(&self) -> BTreeMap<String, TruncSeries> {
        let mut engine = SeriesEngine::new(&self.model, usize::MAX);
        self.model
            .generators
            .iter()
            .map(|g| {
                let s = match self.moments.get(&g.word) {
                    Some(s) => s.clone(),
                    None => engine.moment(&g.word, self.order).expect("unbounded tracking"),
                };
                (g.symbol.clone(), s)
            })
            .collect()
    }
}

/// Expand a solved rational moment by substituting generator series.
pub fn compose_moment(
    table: &MomentTable,
    series: &SeriesTable,
    w: &CyclicWord,
    k: usize,
) -> Result<TruncSeries, SeriesError> {
    let f = table
        .get(w)
        .ok_or_else(|| SeriesError::MissingMoment(w.clone()))?;
    Ok(series_compose(f, &series.generator_series(), k)?)
}

/// Why a candidate set of generator series cannot be the expansion of the
/// model: substituting it into the exact moment formulas must give regular
/// series with GUE values at `g = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CandidateDefect {
    /// The formula for this word acquires a pole at `g = 0`.
    Pole(CyclicWord),
    /// The `g⁰` coefficient differs from the non-crossing pairing count.
    GueMismatch(CyclicWord),
}

impl fmt::Display for CandidateDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CandidateDefect::Pole(w) => write!(f, "m_{w} has a pole at g = 0"),
            CandidateDefect::GueMismatch(w) => write!(f, "m_{w} disagrees with the GUE value at g = 0"),
        }
    }
}

/// Substitute candidate generator series (missing symbols are filled from
/// `fallback`) into every solved moment of length `≤ max_len` and collect
/// the defects. An empty result means the candidate is consistent to order
/// `k` — by uniqueness of the formal solution it then agrees with the
/// expansion.
pub fn candidate_defects(
    table: &MomentTable,
    candidate: &BTreeMap<String, TruncSeries>,
    fallback: &SeriesTable,
    k: usize,
    max_len: usize,
) -> Vec<CandidateDefect> {
    let mut subst = fallback.generator_series();
    for (name, s) in candidate {
        subst.insert(name.clone(), s.clone());
    }
    let mut out = Vec::new();
    for (w, f) in &table.entries {
        if w.len() > max_len {
            continue;
        }
        match series_compose(f, &subst, k) {
            Err(_) => out.push(CandidateDefect::Pole(w.clone())),
            Ok(s) => {
                if s.coeff(0) != gue_mixed_moment(w) {
                    out.push(CandidateDefect::GueMismatch(w.clone()));
                }
            }
        }
    }
    out
}

fn catalan(n: usize) -> BigRational {
    let mut c = BigInt::one();
    for i in 0..n {
        c = c * BigInt::from(2 * (2 * i + 1)) / BigInt::from(i + 2);
    }
    BigRational::from_integer(c)
}

/// Second-moment series from the pure-power formulas alone: the formula
/// for `A^{2j+2}` has a pole of order `j` at `g = 0`, and requiring its
/// finite limit to equal the Catalan number fixes the `g^j` coefficient of
/// `m₂` (the limit is affine in that coefficient). Needs `table.cutoff ≥ 2k+2`
/// and a single generator `AA`.
pub fn second_moment_by_limits(table: &MomentTable, k: usize) -> Result<TruncSeries, SeriesError> {
    let gen = table
        .model
        .generators
        .first()
        .ok_or_else(|| SeriesError::MissingMoment(CyclicWord::empty()))?;
    let mut coeffs: Vec<BigRational> = Vec::new();
    for j in 0..=k {
        let w = canonicalize(&Word::power(0, 2 * j + 2));
        let f = table
            .get(&w)
            .ok_or_else(|| SeriesError::MissingMoment(w.clone()))?;
        let limit = |t: BigRational| -> Result<BigRational, SeriesError> {
            let mut c = coeffs.clone();
            c.push(t);
            let mut subst = BTreeMap::new();
            subst.insert(gen.symbol.clone(), TruncSeries::new(c));
            Ok(series_compose(f, &subst, 0)?.coeff(0))
        };
        let v0 = limit(BigRational::zero())?;
        let v1 = limit(BigRational::one())?;
        let slope = &v1 - &v0;
        if slope.is_zero() {
            return Err(SeriesError::UnderdeterminedAtOrder {
                order: j,
                word: w.to_string(),
                limit: table.cutoff,
            });
        }
        coeffs.push((catalan(j + 1) - v0) / slope);
    }
    Ok(TruncSeries::new(coeffs))
}
