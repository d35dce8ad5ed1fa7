//! Large-N Schwinger-Dyson (loop) equations.
//!
//! Integrating `∂/∂(H_p)_{ij} (w)_{ij} e^{-N tr(½ΣH² + gV)}` by parts and
//! factorising traces at large N gives, for an insertion word `w` and a
//! letter `p`,
//!
//! ```text
//! 0 = Σ_{w = x p y} m_x m_y  −  m_{w p}  −  g Σ_{(V,c)} c Σ_{V = u p v} m_{w v u}
//! ```
//!
//! where the last sum runs over every occurrence of `p` in each potential
//! word (the cyclic derivative).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ModelError;
use crate::exactalg::{format_rational, Poly, Vars};
use crate::model::{moment_name, ModelSpec, Reduced, Symmetry};
use crate::par::{self, Execution};
use crate::words::{basis, canonicalize, CyclicWord, Word};

/// One monomial `coeff · g^g_pow · Π m_factor`. The empty factor list is
/// the constant moment `m_1 = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdeTerm {
    pub coeff: BigRational,
    pub g_pow: u32,
    pub factors: Vec<CyclicWord>,
}

impl SdeTerm {
    /// Total length of all factors.
    pub fn weight(&self) -> usize {
        self.factors.iter().map(|f| f.len()).sum()
    }

    /// `coeff · g^g_pow` as a polynomial over `vars` (variable 0 is `g`).
    pub fn coeff_poly(&self, vars: &Vars) -> Poly {
        Poly::var(vars, 0).pow(self.g_pow).scale(&self.coeff)
    }

    fn key(&self) -> (u32, usize, Vec<CyclicWord>) {
        (self.g_pow, self.weight(), self.factors.clone())
    }
}

/// The loop equation for one insertion, `Σ terms = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdeEquation {
    /// Differentiated letter.
    pub p: u8,
    /// Insertion word.
    pub w: Word,
    pub terms: Vec<SdeTerm>,
}

/// Sum of monomials keyed by `(g power, sorted factors)`.
#[derive(Default)]
struct Accum(BTreeMap<(u32, Vec<CyclicWord>), BigRational>);

impl Accum {
    fn add(&mut self, coeff: BigRational, g_pow: u32, mut factors: Vec<CyclicWord>) {
        factors.retain(|f| !f.is_empty());
        factors.sort();
        let e = self.0.entry((g_pow, factors)).or_insert_with(BigRational::zero);
        *e += coeff;
    }

    fn finish(self) -> Vec<SdeTerm> {
        let mut terms: Vec<SdeTerm> = self
            .0
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((g_pow, factors), coeff)| SdeTerm {
                coeff,
                g_pow,
                factors,
            })
            .collect();
        terms.sort_by_key(|t| t.key());
        terms
    }
}

/// The raw equation for insertion `(p, w)`; words are cyclically
/// canonicalised but no symmetry reduction is applied.
pub fn derive_sde(model: &ModelSpec, p: u8, w: &Word) -> Result<SdeEquation, ModelError> {
    if p as usize >= model.m {
        return Err(ModelError::LetterOutOfRange {
            letter: (b'A' + p) as char,
            matrices: model.m,
            context: "differentiated letter".into(),
        });
    }
    if let Some(&l) = w.letters().iter().find(|&&l| l as usize >= model.m) {
        return Err(ModelError::LetterOutOfRange {
            letter: (b'A' + l) as char,
            matrices: model.m,
            context: format!("insertion word {w}"),
        });
    }
    let mut acc = Accum::default();
    let letters = w.letters();
    for (i, &l) in letters.iter().enumerate() {
        if l == p {
            let left = canonicalize(&Word::from_letters(letters[..i].iter().copied()));
            let right = canonicalize(&Word::from_letters(letters[i + 1..].iter().copied()));
            debug_assert_eq!(left.len() + right.len() + 1, w.len());
            acc.add(BigRational::one(), 0, vec![left, right]);
        }
    }
    let mut wp = w.clone();
    wp.push(p);
    acc.add(-BigRational::one(), 0, vec![canonicalize(&wp)]);
    for term in &model.terms {
        let v = term.word.word();
        for i in 0..v.len() {
            if v.letters()[i] != p {
                continue;
            }
            // Rotate V so the occurrence is last, then drop it.
            let rotated = v.rotate((i + 1) % v.len());
            let rest = Word::from_letters(rotated.letters()[..v.len() - 1].iter().copied());
            let word = canonicalize(&w.concat(&rest));
            debug_assert_eq!(word.len(), w.len() + v.len() - 1);
            acc.add(-term.coeff.clone(), 1, vec![word]);
        }
    }
    Ok(SdeEquation {
        p,
        w: w.clone(),
        terms: acc.finish(),
    })
}

impl SdeEquation {
    /// Replace every moment by its orbit representative (with sign) and
    /// drop moments forced to vanish.
    pub fn symmetrize(&self, sym: &Symmetry) -> SdeEquation {
        let mut acc = Accum::default();
        'terms: for t in &self.terms {
            let mut coeff = t.coeff.clone();
            let mut factors = Vec::with_capacity(t.factors.len());
            for f in &t.factors {
                match sym.reduce(f) {
                    Reduced::Zero => continue 'terms,
                    Reduced::Rep(rep, sign) => {
                        if sign < 0 {
                            coeff = -coeff;
                        }
                        factors.push(rep);
                    }
                }
            }
            acc.add(coeff, t.g_pow, factors);
        }
        SdeEquation {
            p: self.p,
            w: self.w.clone(),
            terms: acc.finish(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every moment word appearing in the equation.
    pub fn moments(&self) -> BTreeSet<CyclicWord> {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().cloned())
            .collect()
    }

    /// Terms with the overall sign fixed so the first coefficient is
    /// positive; equal keys mean equal equations up to sign.
    fn sign_normalized(&self) -> Vec<SdeTerm> {
        let flip = self.terms.first().is_some_and(|t| t.coeff.is_negative());
        self.terms
            .iter()
            .map(|t| SdeTerm {
                coeff: if flip { -t.coeff.clone() } else { t.coeff.clone() },
                ..t.clone()
            })
            .collect()
    }

    /// Insertion word in the paper's style, e.g. `AB^2`.
    pub fn label(&self) -> String {
        power_label(&self.w)
    }

    /// Equation with moments named by words: `1 - m2 - g*m4 = 0`.
    pub fn display_words(&self) -> String {
        render(&self.terms, &|w| moment_name(w))
    }

    /// Equation in exponent-tuple notation: `1 - m_{2} - g m_{4} = 0`
    /// style, with `m_{k}` for `A^k` and `m_{k1,k2,...}` for words whose
    /// letters cycle through the alphabet.
    pub fn display_tuples(&self, m: usize) -> String {
        render(&self.terms, &|w| tuple_name(w, m))
    }
}

impl fmt::Display for SdeEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_words())
    }
}

fn render(terms: &[SdeTerm], name: &dyn Fn(&CyclicWord) -> String) -> String {
    if terms.is_empty() {
        return "0 = 0".into();
    }
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        let neg = t.coeff.is_negative();
        let mag = t.coeff.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut parts: Vec<String> = Vec::new();
        if !mag.is_one() {
            parts.push(format_rational(&mag));
        }
        match t.g_pow {
            0 => {}
            1 => parts.push("g".into()),
            k => parts.push(format!("g^{k}")),
        }
        let mut j = 0;
        while j < t.factors.len() {
            let mut k = j;
            while k < t.factors.len() && t.factors[k] == t.factors[j] {
                k += 1;
            }
            let n = name(&t.factors[j]);
            parts.push(if k - j > 1 { format!("{n}^{}", k - j) } else { n });
            j = k;
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        out.push_str(&parts.join("*"));
    }
    out.push_str(" = 0");
    out
}

/// `AAB` → `A^2B`, `ABB` → `AB^2`.
pub fn power_label(w: &Word) -> String {
    let l = w.letters();
    let mut out = String::new();
    let mut i = 0;
    while i < l.len() {
        let mut j = i;
        while j < l.len() && l[j] == l[i] {
            j += 1;
        }
        out.push((b'A' + l[i]) as char);
        if j - i > 1 {
            out.push_str(&format!("^{}", j - i));
        }
        i = j;
    }
    if out.is_empty() {
        out.push('1');
    }
    out
}

/// Exponent tuple of a word whose runs are read against the repeating
/// pattern `A, B, (C,) A, ...`; zero entries mark skipped letters.
pub fn exponent_tuple(w: &CyclicWord, m: usize) -> Vec<usize> {
    let l = w.letters();
    let mut out = Vec::new();
    let mut i = 0;
    let mut expected = 0u8;
    while i < l.len() {
        let mut run = 0;
        while i < l.len() && l[i] == expected {
            run += 1;
            i += 1;
        }
        out.push(run);
        expected = (expected + 1) % m.max(1) as u8;
    }
    out
}

/// `m_{2,2}`-style name; `m_{k}` for a pure power of `A`.
pub fn tuple_name(w: &CyclicWord, m: usize) -> String {
    if w.is_empty() {
        return "1".into();
    }
    let t = exponent_tuple(w, m);
    let s: Vec<String> = t.iter().map(|k| k.to_string()).collect();
    format!("m_{{{}}}", s.join(","))
}

/// Equations for every `(p, w)` with `|w| ≤ max_len`, symmetry-reduced when
/// `use_symmetry` is set, trivial ones dropped and duplicates (up to an
/// overall sign) removed, keeping the first insertion in enumeration order.
pub fn generate_system(model: &ModelSpec, max_len: usize, use_symmetry: bool) -> Vec<SdeEquation> {
    generate_system_with(model, max_len, use_symmetry, Execution::available())
}

pub fn generate_system_with(
    model: &ModelSpec,
    max_len: usize,
    use_symmetry: bool,
    exec: Execution,
) -> Vec<SdeEquation> {
    let sym = model.symmetry_for(use_symmetry);
    let inserts: Vec<(u8, Word)> = basis(model.m, max_len)
        .into_iter()
        .flat_map(|w| (0..model.m as u8).map(move |p| (p, w.clone())))
        .collect();
    let eqs = par::map_slice(exec, &inserts, |(p, w)| {
        derive_sde(model, *p, w)
            .expect("letters come from the model alphabet")
            .symmetrize(sym)
    });
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for eq in eqs {
        if eq.is_trivial() {
            continue;
        }
        let key: Vec<(u32, Vec<CyclicWord>, BigRational)> = eq
            .sign_normalized()
            .into_iter()
            .map(|t| (t.g_pow, t.factors, t.coeff))
            .collect();
        if seen.insert(key) {
            out.push(eq);
        }
    }
    out
}
