//! Model specifications: matrix count, potential, symmetries, generators.
//!
//! The Gaussian part `½ Σ tr H_i²` is implicit. The potential is
//! `g · Σ_terms coeff · tr(word)`, so the measure is
//! `exp(-N tr(½ Σ H_i² + g Σ coeff·word))`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ParseError};
use crate::exactalg::{format_rational, parse_rational, vars, Vars};
use crate::words::{canonicalize, CyclicWord, Word};

/// One potential term `coeff · g · tr(word)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PotentialTerm {
    pub word: CyclicWord,
    pub coeff: BigRational,
    /// The divisor as written in the potential (e.g. 4 for `g/4 · A⁴`);
    /// already absorbed into `coeff`, kept for display.
    pub sym_divisor: u32,
}

/// A declared generator moment and the symbol that stands for it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub word: CyclicWord,
    pub symbol: String,
}

/// Declared symmetry of the potential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymmetryRule {
    /// Letter `i` is replaced by `perm[i]`.
    Permutation(Vec<u8>),
    /// Each listed letter changes sign.
    Negation(Vec<u8>),
}

impl fmt::Display for SymmetryRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryRule::Permutation(p) => {
                let s: Vec<String> = p.iter().map(|l| ((b'A' + l) as char).to_string()).collect();
                write!(f, "permute letters to [{}]", s.join(", "))
            }
            SymmetryRule::Negation(ls) => {
                let s: Vec<String> = ls.iter().map(|l| ((b'A' + l) as char).to_string()).collect();
                write!(f, "negate [{}]", s.join(", "))
            }
        }
    }
}

/// A signed letter permutation: letter `l` maps to `perm[l]` and picks up a
/// sign when `flip[l]` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPerm {
    pub perm: Vec<u8>,
    pub flip: Vec<bool>,
}

impl SignedPerm {
    pub fn identity(m: usize) -> SignedPerm {
        SignedPerm {
            perm: (0..m as u8).collect(),
            flip: vec![false; m],
        }
    }

    fn from_rule(rule: &SymmetryRule, m: usize) -> SignedPerm {
        let mut s = SignedPerm::identity(m);
        match rule {
            SymmetryRule::Permutation(p) => s.perm = p.clone(),
            SymmetryRule::Negation(ls) => {
                for &l in ls {
                    s.flip[l as usize] = !s.flip[l as usize];
                }
            }
        }
        s
    }

    /// `other ∘ self`: apply `self` first.
    fn then(&self, other: &SignedPerm) -> SignedPerm {
        let m = self.perm.len();
        let mut out = SignedPerm::identity(m);
        for l in 0..m {
            let mid = self.perm[l] as usize;
            out.perm[l] = other.perm[mid];
            out.flip[l] = self.flip[l] ^ other.flip[mid];
        }
        out
    }

    /// Image of a word and the accumulated sign.
    pub fn apply(&self, w: &Word) -> (Word, i32) {
        let mut sign = 1;
        let img = Word::from_letters(w.letters().iter().map(|&l| {
            if self.flip[l as usize] {
                sign = -sign;
            }
            self.perm[l as usize]
        }));
        (img, sign)
    }
}

/// Where a moment lives after symmetry reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduced {
    /// Forced to vanish (fixed by an element acting with sign −1).
    Zero,
    /// `m_w = sign · m_rep`.
    Rep(CyclicWord, i32),
}

/// The finite group generated by the declared rules, with a memo of orbit
/// representatives.
#[derive(Debug)]
pub struct Symmetry {
    elements: Vec<SignedPerm>,
    cache: RwLock<HashMap<CyclicWord, Reduced>>,
}

impl Clone for Symmetry {
    fn clone(&self) -> Self {
        Symmetry {
            elements: self.elements.clone(),
            cache: RwLock::new(HashMap::new()),
        }
    }
}

impl Symmetry {
    /// Only the identity.
    pub fn trivial(m: usize) -> Symmetry {
        Symmetry {
            elements: vec![SignedPerm::identity(m)],
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Closure of the rules under composition.
    pub fn generated(rules: &[SymmetryRule], m: usize) -> Symmetry {
        let gens: Vec<SignedPerm> = rules.iter().map(|r| SignedPerm::from_rule(r, m)).collect();
        let id = SignedPerm::identity(m);
        let mut seen: HashSet<SignedPerm> = HashSet::from([id.clone()]);
        let mut elements = vec![id];
        let mut i = 0;
        while i < elements.len() {
            for gen in &gens {
                let next = elements[i].then(gen);
                if seen.insert(next.clone()) {
                    elements.push(next);
                }
            }
            i += 1;
        }
        Symmetry {
            elements,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[SignedPerm] {
        &self.elements
    }

    /// Orbit representative (least canonical image) with sign, or `Zero`.
    pub fn reduce(&self, w: &CyclicWord) -> Reduced {
        if self.elements.len() == 1 {
            return Reduced::Rep(w.clone(), 1);
        }
        if let Some(r) = self.cache.read().expect("symmetry cache").get(w) {
            return r.clone();
        }
        let mut best: Option<(CyclicWord, i32)> = None;
        let mut zero = false;
        for e in &self.elements {
            let (img, sign) = e.apply(w.word());
            let img = canonicalize(&img);
            if img == *w && sign < 0 {
                zero = true;
                break;
            }
            match &best {
                Some((b, _)) if *b <= img => {}
                _ => best = Some((img, sign)),
            }
        }
        let out = if zero {
            Reduced::Zero
        } else {
            let (rep, sign) = best.expect("group is non-empty");
            Reduced::Rep(rep, sign)
        };
        self.cache
            .write()
            .expect("symmetry cache")
            .insert(w.clone(), out.clone());
        out
    }
}

/// Apply one rule to a cyclic word.
pub fn apply_symmetry(rule: &SymmetryRule, w: &CyclicWord) -> (CyclicWord, i32) {
    let m = w.word().alphabet_size().max(match rule {
        SymmetryRule::Permutation(p) => p.len(),
        SymmetryRule::Negation(ls) => ls.iter().map(|&l| l as usize + 1).max().unwrap_or(0),
    });
    let (img, sign) = SignedPerm::from_rule(rule, m).apply(w.word());
    (canonicalize(&img), sign)
}

/// A validated model.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub m: usize,
    pub terms: Vec<PotentialTerm>,
    pub generators: Vec<Generator>,
    pub symmetries: Vec<SymmetryRule>,
    vars: Vars,
    symmetry: Arc<Symmetry>,
    trivial: Arc<Symmetry>,
}

impl PartialEq for ModelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.m == other.m
            && self.terms == other.terms
            && self.generators == other.generators
            && self.symmetries == other.symmetries
    }
}

/// Default symbol for a generator word: `m2` for `AA`, `m_AB` otherwise.
pub fn default_symbol(w: &CyclicWord) -> String {
    if !w.is_empty() && w.letters().iter().all(|&l| l == 0) {
        format!("m{}", w.len())
    } else {
        format!("m_{w}")
    }
}

/// Display name of a moment: `1`, `m4`, `m_AABB`.
pub fn moment_name(w: &CyclicWord) -> String {
    if w.is_empty() {
        "1".to_string()
    } else {
        default_symbol(w)
    }
}

fn check_letters(w: &CyclicWord, m: usize, context: &str) -> Result<(), ModelError> {
    if let Some(&l) = w.letters().iter().find(|&&l| l as usize >= m) {
        return Err(ModelError::LetterOutOfRange {
            letter: (b'A' + l) as char,
            matrices: m,
            context: context.to_string(),
        });
    }
    Ok(())
}

impl ModelSpec {
    /// Validate and assemble a model.
    pub fn new(
        name: impl Into<String>,
        m: usize,
        terms: Vec<PotentialTerm>,
        generators: Vec<Generator>,
        symmetries: Vec<SymmetryRule>,
    ) -> Result<ModelSpec, ModelError> {
        if m == 0 || m > 26 {
            return Err(ParseError::new(format!("matrix count {m} out of range")).into());
        }
        for t in &terms {
            check_letters(&t.word, m, &format!("term {}", t.word))?;
            if t.word.len() < 3 {
                return Err(ModelError::TermTooShort {
                    word: t.word.to_string(),
                    len: t.word.len(),
                });
            }
            if t.coeff.is_zero() {
                return Err(ModelError::ZeroCoefficient(t.word.to_string()));
            }
        }
        let mut seen = HashSet::new();
        for gen in &generators {
            check_letters(&gen.word, m, &format!("generator {}", gen.word))?;
            if !seen.insert(gen.word.clone()) || gen.symbol == "g" {
                return Err(ModelError::DuplicateGenerator(gen.word.to_string()));
            }
        }
        let symbols: HashSet<_> = generators.iter().map(|g| g.symbol.clone()).collect();
        if symbols.len() != generators.len() {
            return Err(ModelError::DuplicateGenerator("symbol".into()));
        }
        for rule in &symmetries {
            validate_rule(rule, m)?;
        }
        // Merge terms with equal cyclic words.
        let mut merged: BTreeMap<CyclicWord, (BigRational, u32)> = BTreeMap::new();
        for t in &terms {
            let e = merged
                .entry(t.word.clone())
                .or_insert((BigRational::zero(), t.sym_divisor));
            e.0 += &t.coeff;
        }
        for rule in &symmetries {
            check_automorphism(rule, m, &merged)?;
        }
        let mut names = vec!["g".to_string()];
        names.extend(generators.iter().map(|g| g.symbol.clone()));
        Ok(ModelSpec {
            name: name.into(),
            m,
            terms,
            vars: vars(&names),
            symmetry: Arc::new(Symmetry::generated(&symmetries, m)),
            trivial: Arc::new(Symmetry::trivial(m)),
            generators,
            symmetries,
        })
    }

    /// Parse the JSON model format.
    pub fn parse(text: &str) -> Result<ModelSpec, ModelError> {
        parse_model(text)
    }

    /// One of the shipped presets: `gaussian1`, `quartic`, `ggg`, `g_mg_g`,
    /// `gg_mg`, `mg_gg`, `3matrix`.
    pub fn preset(name: &str) -> Option<ModelSpec> {
        let text = PRESETS.iter().find(|(n, _)| *n == name)?.1;
        Some(parse_model(text).expect("shipped presets are valid"))
    }

    pub fn preset_names() -> Vec<&'static str> {
        PRESETS.iter().map(|(n, _)| *n).collect()
    }

    /// `["g", generator symbols...]`.
    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    /// Index of a generator's symbol in [`ModelSpec::vars`].
    pub fn generator_var(&self, w: &CyclicWord) -> Option<usize> {
        self.generators.iter().position(|g| &g.word == w).map(|i| i + 1)
    }

    /// The group generated by the declared rules.
    pub fn symmetry(&self) -> &Arc<Symmetry> {
        &self.symmetry
    }

    /// Either the declared group or the trivial group.
    pub fn symmetry_for(&self, enabled: bool) -> &Arc<Symmetry> {
        if enabled {
            &self.symmetry
        } else {
            &self.trivial
        }
    }

    /// Largest potential word length (2 for the Gaussian model).
    pub fn max_term_len(&self) -> usize {
        self.terms.iter().map(|t| t.word.len()).max().unwrap_or(2)
    }

    /// Same model with different generators (symbols default by word).
    pub fn with_generators(&self, words: &[CyclicWord]) -> Result<ModelSpec, ModelError> {
        let generators = words
            .iter()
            .map(|w| {
                let symbol = self
                    .generators
                    .iter()
                    .find(|g| &g.word == w)
                    .map(|g| g.symbol.clone())
                    .unwrap_or_else(|| default_symbol(w));
                Generator {
                    word: w.clone(),
                    symbol,
                }
            })
            .collect();
        ModelSpec::new(
            self.name.clone(),
            self.m,
            self.terms.clone(),
            generators,
            self.symmetries.clone(),
        )
    }

    /// Same model without declared symmetries.
    pub fn without_symmetries(&self) -> ModelSpec {
        ModelSpec::new(
            self.name.clone(),
            self.m,
            self.terms.clone(),
            self.generators.clone(),
            Vec::new(),
        )
        .expect("dropping symmetries keeps a model valid")
    }

    /// Canonical JSON document (stable field order).
    pub fn to_json(&self) -> serde_json::Value {
        let doc = ModelDoc {
            name: self.name.clone(),
            matrices: self.m,
            terms: self
                .terms
                .iter()
                .map(|t| TermDoc {
                    word: t.word.to_string(),
                    coeff: format_rational(&t.coeff),
                    sym_divisor: Some(t.sym_divisor),
                })
                .collect(),
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorDoc::Full {
                    word: g.word.to_string(),
                    symbol: g.symbol.clone(),
                })
                .collect(),
            symmetries: self
                .symmetries
                .iter()
                .map(|r| match r {
                    SymmetryRule::Permutation(p) => RuleDoc {
                        kind: "swap".into(),
                        perm: Some(p.clone()),
                        letters: None,
                    },
                    SymmetryRule::Negation(ls) => RuleDoc {
                        kind: "negate".into(),
                        perm: None,
                        letters: Some(ls.clone()),
                    },
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("model serialises")
    }
}

fn validate_rule(rule: &SymmetryRule, m: usize) -> Result<(), ModelError> {
    match rule {
        SymmetryRule::Permutation(p) => {
            let mut sorted = p.clone();
            sorted.sort_unstable();
            if p.len() != m || sorted != (0..m as u8).collect::<Vec<_>>() {
                return Err(ModelError::InvalidRule(format!(
                    "{p:?} is not a permutation of {m} letters"
                )));
            }
        }
        SymmetryRule::Negation(ls) => {
            if ls.is_empty() {
                return Err(ModelError::InvalidRule("negation of no letters".into()));
            }
            if let Some(&l) = ls.iter().find(|&&l| l as usize >= m) {
                return Err(ModelError::LetterOutOfRange {
                    letter: (b'A' + l) as char,
                    matrices: m,
                    context: format!("symmetry rule {rule}"),
                });
            }
        }
    }
    Ok(())
}

fn check_automorphism(
    rule: &SymmetryRule,
    m: usize,
    terms: &BTreeMap<CyclicWord, (BigRational, u32)>,
) -> Result<(), ModelError> {
    let s = SignedPerm::from_rule(rule, m);
    for (w, (c, _)) in terms {
        let (img, sign) = s.apply(w.word());
        let img = canonicalize(&img);
        let expected = if sign > 0 { c.clone() } else { -c.clone() };
        let actual = terms.get(&img).map(|t| t.0.clone()).unwrap_or_else(BigRational::zero);
        if actual != expected {
            return Err(ModelError::NotAnAutomorphism {
                rule: rule.to_string(),
                detail: format!(
                    "term {w} maps to {}{img} but the potential has coefficient {} there",
                    if sign < 0 { "-" } else { "" },
                    format_rational(&actual)
                ),
            });
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    name: String,
    matrices: usize,
    #[serde(default)]
    terms: Vec<TermDoc>,
    #[serde(default)]
    generators: Vec<GeneratorDoc>,
    #[serde(default)]
    symmetries: Vec<RuleDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    word: String,
    coeff: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sym_divisor: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GeneratorDoc {
    Word(String),
    Full { word: String, symbol: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    perm: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    letters: Option<Vec<u8>>,
}

/// Parse and validate a JSON model document.
pub fn parse_model(text: &str) -> Result<ModelSpec, ModelError> {
    let doc: ModelDoc = serde_json::from_str(text)
        .map_err(|e| ParseError::new(format!("model document: {e}")))?;
    let mut terms = Vec::new();
    for t in &doc.terms {
        let word: CyclicWord = t.word.parse()?;
        let coeff = parse_rational(&t.coeff)?;
        let sym_divisor = t
            .sym_divisor
            .unwrap_or_else(|| u32::try_from(coeff.denom()).unwrap_or(1));
        terms.push(PotentialTerm {
            word,
            coeff,
            sym_divisor,
        });
    }
    let mut generators = Vec::new();
    for g in &doc.generators {
        let (word, symbol) = match g {
            GeneratorDoc::Word(w) => {
                let word: CyclicWord = w.parse()?;
                let symbol = default_symbol(&word);
                (word, symbol)
            }
            GeneratorDoc::Full { word, symbol } => {
                let word: CyclicWord = word.parse()?;
                if !symbol.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                    || !symbol.starts_with(|c: char| c.is_ascii_alphabetic())
                {
                    return Err(ParseError::new(format!("invalid symbol {symbol:?}")).into());
                }
                (word, symbol.clone())
            }
        };
        if word.is_empty() {
            return Err(ParseError::new("the empty word cannot be a generator").into());
        }
        generators.push(Generator { word, symbol });
    }
    let mut symmetries = Vec::new();
    for r in &doc.symmetries {
        let rule = match r.kind.as_str() {
            "swap" | "permutation" | "permute" => SymmetryRule::Permutation(
                r.perm
                    .clone()
                    .ok_or_else(|| ModelError::InvalidRule("permutation without \"perm\"".into()))?,
            ),
            "negate" | "negation" => SymmetryRule::Negation(
                r.letters
                    .clone()
                    .ok_or_else(|| ModelError::InvalidRule("negation without \"letters\"".into()))?,
            ),
            other => return Err(ModelError::InvalidRule(format!("unknown kind {other:?}"))),
        };
        symmetries.push(rule);
    }
    ModelSpec::new(doc.name, doc.matrices, terms, generators, symmetries)
}

const PRESETS: &[(&str, &str)] = &[
    ("gaussian1", include_str!("../../../presets/gaussian1.json")),
    ("quartic", include_str!("../../../presets/quartic.json")),
    ("ggg", include_str!("../../../presets/ggg.json")),
    ("g_mg_g", include_str!("../../../presets/g_mg_g.json")),
    ("gg_mg", include_str!("../../../presets/gg_mg.json")),
    ("mg_gg", include_str!("../../../presets/mg_gg.json")),
    ("3matrix", include_str!("../../../presets/3matrix.json")),
];

/// `1` as a rational, for callers building terms by hand.
pub fn unit() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw(s: &str) -> CyclicWord {
        s.parse().unwrap()
    }

    #[test]
    fn presets_parse() {
        for name in ModelSpec::preset_names() {
            let m = ModelSpec::preset(name).unwrap();
            assert_eq!(m.name, name);
        }
        assert_eq!(ModelSpec::preset("ggg").unwrap().terms.len(), 4);
        assert_eq!(ModelSpec::preset("3matrix").unwrap().terms.len(), 5);
        assert!(ModelSpec::preset("gaussian1").unwrap().terms.is_empty());
    }

    #[test]
    fn symmetry_examples() {
        let swap = SymmetryRule::Permutation(vec![1, 0]);
        assert_eq!(apply_symmetry(&swap, &cw("AAB")), (cw("ABB"), 1));
        let neg = SymmetryRule::Negation(vec![0]);
        assert_eq!(apply_symmetry(&neg, &cw("AAB")), (cw("AAB"), 1));
        assert_eq!(apply_symmetry(&neg, &cw("A")), (cw("A"), -1));
    }

    #[test]
    fn group_closure() {
        let ggg = ModelSpec::preset("ggg").unwrap();
        assert_eq!(ggg.symmetry().order(), 8);
        assert_eq!(ggg.symmetry().reduce(&cw("A")), Reduced::Zero);
        assert_eq!(ggg.symmetry().reduce(&cw("BB")), Reduced::Rep(cw("AA"), 1));
        let three = ModelSpec::preset("3matrix").unwrap();
        assert_eq!(three.symmetry().order(), 6);
        assert_eq!(three.symmetry().reduce(&cw("BCC")), Reduced::Rep(cw("AAB"), 1));
    }

    #[test]
    fn rejects_non_automorphism() {
        let text = r#"{"name":"bad","matrices":2,
            "terms":[{"word":"AAAA","coeff":"1/4"},{"word":"BBBB","coeff":"1/2"}],
            "generators":["AA"],
            "symmetries":[{"kind":"swap","perm":[1,0]}]}"#;
        assert!(matches!(parse_model(text), Err(ModelError::NotAnAutomorphism { .. })));
    }

    #[test]
    fn rejects_bad_letters_and_terms() {
        let text = r#"{"name":"bad","matrices":1,"terms":[{"word":"AAAA","coeff":"1/4"}],"generators":["AB"]}"#;
        assert!(matches!(parse_model(text), Err(ModelError::LetterOutOfRange { .. })));
        let text = r#"{"name":"bad","matrices":1,"terms":[{"word":"AA","coeff":"1"}]}"#;
        assert!(matches!(parse_model(text), Err(ModelError::TermTooShort { .. })));
        assert!(parse_model("{not json").is_err());
    }

    #[test]
    fn json_round_trip() {
        for name in ModelSpec::preset_names() {
            let m = ModelSpec::preset(name).unwrap();
            let again = parse_model(&m.to_json().to_string()).unwrap();
            assert_eq!(m, again);
        }
    }
}
