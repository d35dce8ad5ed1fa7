//! Symbolic solution of the loop equations: every moment up to a cutoff as
//! a rational function of `g` and the declared generators.
//!
//! Equations are fed into an incremental sparse echelon form over the field
//! of rational functions. Unknowns are ordered by `(length, word)` and each
//! row pivots on its largest unknown. Equations containing a product of two
//! unknowns are deferred until one factor is known. Once no more progress
//! is possible the insertion length is raised.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::{json, Value};

use crate::error::SolveError;
use crate::exactalg::{format_rational, Poly, RatFunc, Vars};
use crate::model::{moment_name, ModelSpec, Reduced, Symmetry};
use crate::par::Execution;
use crate::sde::{generate_system_with, SdeEquation};
use crate::words::{basis, canonicalize, CyclicWord};

/// Solver knobs.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Reduce by the declared symmetry group (otherwise the trivial group).
    pub use_symmetry: bool,
    /// How far the insertion length may go beyond `cutoff`.
    pub extra_len: usize,
    pub exec: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            use_symmetry: true,
            extra_len: 6,
            exec: Execution::available(),
        }
    }
}

/// Solved moments.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub model: ModelSpec,
    pub cutoff: usize,
    /// Every canonical word of length `≤ cutoff` that could be expressed.
    pub entries: BTreeMap<CyclicWord, RatFunc>,
    /// Words of length `≤ cutoff` left undetermined.
    pub unresolved: BTreeSet<CyclicWord>,
    /// Relations among the generators found while solving (numerators,
    /// each `= 0`). Non-empty means the declared search space is too big.
    pub relations: Vec<Poly>,
    /// Longest insertion word used.
    pub insertion_len: usize,
    pub use_symmetry: bool,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: BTreeMap<CyclicWord, RatFunc>,
    constant: RatFunc,
}

enum Prepared {
    Linear(Row),
    Deferred,
}

struct Solver {
    vars: Vars,
    known: HashMap<CyclicWord, RatFunc>,
    pivots: BTreeMap<CyclicWord, Row>,
    relations: Vec<Poly>,
}

impl Solver {
    fn new(model: &ModelSpec, sym: &Symmetry) -> Solver {
        let vars = model.vars().clone();
        let mut known = HashMap::new();
        for (i, gen) in model.generators.iter().enumerate() {
            // A generator fixes its whole orbit; store it at the representative.
            match sym.reduce(&gen.word) {
                Reduced::Zero => {}
                Reduced::Rep(rep, sign) => {
                    let v = RatFunc::var(&vars, i + 1);
                    known.insert(rep, if sign < 0 { v.neg() } else { v });
                }
            }
        }
        Solver {
            vars,
            known,
            pivots: BTreeMap::new(),
            relations: Vec::new(),
        }
    }

    fn prepare(&self, eq: &SdeEquation) -> Prepared {
        let mut row = Row {
            coeffs: BTreeMap::new(),
            constant: RatFunc::zero(&self.vars),
        };
        for t in &eq.terms {
            let mut c = RatFunc::from_poly(t.coeff_poly(&self.vars));
            let mut unknown: Option<&CyclicWord> = None;
            for f in &t.factors {
                match self.known.get(f) {
                    Some(v) => c = c.mul(v),
                    None if unknown.is_none() => unknown = Some(f),
                    None => return Prepared::Deferred,
                }
            }
            match unknown {
                None => row.constant = row.constant.add(&c),
                Some(u) => add_coeff(&mut row.coeffs, u, &c),
            }
        }
        Prepared::Linear(row)
    }

    /// Move known unknowns into the constant.
    fn substitute(&self, row: &mut Row) {
        let hits: Vec<CyclicWord> = row
            .coeffs
            .keys()
            .filter(|w| self.known.contains_key(*w))
            .cloned()
            .collect();
        for w in hits {
            let c = row.coeffs.remove(&w).expect("present");
            row.constant = row.constant.add(&c.mul(&self.known[&w]));
        }
    }

    fn insert(&mut self, mut row: Row, eq: &SdeEquation) -> Result<(), SolveError> {
        loop {
            self.substitute(&mut row);
            let Some((u, c)) = row.coeffs.iter().next_back().map(|(u, c)| (u.clone(), c.clone()))
            else {
                return self.constant_row(row.constant, eq);
            };
            if let Some(piv) = self.pivots.get(&u) {
                for (w, pc) in &piv.coeffs {
                    add_coeff(&mut row.coeffs, w, &pc.mul(&c).neg());
                }
                row.constant = row.constant.sub(&piv.constant.mul(&c));
                row.coeffs.remove(&u);
            } else {
                let inv = c.recip().expect("stored coefficients are non-zero");
                for v in row.coeffs.values_mut() {
                    *v = v.mul(&inv);
                }
                row.constant = row.constant.mul(&inv);
                self.pivots.insert(u, row);
                return Ok(());
            }
        }
    }

    fn constant_row(&mut self, constant: RatFunc, eq: &SdeEquation) -> Result<(), SolveError> {
        if constant.is_zero() {
            return Ok(());
        }
        let num = constant.num().primitive();
        if (1..self.vars.len()).any(|i| num.depends_on(i)) {
            if !self.relations.contains(&num) {
                self.relations.push(num);
            }
            Ok(())
        } else {
            Err(SolveError::InconsistentSystem {
                residual: format!("{constant} (from insertion {} {})", (b'A' + eq.p) as char, eq.w),
            })
        }
    }

    /// Resolve pivots whose other unknowns are all known, smallest first.
    fn back_substitute(&mut self) -> usize {
        let mut resolved = 0;
        let keys: Vec<CyclicWord> = self.pivots.keys().cloned().collect();
        for u in keys {
            let row = &self.pivots[&u];
            if row.coeffs.iter().any(|(w, _)| *w != u && !self.known.contains_key(w)) {
                continue;
            }
            let mut val = row.constant.clone();
            for (w, c) in &row.coeffs {
                if *w != u {
                    val = val.add(&c.mul(&self.known[w]));
                }
            }
            self.known.insert(u.clone(), val.neg());
            self.pivots.remove(&u);
            resolved += 1;
        }
        resolved
    }
}

fn add_coeff(coeffs: &mut BTreeMap<CyclicWord, RatFunc>, w: &CyclicWord, c: &RatFunc) {
    if c.is_zero() {
        return;
    }
    match coeffs.get_mut(w) {
        Some(v) => {
            *v = v.add(c);
            if v.is_zero() {
                coeffs.remove(w);
            }
        }
        None => {
            coeffs.insert(w.clone(), c.clone());
        }
    }
}

/// All canonical cyclic words of length `≤ len` over `m` letters.
pub fn necklaces(m: usize, len: usize) -> Vec<CyclicWord> {
    let mut out: Vec<CyclicWord> = basis(m, len)
        .iter()
        .filter_map(|w| {
            let c = canonicalize(w);
            (c.word() == w).then_some(c)
        })
        .collect();
    out.sort();
    out
}

/// Solve with default options.
pub fn solve_moments(model: &ModelSpec, cutoff: usize) -> Result<MomentTable, SolveError> {
    solve_moments_with(model, cutoff, SolveOptions::default())
}

pub fn solve_moments_with(
    model: &ModelSpec,
    cutoff: usize,
    opts: SolveOptions,
) -> Result<MomentTable, SolveError> {
    let needed = model.generators.iter().map(|g| g.word.len()).max().unwrap_or(0);
    if cutoff < needed {
        return Err(SolveError::CutoffTooSmall { cutoff, needed });
    }
    let sym = model.symmetry_for(opts.use_symmetry).clone();
    let mut solver = Solver::new(model, &sym);
    let targets: Vec<CyclicWord> = necklaces(model.m, cutoff)
        .into_iter()
        .filter(|w| !w.is_empty())
        .filter_map(|w| match sym.reduce(&w) {
            Reduced::Zero => None,
            Reduced::Rep(rep, _) => Some(rep),
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut done: BTreeSet<(u8, crate::words::Word)> = BTreeSet::new();
    let mut deferred: Vec<SdeEquation> = Vec::new();
    let start = cutoff.saturating_sub(1);
    let mut insertion_len = start;
    for len in start..=cutoff + opts.extra_len {
        insertion_len = len;
        for eq in generate_system_with(model, len, opts.use_symmetry, opts.exec) {
            if done.insert((eq.p, eq.w.clone())) {
                deferred.push(eq);
            }
        }
        loop {
            let mut progress = false;
            let mut still = Vec::new();
            for eq in std::mem::take(&mut deferred) {
                match solver.prepare(&eq) {
                    Prepared::Linear(row) => {
                        solver.insert(row, &eq)?;
                        progress = true;
                    }
                    Prepared::Deferred => still.push(eq),
                }
            }
            deferred = still;
            if solver.back_substitute() > 0 {
                progress = true;
            }
            if !progress {
                break;
            }
        }
        if targets.iter().all(|w| solver.known.contains_key(w)) {
            break;
        }
    }

    let mut entries = BTreeMap::new();
    let mut unresolved = BTreeSet::new();
    let vars = model.vars().clone();
    for w in necklaces(model.m, cutoff) {
        if w.is_empty() {
            entries.insert(w, RatFunc::one(&vars));
            continue;
        }
        match sym.reduce(&w) {
            Reduced::Zero => {
                entries.insert(w, RatFunc::zero(&vars));
            }
            Reduced::Rep(rep, sign) => match solver.known.get(&rep) {
                Some(v) => {
                    entries.insert(w, if sign < 0 { v.neg() } else { v.clone() });
                }
                None => {
                    unresolved.insert(w);
                }
            },
        }
    }
    Ok(MomentTable {
        model: model.clone(),
        cutoff,
        entries,
        unresolved,
        relations: solver.relations,
        insertion_len,
        use_symmetry: opts.use_symmetry,
    })
}

impl MomentTable {
    pub fn vars(&self) -> &Vars {
        self.model.vars()
    }

    pub fn get(&self, w: &CyclicWord) -> Option<&RatFunc> {
        self.entries.get(w)
    }

    pub fn require(&self, w: &CyclicWord) -> Result<&RatFunc, SolveError> {
        self.entries
            .get(w)
            .ok_or_else(|| SolveError::MissingMoment(w.clone()))
    }

    pub fn is_closed(&self) -> bool {
        self.unresolved.is_empty()
    }

    /// Value of `Σ terms` after substituting the table; zero for a
    /// consistent table. `None` when a moment lies beyond the cutoff.
    pub fn residual(&self, eq: &SdeEquation) -> Option<RatFunc> {
        let vars = self.vars();
        let mut acc = RatFunc::zero(vars);
        for t in &eq.terms {
            let mut c = RatFunc::from_poly(t.coeff_poly(vars));
            for f in &t.factors {
                c = c.mul(self.entries.get(f)?);
            }
            acc = acc.add(&c);
        }
        Some(acc)
    }

    /// `{"model": ..., "cutoff": ..., "moments": {word: {"value", "num", "den"}}}`.
    pub fn to_json(&self) -> Value {
        let moments: serde_json::Map<String, Value> = self
            .entries
            .iter()
            .map(|(w, f)| {
                (
                    w.to_string(),
                    json!({
                        "value": f.to_string(),
                        "num": f.num().to_string(),
                        "den": f.den().to_string(),
                    }),
                )
            })
            .collect();
        json!({
            "cutoff": self.cutoff,
            "variables": self.vars().to_vec(),
            "moments": moments,
            "unresolved": self.unresolved.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "generator_relations": self.relations.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// `dF₀/dg = −Σ coeff · m_term`.
pub fn free_energy_derivative(table: &MomentTable) -> Result<RatFunc, SolveError> {
    let mut acc = RatFunc::zero(table.vars());
    for t in &table.model.terms {
        let m = table.require(&t.word)?;
        acc = acc.sub(&m.scale(&t.coeff));
    }
    Ok(acc)
}

/// Summary of how the declared generators performed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchSpaceReport {
    pub declared: Vec<String>,
    /// Generators that appear in at least one solved entry.
    pub used: Vec<String>,
    /// Generators that a relation allows eliminating.
    pub eliminable: Vec<String>,
    /// Words left undetermined (the search space is larger than declared).
    pub unresolved: Vec<String>,
    pub relations: Vec<String>,
}

impl SearchSpaceReport {
    /// Generator count after removing eliminable ones.
    pub fn dimension(&self) -> usize {
        self.declared.len() - self.eliminable.len()
    }
}

pub fn report_search_space(table: &MomentTable) -> SearchSpaceReport {
    let gens = &table.model.generators;
    let declared: Vec<String> = gens.iter().map(|g| g.symbol.clone()).collect();
    let used = gens
        .iter()
        .enumerate()
        .filter(|(i, g)| {
            table
                .entries
                .iter()
                .any(|(w, f)| *w != g.word && f.depends_on(i + 1))
        })
        .map(|(_, g)| g.symbol.clone())
        .collect();
    let mut eliminable = Vec::new();
    for rel in &table.relations {
        if let Some(i) = (1..=gens.len()).rev().find(|&i| rel.depends_on(i)) {
            let s = gens[i - 1].symbol.clone();
            if !eliminable.contains(&s) {
                eliminable.push(s);
            }
        }
    }
    SearchSpaceReport {
        declared,
        used,
        eliminable,
        unresolved: table.unresolved.iter().map(moment_name).collect(),
        relations: table.relations.iter().map(|p| format!("{p} = 0")).collect(),
    }
}

/// Human-readable one-line summary used by the command line.
pub fn describe_report(r: &SearchSpaceReport) -> String {
    format!(
        "declared [{}], used [{}], eliminable [{}], unresolved {}",
        r.declared.join(", "),
        r.used.join(", "),
        r.eliminable.join(", "),
        r.unresolved.len()
    )
}

/// Coefficient text helper shared with the command line.
pub fn rational_text(q: &num_rational::BigRational) -> String {
    format_rational(q)
}
