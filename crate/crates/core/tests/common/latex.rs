//! Reading the reference appendix blocks: LaTeX `align*` bodies with SDE lines
//! (`LABEL : 0 &= …`) and moment formulas (`m_{W} &= …`).

use std::collections::BTreeMap;
use std::path::PathBuf;

use momenta::model::{ModelSpec, Reduced};
use momenta::sde::SdeEquation;
use momenta::words::canonicalize;
use momenta::{BigRational, CyclicWord, Word};
use num_traits::{Signed, Zero};

pub fn data(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Logical entries of an `align*` body: split at `\\`, with `&`-led
/// continuation lines glued onto the previous entry and `&` removed.
pub fn entries(body: &str) -> Vec<(String, String)> {
    let mut out: Vec<String> = Vec::new();
    for chunk in body.split("\\\\") {
        let t = chunk.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('&') && !out.is_empty() {
            out.last_mut().unwrap().push(' ');
            out.last_mut().unwrap().push_str(&t[1..]);
        } else {
            out.push(t.to_string());
        }
    }
    out.into_iter()
        .map(|e| {
            let e = e.replace('&', "");
            let (lhs, rhs) = e.split_once('=').expect("an equation");
            (lhs.trim().to_string(), rhs.trim().to_string())
        })
        .collect()
}

/// Contents of the brace group starting at `s[open]`, and the index after it.
fn group(s: &[char], open: usize) -> (String, usize) {
    assert_eq!(s[open], '{');
    let mut depth = 0;
    for i in open..s.len() {
        match s[i] {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return (s[open + 1..i].iter().collect(), i + 1);
                }
            }
            _ => {}
        }
    }
    panic!("unbalanced braces in {:?}", s.iter().collect::<String>());
}

/// Rewrite `\frac{a}{b}` as `((a)/(b))` and `m_{…}` / `m_k` through `name`.
pub fn delatex(s: &str, name: &dyn Fn(&str) -> String) -> String {
    let c: Vec<char> = s.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < c.len() {
        if c[i..].starts_with(&['\\', 'f', 'r', 'a', 'c']) {
            let (a, j) = group(&c, i + 5);
            let (b, k) = group(&c, j);
            out.push_str(&format!("(({})/({}))", delatex(&a, name), delatex(&b, name)));
            i = k;
        } else if c[i] == 'm' && c.get(i + 1) == Some(&'_') {
            let (sub, j) = if c[i + 2] == '{' {
                group(&c, i + 2)
            } else {
                (c[i + 2].to_string(), i + 3)
            };
            out.push(' ');
            out.push_str(&name(&sub));
            out.push(' ');
            i = j;
        } else {
            out.push(c[i]);
            i += 1;
        }
    }
    out
}

/// Drop `)` that close nothing; returns the text and how many were dropped.
pub fn drop_unmatched_parens(s: &str) -> (String, usize) {
    let mut depth = 0usize;
    let mut dropped = 0;
    let mut out = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' if depth == 0 => {
                dropped += 1;
                continue;
            }
            ')' => depth -= 1,
            _ => {}
        }
        out.push(ch);
    }
    (out, dropped)
}

/// `A^3B^2` → AAABB.
pub fn parse_label(label: &str) -> Word {
    let c: Vec<char> = label.trim().chars().collect();
    let mut letters = Vec::new();
    let mut i = 0;
    while i < c.len() {
        let l = c[i] as u8 - b'A';
        i += 1;
        let mut k = 1;
        if c.get(i) == Some(&'^') {
            let start = i + 1;
            i = start;
            while i < c.len() && c[i].is_ascii_digit() {
                i += 1;
            }
            k = c[start..i].iter().collect::<String>().parse().unwrap();
        }
        letters.extend(std::iter::repeat_n(l, k));
    }
    Word::from_letters(letters)
}

/// Moment subscript to word: a lone integer `k` is `A^k`; a comma list is an
/// exponent tuple cycling through the alphabet; letters are the word itself.
pub fn subscript_word(sub: &str, m: usize) -> Word {
    let sub = sub.trim();
    if sub.chars().all(|c| c.is_ascii_uppercase()) {
        return sub.parse().unwrap();
    }
    let parts: Vec<usize> = sub.split(',').map(|p| p.trim().parse().unwrap()).collect();
    let mut letters = Vec::new();
    if parts.len() == 1 {
        letters.extend(std::iter::repeat_n(0u8, parts[0]));
    } else {
        for (i, &e) in parts.iter().enumerate() {
            letters.extend(std::iter::repeat_n((i % m) as u8, e));
        }
    }
    Word::from_letters(letters)
}

fn var_name(w: &CyclicWord) -> String {
    format!("w{}", w.word())
}

pub type Normal = BTreeMap<(u32, Vec<CyclicWord>), BigRational>;

/// Symmetry-reduce a list of `(coeff, g power, factor words)`.
pub fn normalize(model: &ModelSpec, terms: impl IntoIterator<Item = (BigRational, u32, Vec<CyclicWord>)>) -> Normal {
    let sym = model.symmetry();
    let mut acc = Normal::new();
    'terms: for (mut c, gp, factors) in terms {
        let mut reps = Vec::new();
        for f in factors {
            if f.is_empty() {
                continue;
            }
            match sym.reduce(&f) {
                Reduced::Zero => continue 'terms,
                Reduced::Rep(r, s) => {
                    if s < 0 {
                        c = -c;
                    }
                    reps.push(r);
                }
            }
        }
        reps.sort();
        *acc.entry((gp, reps)).or_insert_with(BigRational::zero) += c;
    }
    acc.retain(|_, c| !c.is_zero());
    acc
}

pub fn normal_of(model: &ModelSpec, eq: &SdeEquation) -> Normal {
    normalize(model, eq.terms.iter().map(|t| (t.coeff.clone(), t.g_pow, t.factors.clone())))
}

/// Fix the overall sign so the first coefficient is positive.
pub fn sign_fixed(mut n: Normal) -> Normal {
    if n.values().next().is_some_and(|c| c.is_negative()) {
        for c in n.values_mut() {
            *c = -c.clone();
        }
    }
    n
}

/// A reference SDE right-hand side as symmetry-reduced monomials.
pub fn parse_sde_rhs(model: &ModelSpec, rhs: &str) -> Normal {
    let text = delatex(rhs, &|sub| var_name(&canonicalize(&subscript_word(sub, model.m))));
    let mut words: Vec<CyclicWord> = Vec::new();
    for tok in text.split(|c: char| !c.is_ascii_alphanumeric()) {
        if let Some(rest) = tok.strip_prefix('w') {
            let w: CyclicWord = rest.parse().unwrap();
            if !words.contains(&w) {
                words.push(w);
            }
        }
    }
    let mut names = vec!["g".to_string()];
    names.extend(words.iter().map(var_name));
    let vars = momenta::exactalg::vars(&names);
    let p = momenta::exactalg::parse_poly(&text, &vars).unwrap_or_else(|e| panic!("{rhs}: {e}"));
    normalize(
        model,
        p.terms().map(|(mono, c)| {
            let e = mono.exps();
            let mut factors = Vec::new();
            for (k, w) in words.iter().enumerate() {
                for _ in 0..e[k + 1] {
                    factors.push(w.clone());
                }
            }
            (c.clone(), e[0], factors)
        }),
    )
}
