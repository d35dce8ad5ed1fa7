//! Independent oracles: closed forms and brute-force checks that do not go
//! through the library code paths they are compared with.

use momenta::exactalg::{parse_poly, vars};
use momenta::maps::{count_gluings, GluingProblem, EDGE_CAP};
use momenta::model::Reduced;
use momenta::reduce::necklaces;
use momenta::sde::{generate_system, SdeEquation};
use momenta::series::SeriesEngine;
use momenta::{BigRational, CyclicWord, ModelSpec, TruncSeries, Word};
use num_traits::{One, Zero};

/// `binom(2k, k)/(k + 1)`.
pub fn catalan(k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (2 * k - i) / (i + 1)) / (k + 1)
}

/// `(2k − 1)!!`.
pub fn double_factorial(k: u64) -> u64 {
    (1..2 * k).step_by(2).product()
}

/// Compare weighted planar gluing counts with the series for every word the
/// edge cap allows at `order`; returns the number of words checked.
pub fn check_maps(name: &str, order: usize) -> Result<usize, String> {
    let model = ModelSpec::preset(name).unwrap();
    let d = model.max_term_len();
    let polygons: Vec<(Word, BigRational)> =
        model.terms.iter().map(|t| (t.word.word().clone(), t.coeff.clone())).collect();
    let max_len = EDGE_CAP - order * d;
    let mut engine = SeriesEngine::new(&model, SeriesEngine::default_max_len(&model, max_len, order));
    let mut checked = 0;
    for w in necklaces(model.m, max_len) {
        if w.is_empty() {
            continue;
        }
        let problem = GluingProblem { rooted: w.word().clone(), polygons: polygons.clone(), genus: None };
        let counts = count_gluings(&problem, order).map_err(|e| e.to_string())?;
        let series = engine.moment(&w, order).map_err(|e| e.to_string())?;
        for k in 0..=order {
            if counts.weights[k] != series.coeff(k) {
                return Err(format!(
                    "{name} {w} at order {k}: gluings {} vs series {}",
                    counts.weights[k],
                    series.coeff(k)
                ));
            }
        }
        checked += 1;
    }
    Ok(checked)
}

fn mul_trunc(a: &[BigRational], b: &[BigRational], k: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); k + 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j <= k {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Taylor coefficients of `(4a − a²)/3` with `a = 1 − 3g·a²`, by fixed-point
/// iteration on truncated power series.
pub fn quartic_m2_taylor(k: usize) -> Vec<BigRational> {
    let mut a = vec![BigRational::zero(); k + 1];
    a[0] = BigRational::one();
    for _ in 0..=k {
        let a2 = mul_trunc(&a, &a, k);
        let mut next = vec![BigRational::zero(); k + 1];
        next[0] = BigRational::one();
        for i in 1..=k {
            next[i] = BigRational::from_integer((-3).into()) * &a2[i - 1];
        }
        a = next;
    }
    let a2 = mul_trunc(&a, &a, k);
    let three = BigRational::from_integer(3.into());
    let four = BigRational::from_integer(4.into());
    (0..=k).map(|i| (&four * &a[i] - &a2[i]) / &three).collect()
}

/// `m₂(g)` of the quartic model in floating point.
pub fn quartic_m2(g: f64) -> f64 {
    let a = 2.0 / (1.0 + (1.0 + 12.0 * g).sqrt());
    (4.0 * a - a * a) / 3.0
}

/// Exact determinant by fraction-carrying Gaussian elimination.
pub fn det_exact(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..n {
            let f = &m[r][c] / &m[c][c];
            for j in c..n {
                let v = &f * &m[c][j];
                m[r][j] -= v;
            }
        }
    }
    det
}

/// `"1 - 4g + 36g^2"` → series to `order`.
pub fn series_from_text(s: &str, order: usize) -> TruncSeries {
    let v = vars(&["g"]);
    let p = parse_poly(s, &v).unwrap();
    let mut c = vec![BigRational::zero(); order + 1];
    for (mono, coeff) in p.terms() {
        let e = mono.exps()[0] as usize;
        assert!(e <= order, "{s}: degree beyond order {order}");
        c[e] = coeff.clone();
    }
    TruncSeries::new(c)
}

fn substituted_residual(
    engine: &mut SeriesEngine,
    model: &ModelSpec,
    eq: &SdeEquation,
    swap: Option<(&CyclicWord, &TruncSeries)>,
    k: usize,
) -> TruncSeries {
    let mut acc = TruncSeries::zero(k);
    for t in &eq.terms {
        let shift = t.g_pow as usize;
        if shift > k {
            continue;
        }
        let mut prod = TruncSeries::constant(t.coeff.clone(), k - shift);
        for f in &t.factors {
            let s = match swap.and_then(|(w, reference)| same_orbit(model, f, w).map(|sign| (sign, reference))) {
                Some((sign, reference)) => reference.truncate(k - shift).scale(&BigRational::from_integer(sign.into())),
                None => engine.moment(f, k - shift).unwrap(),
            };
            prod = prod.mul(&s);
        }
        acc = acc.add(&prod.shift_up(shift).truncate(k));
    }
    acc
}

fn sym_rep(model: &ModelSpec, w: &CyclicWord) -> Option<(CyclicWord, i32)> {
    match model.symmetry().reduce(w) {
        Reduced::Zero => None,
        Reduced::Rep(r, s) => Some((r, s)),
    }
}

/// `m_f = sign · m_w` when the two words share a symmetry orbit.
fn same_orbit(model: &ModelSpec, f: &CyclicWord, w: &CyclicWord) -> Option<i32> {
    match (sym_rep(model, f), sym_rep(model, w)) {
        (Some((a, sa)), Some((b, sb))) if a == b => Some(sa * sb),
        _ => None,
    }
}

/// Loop equations with insertions shorter than `w` that contain `w`.
fn equations_with(model: &ModelSpec, w: &CyclicWord) -> Vec<SdeEquation> {
    let rep = sym_rep(model, w).map(|r| r.0);
    generate_system(model, w.len().saturating_sub(1), true)
        .into_iter()
        .filter(|eq| eq.moments().iter().any(|f| sym_rep(model, f).map(|r| r.0) == rep))
        .collect()
}

/// Round-trip check of a reference series for `m_w`: the loop equations that
/// contain `w` must all vanish to `order` with our expansion, and the first
/// one that fails once `w` is replaced by `reference` is returned.
pub fn refute_series(model: &ModelSpec, w: &CyclicWord, reference: &TruncSeries, order: usize) -> Result<Option<String>, String> {
    let d = model.max_term_len();
    let mut engine = SeriesEngine::new(model, SeriesEngine::default_max_len(model, w.len() + d, order));
    let eqs = equations_with(model, w);
    for eq in &eqs {
        let ours = substituted_residual(&mut engine, model, eq, None, order);
        if !ours.is_zero() {
            return Err(format!("our expansion leaves residual {ours} in the loop equation for {}", eq.label()));
        }
    }
    for eq in &eqs {
        let r = substituted_residual(&mut engine, model, eq, Some((w, reference)), order);
        if !r.is_zero() {
            return Ok(Some(format!("{}·{}", (b'A' + eq.p) as char, eq.w)));
        }
    }
    Ok(None)
}

/// Every symmetry-reduced loop equation with insertions up to `len` vanishes
/// on the expansion through `order`; returns the number checked.
pub fn expansion_residuals_vanish(model: &ModelSpec, len: usize, order: usize) -> Result<usize, String> {
    let d = model.max_term_len();
    let mut engine = SeriesEngine::new(model, SeriesEngine::default_max_len(model, len + d, order));
    let eqs = generate_system(model, len, true);
    for eq in &eqs {
        let r = engine.residual(eq, order).map_err(|e| e.to_string())?;
        if !r.is_zero() {
            return Err(format!("residual {r} for insertion {}", eq.label()));
        }
    }
    Ok(eqs.len())
}
