//! Noncommutative Hankel (moment) matrices, exact positive-semidefiniteness
//! tests, and symbolic principal-minor constraints.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{AlgebraError, HankelError};
use crate::exactalg::{det_bareiss, format_rational, Poly, RatFunc, Vars};
use crate::model::{ModelSpec, Reduced};
use crate::reduce::MomentTable;
use crate::words::{basis, basis_len_for, canonicalize, reverse, CyclicWord, Word};

/// Word basis and entry words of an `n × n` Hankel matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HankelSpec {
    pub basis: Vec<Word>,
    /// `entries[i][j] = canonicalize(reverse(basis[i]) · basis[j])`.
    pub entries: Vec<Vec<CyclicWord>>,
}

impl HankelSpec {
    /// First `n` words of the length-then-lexicographic basis.
    pub fn new(m: usize, n: usize) -> HankelSpec {
        let mut b = basis(m, basis_len_for(m, n));
        b.truncate(n);
        HankelSpec::from_basis(b)
    }

    pub fn from_basis(basis: Vec<Word>) -> HankelSpec {
        let entries = basis
            .iter()
            .map(|wi| {
                let r = reverse(wi);
                basis.iter().map(|wj| canonicalize(&r.concat(wj))).collect()
            })
            .collect();
        HankelSpec { basis, entries }
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    /// Longest entry word.
    pub fn max_entry_len(&self) -> usize {
        self.entries
            .iter()
            .flatten()
            .map(|w| w.len())
            .max()
            .unwrap_or(0)
    }

    /// Partition of the rows into blocks that the model's sign symmetries
    /// decouple: rows whose words pick up different signs under some
    /// negation meet only in entries forced to zero. The matrix is PSD iff
    /// every block is.
    pub fn sector_blocks(&self, model: &ModelSpec) -> Vec<Vec<usize>> {
        let negations: Vec<_> = model
            .symmetry()
            .elements()
            .iter()
            .filter(|e| e.perm.iter().enumerate().all(|(i, &p)| p as usize == i))
            .cloned()
            .collect();
        let mut blocks: BTreeMap<Vec<i32>, Vec<usize>> = BTreeMap::new();
        for (i, w) in self.basis.iter().enumerate() {
            let key: Vec<i32> = negations.iter().map(|e| e.apply(w).1).collect();
            blocks.entry(key).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = blocks.into_values().collect();
        out.sort();
        out
    }
}

/// Hankel matrix with rational-function entries. Each distinct entry word
/// is stored once, so evaluation costs one rational-function evaluation per
/// distinct moment.
#[derive(Clone, Debug)]
pub struct HankelMatrix {
    pub vars: Vars,
    /// Distinct entry functions.
    pub funcs: Vec<RatFunc>,
    /// Labels for the distinct entries (word text, or a custom label).
    pub labels: Vec<String>,
    /// `index[i][j]` into `funcs`.
    pub index: Vec<Vec<usize>>,
}

impl HankelMatrix {
    /// Assemble from explicit entries (deduplicated by equality).
    pub fn from_entries(vars: &Vars, m: Vec<Vec<(String, RatFunc)>>) -> Result<HankelMatrix, HankelError> {
        let n = m.len();
        let mut funcs: Vec<RatFunc> = Vec::new();
        let mut labels: Vec<String> = Vec::new();
        let mut index = vec![vec![0usize; n]; n];
        for (i, row) in m.into_iter().enumerate() {
            for (j, (label, f)) in row.into_iter().enumerate() {
                let k = match labels.iter().position(|l| *l == label) {
                    Some(k) => k,
                    None => {
                        funcs.push(f);
                        labels.push(label);
                        funcs.len() - 1
                    }
                };
                index[i][j] = k;
            }
        }
        let h = HankelMatrix {
            vars: vars.clone(),
            funcs,
            labels,
            index,
        };
        h.check_symmetric()?;
        Ok(h)
    }

    pub fn size(&self) -> usize {
        self.index.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &RatFunc {
        &self.funcs[self.index[i][j]]
    }

    /// Full matrix of entries.
    pub fn matrix(&self) -> Vec<Vec<RatFunc>> {
        self.index
            .iter()
            .map(|row| row.iter().map(|&k| self.funcs[k].clone()).collect())
            .collect()
    }

    fn check_symmetric(&self) -> Result<(), HankelError> {
        let n = self.size();
        for i in 0..n {
            for j in i + 1..n {
                if self.index[i][j] != self.index[j][i] && self.entry(i, j) != self.entry(j, i) {
                    return Err(HankelError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Principal submatrix on the given rows.
    pub fn principal(&self, rows: &[usize]) -> Result<HankelMatrix, HankelError> {
        let n = self.size();
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(HankelError::RowOutOfRange { index: bad, size: n });
        }
        Ok(HankelMatrix {
            vars: self.vars.clone(),
            funcs: self.funcs.clone(),
            labels: self.labels.clone(),
            index: rows
                .iter()
                .map(|&i| rows.iter().map(|&j| self.index[i][j]).collect())
                .collect(),
        })
    }

    /// Fix variable `i` in every entry (used to hoist the coupling out of
    /// the inner loop of a scan).
    pub fn specialize(&self, i: usize, value: &BigRational) -> Result<HankelMatrix, AlgebraError> {
        let funcs = self
            .funcs
            .iter()
            .map(|f| f.specialize(i, value))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HankelMatrix {
            vars: self.vars.clone(),
            funcs,
            labels: self.labels.clone(),
            index: self.index.clone(),
        })
    }

    /// Fix variable `i` and remove it from the variable list — a level set
    /// such as `m₄ = 3` becomes a matrix over the remaining variables.
    pub fn restrict(&self, i: usize, value: &BigRational) -> Result<HankelMatrix, AlgebraError> {
        let names: Vec<&str> = self
            .vars
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, s)| s.as_str())
            .collect();
        let target = crate::exactalg::vars(&names);
        let images: Vec<RatFunc> = (0..self.vars.len())
            .map(|j| match j.cmp(&i) {
                std::cmp::Ordering::Less => RatFunc::var(&target, j),
                std::cmp::Ordering::Equal => RatFunc::constant(&target, value.clone()),
                std::cmp::Ordering::Greater => RatFunc::var(&target, j - 1),
            })
            .collect();
        let funcs = self
            .funcs
            .iter()
            .map(|f| f.compose(&images, &target))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HankelMatrix {
            vars: target,
            funcs,
            labels: self.labels.clone(),
            index: self.index.clone(),
        })
    }

    /// Numeric matrix at a point (values for every variable, in order).
    pub fn eval(&self, point: &[BigRational]) -> Result<Vec<Vec<BigRational>>, AlgebraError> {
        let values = self
            .funcs
            .iter()
            .map(|f| f.eval(point))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self
            .index
            .iter()
            .map(|row| row.iter().map(|&k| values[k].clone()).collect())
            .collect())
    }

    /// Entries as polynomial text, row by row.
    pub fn to_text(&self) -> Vec<Vec<String>> {
        self.index
            .iter()
            .map(|row| row.iter().map(|&k| self.funcs[k].to_string()).collect())
            .collect()
    }
}

/// Hankel matrix of the first `n` basis words, entries from the table.
pub fn build_hankel(model: &ModelSpec, table: &MomentTable, n: usize) -> Result<HankelMatrix, HankelError> {
    build_hankel_from(table, &HankelSpec::new(model.m, n))
}

/// Hankel matrix over an explicit spec.
pub fn build_hankel_from(table: &MomentTable, spec: &HankelSpec) -> Result<HankelMatrix, HankelError> {
    let entries = spec
        .entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|w| {
                    let f = table
                        .get(w)
                        .ok_or_else(|| HankelError::MissingMoment(w.clone()))?;
                    Ok((w.to_string(), f.clone()))
                })
                .collect::<Result<Vec<_>, HankelError>>()
        })
        .collect::<Result<Vec<_>, HankelError>>()?;
    HankelMatrix::from_entries(table.vars(), entries)
}

/// Outcome of an exact semidefiniteness test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsdVerdict {
    pub feasible: bool,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// Positive pivots of the symmetric elimination, with the row each was
    /// taken from; rows not listed were identically zero at their turn.
    Pivots(Vec<(usize, String)>),
    /// The elimination met a negative diagonal entry, or a zero diagonal
    /// entry with a non-zero row, at this original row index.
    Violation { row: usize },
}

/// Decide `M ⪰ 0` exactly by symmetric elimination with diagonal pivoting:
/// a negative diagonal entry refutes, a zero diagonal entry forces its row
/// to vanish, and a positive one is eliminated by a Schur complement.
pub fn psd_test_exact(m: &[Vec<BigRational>]) -> Result<PsdVerdict, HankelError> {
    let n = m.len();
    for i in 0..n {
        if m[i].len() != n {
            return Err(HankelError::NotSymmetric { row: i, col: m[i].len() });
        }
        for j in i + 1..n {
            if m[i][j] != m[j][i] {
                return Err(HankelError::NotSymmetric { row: i, col: j });
            }
        }
    }
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut active: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    let infeasible = |row| PsdVerdict {
        feasible: false,
        certificate: Certificate::Violation { row },
    };
    while !active.is_empty() {
        if let Some(&r) = active.iter().find(|&&r| a[r][r].is_negative()) {
            return Ok(infeasible(r));
        }
        let mut pivot = None;
        for &r in &active {
            if a[r][r].is_zero() {
                if active.iter().any(|&c| !a[r][c].is_zero()) {
                    return Ok(infeasible(r));
                }
            } else if pivot.is_none() {
                pivot = Some(r);
            }
        }
        let Some(p) = pivot else { break };
        active.retain(|&r| r != p && !a[r][r].is_zero());
        let d = a[p][p].clone();
        let inv = d.recip();
        for &i in &active {
            if a[i][p].is_zero() {
                continue;
            }
            let f = &a[i][p] * &inv;
            for &j in &active {
                if j < i {
                    continue;
                }
                let v = &a[i][j] - &f * &a[p][j];
                a[i][j] = v.clone();
                a[j][i] = v;
            }
        }
        pivots.push((p, format_rational(&d)));
    }
    Ok(PsdVerdict {
        feasible: true,
        certificate: Certificate::Pivots(pivots),
    })
}

/// Symbolic principal-minor constraint `det ≥ 0`, with denominators
/// cleared by multiplying row and column `i` by the same polynomial `d_i`,
/// so that the cleared determinant differs from the true one by the square
/// `Π d_i²` — the sign is preserved wherever the entries are defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorConstraint {
    /// Cleared determinant, scaled to coprime integer coefficients by a
    /// positive rational.
    pub poly: Poly,
    /// Row multipliers `d_i`.
    pub row_factors: Vec<Poly>,
    /// `poly = content · Π d_i² · det`, `content > 0`.
    pub content: BigRational,
}

impl MinorConstraint {
    /// `Π d_i²`.
    pub fn square_factor(&self) -> Poly {
        let vars = self.poly.vars().clone();
        self.row_factors
            .iter()
            .fold(Poly::one(&vars), |acc, d| acc.mul(&d.mul(d)))
    }
}

fn poly_lcm(a: &Poly, b: &Poly) -> Poly {
    let g = a.gcd(b);
    a.mul(b).div_exact(&g).expect("gcd divides the product").primitive()
}

/// Determinant constraint of the principal minor on `rows`.
pub fn minor_constraint(m: &HankelMatrix, rows: &[usize]) -> Result<MinorConstraint, HankelError> {
    let sub = m.principal(rows)?.matrix();
    let vars = m.vars.clone();
    let k = sub.len();
    let mut factors = Vec::with_capacity(k);
    for row in &sub {
        let d = row
            .iter()
            .fold(Poly::one(&vars), |acc, f| poly_lcm(&acc, f.den()));
        factors.push(d);
    }
    let cleared: Vec<Vec<Poly>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let f = &sub[i][j];
                    let scale = factors[i].mul(&factors[j]);
                    scale
                        .mul(f.num())
                        .div_exact(f.den())
                        .expect("row factor is a multiple of every denominator in the row")
                })
                .collect()
        })
        .collect();
    let det = det_bareiss(&cleared, &vars);
    let (content, poly) = if det.is_zero() {
        (BigRational::one(), det)
    } else {
        let (c, p) = det.integer_primitive();
        // `integer_primitive` normalises the leading sign; keep the true sign.
        if c.is_negative() {
            (c.abs().recip(), p.neg())
        } else {
            (c.recip(), p)
        }
    };
    Ok(MinorConstraint {
        poly,
        row_factors: factors,
        content,
    })
}

/// The 5×5 matrix of the two-matrix bound argument, over the basis
/// `{1, A, B, A², AB}` with the two-matrix symmetries applied. `literal`
/// puts `m_ABAB` in the last diagonal slot as in the published derivation;
/// otherwise the slot holds the basis-faithful `m_{BAAB} = m_AABB`.
pub fn bound_matrix(table: &MomentTable, literal: bool) -> Result<HankelMatrix, HankelError> {
    let w = |s: &str| -> Result<(String, RatFunc), HankelError> {
        let cw: CyclicWord = s.parse().expect("static word");
        let label = if cw.is_empty() { "1".to_string() } else { cw.to_string() };
        let f = table
            .get(&cw)
            .ok_or(HankelError::MissingMoment(cw))?
            .clone();
        Ok((label, f))
    };
    let zero = || (String::from("0"), RatFunc::zero(table.vars()));
    let corner = if literal { "ABAB" } else { "AABB" };
    let rows = vec![
        vec![w("")?, zero(), zero(), w("AA")?, zero()],
        vec![zero(), w("AA")?, zero(), zero(), zero()],
        vec![zero(), zero(), w("BB")?, zero(), zero()],
        vec![w("AA")?, zero(), zero(), w("AAAA")?, zero()],
        vec![zero(), zero(), zero(), zero(), w(corner)?],
    ];
    HankelMatrix::from_entries(table.vars(), rows)
}

/// Does the model's symmetry force `m_w = 0`?
pub fn forced_zero(model: &ModelSpec, w: &CyclicWord) -> bool {
    matches!(model.symmetry().reduce(w), Reduced::Zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::{int, rat};

    fn q(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn gue_hankel_feasible() {
        let m = q(&[&[1, 0, 1, 0], &[0, 1, 0, 2], &[1, 0, 2, 0], &[0, 2, 0, 5]]);
        assert!(psd_test_exact(&m).unwrap().feasible);
    }

    #[test]
    fn variance_violation() {
        let m = vec![vec![int(1), int(1)], vec![int(1), rat(1, 2)]];
        let v = psd_test_exact(&m).unwrap();
        assert!(!v.feasible);
    }

    #[test]
    fn singular_boundary_is_feasible() {
        assert!(psd_test_exact(&q(&[&[1, 1], &[1, 1]])).unwrap().feasible);
        assert!(psd_test_exact(&q(&[&[0, 0], &[0, 3]])).unwrap().feasible);
        assert!(!psd_test_exact(&q(&[&[0, 1], &[1, 3]])).unwrap().feasible);
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(psd_test_exact(&q(&[&[1, 2], &[0, 1]])).is_err());
    }

    #[test]
    fn one_matrix_layout() {
        let spec = HankelSpec::new(1, 4);
        let names: Vec<Vec<usize>> = spec
            .entries
            .iter()
            .map(|r| r.iter().map(|w| w.len()).collect())
            .collect();
        assert_eq!(names, vec![vec![0, 1, 2, 3], vec![1, 2, 3, 4], vec![2, 3, 4, 5], vec![3, 4, 5, 6]]);
    }

    #[test]
    fn restrict_drops_the_variable() {
        let v = crate::exactalg::vars(&["g", "x", "y"]);
        let x = RatFunc::var(&v, 1);
        let y = RatFunc::var(&v, 2);
        let one = RatFunc::one(&v);
        let h = HankelMatrix::from_entries(
            &v,
            vec![
                vec![("1".into(), one), ("x".into(), x.clone())],
                vec![("x".into(), x), ("y".into(), y)],
            ],
        )
        .unwrap();
        let r = h.restrict(2, &int(3)).unwrap();
        assert_eq!(r.vars.len(), 2);
        assert_eq!(r.eval(&[int(0), int(2)]).unwrap(), q(&[&[1, 2], &[2, 3]]));
    }
}
