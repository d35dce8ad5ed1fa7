//! Colored polygon gluings: the combinatorial side of the formal matrix
//! integral.
//!
//! A gluing is a pair of permutations on edge slots ("darts"): the rotation
//! `σ` walking around each polygon and the pairing involution `α`. Faces are
//! the polygons, edges are the pairs, vertices are the cycles of `σ∘α`, and
//! the genus follows from `V − E + F = 2 − 2γ`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::MapsError;
use crate::par::{map_slice, Execution};
use crate::words::Word;

/// Largest number of edge slots the enumerator accepts.
pub const EDGE_CAP: usize = 16;

/// Gluing counts keyed by genus.
pub type GenusCounts = BTreeMap<usize, u64>;

/// Polygons to glue: one rooted polygon plus unrooted polygons drawn from
/// weighted potential terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingProblem {
    pub rooted: Word,
    /// `(polygon, coefficient)`: each copy used contributes `−coefficient·g`.
    pub polygons: Vec<(Word, BigRational)>,
    /// Restrict the weighted sums to this genus (counts keep every genus).
    pub genus: Option<usize>,
}

/// Result of [`count_gluings`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GluingCount {
    /// `by_j[j]` counts connected gluings with `j` unrooted polygons (summed
    /// over ordered choices of polygon types), per genus.
    pub by_j: Vec<GenusCounts>,
    /// `weights[j]`: `(1/j!) Σ_{types} Π(−c) · #gluings` at the selected
    /// genus — the coefficient of `g^j` in the moment.
    #[serde(serialize_with = "ser_rationals")]
    pub weights: Vec<BigRational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for q in v {
        seq.serialize_element(&crate::exactalg::format_rational(q))?;
    }
    seq.end()
}

/// Darts of a set of polygons.
struct Layout {
    colors: Vec<u8>,
    /// Next dart around the same polygon.
    next: Vec<usize>,
    /// Polygon index of each dart.
    face: Vec<usize>,
    faces: usize,
}

impl Layout {
    fn new(polys: &[&Word]) -> Layout {
        let mut colors = Vec::new();
        let mut next = Vec::new();
        let mut face = Vec::new();
        for (f, w) in polys.iter().enumerate() {
            let base = colors.len();
            let n = w.len();
            for (i, &c) in w.letters().iter().enumerate() {
                colors.push(c);
                next.push(base + (i + 1) % n);
                face.push(f);
            }
        }
        Layout {
            colors,
            next,
            face,
            faces: polys.len(),
        }
    }

    /// Genus of a complete pairing, or `None` if the surface is disconnected.
    fn genus(&self, pair: &[usize]) -> Option<usize> {
        let n = pair.len();
        // Connectivity of polygons through paired edges.
        let mut parent: Vec<usize> = (0..self.faces).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        let mut comps = self.faces;
        for d in 0..n {
            let (a, b) = (find(&mut parent, self.face[d]), find(&mut parent, self.face[pair[d]]));
            if a != b {
                parent[a] = b;
                comps -= 1;
            }
        }
        if comps != 1 {
            return None;
        }
        let mut seen = vec![false; n];
        let mut vertices = 0usize;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            vertices += 1;
            let mut d = s;
            while !seen[d] {
                seen[d] = true;
                d = self.next[pair[d]];
            }
        }
        let edges = n / 2;
        // V − E + F = 2 − 2γ
        let chi = vertices as isize - edges as isize + self.faces as isize;
        Some(((2 - chi) / 2) as usize)
    }

    /// Enumerate color-respecting perfect matchings, calling `visit` on each.
    fn for_each_pairing(&self, visit: &mut dyn FnMut(&[usize])) {
        let n = self.colors.len();
        let mut pair = vec![usize::MAX; n];
        self.rec(&mut pair, visit);
    }

    fn rec(&self, pair: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        let Some(a) = pair.iter().position(|&p| p == usize::MAX) else {
            visit(pair);
            return;
        };
        for b in a + 1..pair.len() {
            if pair[b] == usize::MAX && self.colors[b] == self.colors[a] {
                pair[a] = b;
                pair[b] = a;
                self.rec(pair, visit);
                pair[a] = usize::MAX;
                pair[b] = usize::MAX;
            }
        }
    }

    fn balanced(&self) -> bool {
        let mut count = [0usize; 256];
        for &c in &self.colors {
            count[c as usize] += 1;
        }
        count.iter().all(|c| c % 2 == 0)
    }
}

/// All color-respecting pairings of one polygon's edges, by genus.
pub fn count_pairings(word: &Word) -> Result<GenusCounts, MapsError> {
    if word.len() % 2 == 1 {
        return Err(MapsError::OddLength(word.to_string()));
    }
    if word.len() > EDGE_CAP {
        return Err(MapsError::ResourceCap {
            edges: word.len(),
            cap: EDGE_CAP,
        });
    }
    let layout = Layout::new(&[word]);
    let mut out = GenusCounts::new();
    if word.is_empty() {
        out.insert(0, 1);
        return Ok(out);
    }
    layout.for_each_pairing(&mut |p| {
        let g = layout.genus(p).expect("a single polygon is connected");
        *out.entry(g).or_default() += 1;
    });
    Ok(out)
}

/// Connected gluings of the rooted polygon with up to `max_polygons`
/// unrooted ones, and the weighted sums that give the moment's Taylor
/// coefficients at the selected genus (planar by default).
pub fn count_gluings(p: &GluingProblem, max_polygons: usize) -> Result<GluingCount, MapsError> {
    count_gluings_with(p, max_polygons, Execution::available())
}

pub fn count_gluings_with(p: &GluingProblem, max_polygons: usize, exec: Execution) -> Result<GluingCount, MapsError> {
    let genus = p.genus.unwrap_or(0);
    let mut by_j = Vec::with_capacity(max_polygons + 1);
    let mut weights = Vec::with_capacity(max_polygons + 1);
    let mut factorial = BigInt::one();
    for j in 0..=max_polygons {
        if j > 0 {
            factorial *= j;
        }
        let tuples = ordered_tuples(p.polygons.len(), j);
        let results = map_slice(exec, &tuples, |t| -> Result<(GenusCounts, BigRational), MapsError> {
            let mut polys: Vec<&Word> = vec![&p.rooted];
            let mut weight = BigRational::one();
            for &k in t {
                polys.push(&p.polygons[k].0);
                weight *= -p.polygons[k].1.clone();
            }
            let edges: usize = polys.iter().map(|w| w.len()).sum();
            if edges > EDGE_CAP {
                return Err(MapsError::ResourceCap { edges, cap: EDGE_CAP });
            }
            let layout = Layout::new(&polys);
            let mut counts = GenusCounts::new();
            if p.rooted.is_empty() && j == 0 {
                counts.insert(0, 1);
            } else if layout.balanced() && edges > 0 {
                layout.for_each_pairing(&mut |pair| {
                    if let Some(g) = layout.genus(pair) {
                        *counts.entry(g).or_default() += 1;
                    }
                });
            }
            let hits = counts.get(&genus).copied().unwrap_or(0);
            Ok((counts, weight * BigRational::from_integer(hits.into())))
        });
        let mut total = GenusCounts::new();
        let mut w = BigRational::zero();
        for r in results {
            let (counts, contribution) = r?;
            for (g, c) in counts {
                *total.entry(g).or_default() += c;
            }
            w += contribution;
        }
        by_j.push(total);
        weights.push(w / BigRational::from_integer(factorial.clone()));
    }
    Ok(GluingCount { by_j, weights })
}

fn ordered_tuples(types: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..j {
        let mut next = Vec::with_capacity(out.len() * types);
        for t in &out {
            for k in 0..types {
                let mut u = t.clone();
                u.push(k);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// `⌈ℓ/d⌉`: the lowest power of `g` at which a word of length `ℓ` whose
/// planar self-gluings all vanish can receive a contribution from
/// potential terms of length at most `d`.
pub fn theorem_bound(len: usize, d: usize) -> usize {
    len.div_ceil(d)
}
