//! Alphabet, words and cyclic canonical forms.
//!
//! A [`Word`] is a finite product of matrix variables; letter `0` prints as
//! `A`, `1` as `B` and so on. Tracial moments only depend on the rotation
//! class of a word, which is represented by [`CyclicWord`] (the
//! lexicographically least rotation). The empty word prints as `1`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::ParseError;

/// Largest alphabet supported by the printed form.
pub const MAX_LETTERS: usize = 26;

/// A matrix variable, `0 ↔ A`, `1 ↔ B`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub u8);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn as_char(self) -> char {
        (b'A' + self.0) as char
    }

    pub fn from_char(c: char) -> Option<Letter> {
        if c.is_ascii_uppercase() {
            Some(Letter(c as u8 - b'A'))
        } else {
            None
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

pub(crate) type Letters = SmallVec<[u8; 24]>;

/// A plain (non-cyclic) word in the matrix variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Letters);

impl Word {
    pub fn empty() -> Word {
        Word(Letters::new())
    }

    pub fn from_letters<I: IntoIterator<Item = u8>>(letters: I) -> Word {
        Word(letters.into_iter().collect())
    }

    /// `letter^k`.
    pub fn power(letter: u8, k: usize) -> Word {
        Word(std::iter::repeat_n(letter, k).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        Word(out)
    }

    pub fn push(&mut self, letter: u8) {
        self.0.push(letter);
    }

    /// Rotate left by `k` positions.
    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let k = k % self.0.len();
        let mut out = Letters::with_capacity(self.0.len());
        out.extend_from_slice(&self.0[k..]);
        out.extend_from_slice(&self.0[..k]);
        Word(out)
    }

    /// Letters in reverse order: the adjoint of a product of Hermitian matrices.
    pub fn reverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Largest letter index plus one (0 for the empty word).
    pub fn alphabet_size(&self) -> usize {
        self.0.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }

    /// Number of occurrences of `letter`.
    pub fn count(&self, letter: u8) -> usize {
        self.0.iter().filter(|&&l| l == letter).count()
    }

    pub fn canonical(&self) -> CyclicWord {
        canonicalize(self)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest first, then lexicographic.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for &l in &self.0 {
            write!(f, "{}", Letter(l))?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Ok(Word::empty());
        }
        s.chars()
            .map(|c| {
                Letter::from_char(c)
                    .map(|l| l.0)
                    .ok_or_else(|| ParseError::new(format!("invalid letter {c:?} in word {s:?}")))
            })
            .collect::<Result<Letters, _>>()
            .map(Word)
    }
}

/// A rotation class of words, stored as its least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord(Word);

impl CyclicWord {
    pub fn empty() -> CyclicWord {
        CyclicWord(Word::empty())
    }

    /// The canonical representative.
    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        self.0.letters()
    }

    /// Number of distinct rotations that fix the word (the size of its
    /// cyclic stabiliser).
    pub fn rotation_symmetry(&self) -> usize {
        let n = self.len();
        if n == 0 {
            return 1;
        }
        (1..=n).filter(|&k| self.0.rotate(k) == self.0).count()
    }

    /// Canonical form of the reversed word.
    pub fn reversed(&self) -> CyclicWord {
        canonicalize(&self.0.reverse())
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for CyclicWord {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(canonicalize(&s.parse()?))
    }
}

impl From<&Word> for CyclicWord {
    fn from(w: &Word) -> Self {
        canonicalize(w)
    }
}

/// Start index of the lexicographically least rotation (Booth's algorithm).
fn least_rotation(s: &[u8]) -> usize {
    let n = s.len();
    if n < 2 {
        return 0;
    }
    let at = |i: i64| s[(i as usize) % n];
    let mut failure = vec![-1i64; 2 * n];
    let mut k: i64 = 0;
    for j in 1..(2 * n) as i64 {
        let sj = at(j);
        let mut i = failure[(j - k - 1) as usize];
        while i != -1 && sj != at(k + i + 1) {
            if sj < at(k + i + 1) {
                k = j - i - 1;
            }
            i = failure[i as usize];
        }
        if sj != at(k + i + 1) {
            if sj < at(k) {
                k = j;
            }
            failure[(j - k) as usize] = -1;
        } else {
            failure[(j - k) as usize] = i + 1;
        }
    }
    (k as usize) % n
}

pub fn canonicalize(w: &Word) -> CyclicWord {
    let k = least_rotation(w.letters());
    if k == 0 {
        CyclicWord(w.clone())
    } else {
        CyclicWord(w.rotate(k))
    }
}

pub fn reverse(w: &Word) -> Word {
    w.reverse()
}

/// All words over `m` letters of length at most `max_len`, shortest first
/// and lexicographic within each length.
pub fn basis(m: usize, max_len: usize) -> Vec<Word> {
    assert!(m >= 1, "alphabet must be non-empty");
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * m);
        for w in &layer {
            for l in 0..m as u8 {
                let mut x = w.clone();
                x.push(l);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Smallest `L` such that `basis(m, L)` has at least `n` words.
pub fn basis_len_for(m: usize, n: usize) -> usize {
    let mut total = 1usize;
    let mut layer = 1usize;
    let mut len = 0usize;
    while total < n {
        layer *= m;
        total += layer;
        len += 1;
    }
    len
}
