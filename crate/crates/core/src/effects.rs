//! Effect words, regular fractions and their defining contrast subgroups.
//!
//! Factors are numbered `F1..Fn` in text and `0..n` in code. For up to 26
//! factors the letters `A, B, ...` are accepted as aliases, so `ABEF` and
//! `F1F2F5F6` parse to the same word.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::{self, Gf2Matrix, Gf2Vector};

/// Largest factor count for which letter names are available.
pub const MAX_LETTERS: usize = 26;

/// Letter for a 0-based factor index.
pub fn factor_letter(i: usize) -> char {
    assert!(i < MAX_LETTERS, "no letter for factor {}", i + 1);
    (b'A' + i as u8) as char
}

/// `A`, `B`, ... when `n` allows it, else `F1`, `F2`, ...
pub fn factor_name(i: usize, n: usize) -> String {
    if n <= MAX_LETTERS {
        factor_letter(i).to_string()
    } else {
        format!("F{}", i + 1)
    }
}

/// Parses a single factor name (`C`, `F3`, `F_{10}`) to a 0-based index.
pub fn parse_factor(s: &str, n: usize) -> Result<usize> {
    let tokens = tokenize_factors(s.trim(), n)?;
    match tokens.as_slice() {
        [f] => Ok(*f),
        _ => Err(Error::Parse(format!("expected a single factor, got {s:?}"))),
    }
}

fn tokenize_factors(s: &str, n: usize) -> Result<Vec<usize>> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'F'
            && i + 1 < bytes.len()
            && (bytes[i + 1].is_ascii_digit() || bytes[i + 1] == b'_')
        {
            i += 1;
            if bytes[i] == b'_' {
                i += 1;
            }
            let braced = i < bytes.len() && bytes[i] == b'{';
            if braced {
                i += 1;
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(Error::Parse(format!("missing factor number in {s:?}")));
            }
            let idx: usize = s[start..i]
                .parse()
                .map_err(|_| Error::Parse(format!("bad factor number in {s:?}")))?;
            if braced {
                if i >= bytes.len() || bytes[i] != b'}' {
                    return Err(Error::Parse(format!("unclosed brace in {s:?}")));
                }
                i += 1;
            }
            if idx == 0 || idx > n {
                return Err(Error::Parse(format!("factor F{idx} out of range 1..={n}")));
            }
            out.push(idx - 1);
        } else if c.is_ascii_uppercase() {
            let idx = (c - b'A') as usize;
            if idx >= n {
                return Err(Error::Parse(format!(
                    "factor {} out of range for {n} factors",
                    c as char
                )));
            }
            out.push(idx);
            i += 1;
        } else {
            return Err(Error::Parse(format!(
                "unexpected character {:?} in {s:?}",
                c as char
            )));
        }
    }
    Ok(out)
}

/// A nonempty set of factors: a main effect, an interaction or a defining word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EffectWord {
    n: u8,
    mask: u64,
}

impl EffectWord {
    pub fn new(n: usize, mask: u64) -> Result<Self> {
        if n == 0 || n > gf2::MAX_LEN {
            return Err(Error::Shape(format!(
                "factor count must be in 1..=64, got {n}"
            )));
        }
        if mask == 0 {
            return Err(Error::Parse("effect word must be nonempty".into()));
        }
        if n < 64 && mask >> n != 0 {
            return Err(Error::Parse(format!(
                "effect mask {mask:#x} exceeds {n} factors"
            )));
        }
        Ok(Self { n: n as u8, mask })
    }

    pub fn from_factors(n: usize, factors: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &f in factors {
            if f >= n {
                return Err(Error::Parse(format!(
                    "factor index {f} out of range for {n} factors"
                )));
            }
            if mask & (1 << f) != 0 {
                return Err(Error::Parse(format!(
                    "factor {} repeated",
                    factor_name(f, n)
                )));
            }
            mask |= 1 << f;
        }
        Self::new(n, mask)
    }

    pub fn main_effect(n: usize, f: usize) -> Result<Self> {
        Self::from_factors(n, &[f])
    }

    pub fn interaction(n: usize, a: usize, b: usize) -> Result<Self> {
        Self::from_factors(n, &[a, b])
    }

    /// Parses letter (`ABEF`) or indexed (`F1F2F5F6`, `F_1F_{10}`) notation.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let factors = tokenize_factors(s.trim(), n)?;
        if factors.is_empty() {
            return Err(Error::Parse("empty effect word".into()));
        }
        Self::from_factors(n, &factors)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn mask(&self) -> u64 {
        self.mask
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.mask.count_ones() as usize
    }

    #[inline]
    pub fn contains(&self, factor: usize) -> bool {
        factor < 64 && (self.mask >> factor) & 1 == 1
    }

    pub fn factors(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&f| self.contains(f))
    }

    /// Generalised interaction `self · other`, or `None` for the identity.
    pub fn product(&self, other: &Self) -> Option<Self> {
        let mask = self.mask ^ other.mask;
        (mask != 0).then_some(Self { n: self.n, mask })
    }

    pub fn to_letters(&self) -> String {
        self.factors().map(factor_letter).collect()
    }

    pub fn to_indexed(&self) -> String {
        self.factors().map(|f| format!("F{}", f + 1)).collect()
    }

    /// Letters when the factor count allows it, otherwise indexed form.
    pub fn render(&self) -> String {
        if self.n() <= MAX_LETTERS {
            self.to_letters()
        } else {
            self.to_indexed()
        }
    }

    /// For a two-factor word, its factors in ascending order.
    pub fn as_pair(&self) -> Option<(usize, usize)> {
        if self.order() != 2 {
            return None;
        }
        let mut it = self.factors();
        Some((it.next()?, it.next()?))
    }

    /// Characteristic vector of length `n`.
    pub fn to_vector(&self) -> Gf2Vector {
        Gf2Vector::from_mask(self.n(), self.mask).expect("word fits its factor count")
    }
}

impl fmt::Debug for EffectWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Display for EffectWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// A regular `2^(n-p)` fraction given by `p` independent defining words.
///
/// The principal fraction is the set of runs with even overlap with every
/// defining word, so the all-low run `(1)` always belongs to it.
///
/// A fraction is in *standard form* when word `i` contains factor
/// `F(n-p+i)` and none of the other last `p` factors; only then is the
/// `p × (n-p)` matrix `Z` defined and `X^II = X^I Zᵀ` applies.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FractionSpec {
    n: usize,
    words: Vec<EffectWord>,
}

impl FractionSpec {
    /// The full factorial (`p = 0`).
    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn new(n: usize, words: Vec<EffectWord>) -> Result<Self> {
        if n == 0 || n > gf2::MAX_LEN {
            return Err(Error::InvalidFraction(format!(
                "factor count {n} out of range"
            )));
        }
        if words.len() >= n {
            return Err(Error::InvalidFraction(format!(
                "{} defining words leave no runs for {n} factors",
                words.len()
            )));
        }
        for w in &words {
            if w.n() != n {
                return Err(Error::InvalidFraction(format!(
                    "word {w} is over {} factors, expected {n}",
                    w.n()
                )));
            }
        }
        let masks: Vec<u64> = words.iter().map(EffectWord::mask).collect();
        if gf2::rank_of_masks(&masks) != words.len() {
            return Err(Error::DependentWords(
                words
                    .iter()
                    .map(EffectWord::render)
                    .collect::<Vec<_>>()
                    .join(", "),
            ));
        }
        Ok(Self { n, words })
    }

    /// Parses words such as `"ABCDH BCEFG"` or `"F1F2F3F6,F1F2F4F5F7"`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let words = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| EffectWord::parse(t, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, words)
    }

    /// Like [`FractionSpec::new`] but reorders the words into standard form,
    /// failing if that is impossible.
    pub fn standard(n: usize, words: Vec<EffectWord>) -> Result<Self> {
        let p = words.len();
        let f = Self::new(n, words)?;
        let mut slots: Vec<Option<EffectWord>> = vec![None; p];
        let added_mask = added_factor_mask(n, p);
        for w in &f.words {
            let added = w.mask() & added_mask;
            if added.count_ones() != 1 {
                return Err(Error::InvalidFraction(format!(
                    "word {} must contain exactly one of the last {p} factors",
                    w.to_indexed()
                )));
            }
            let slot = added.trailing_zeros() as usize - (n - p);
            if slots[slot].replace(*w).is_some() {
                return Err(Error::InvalidFraction(format!(
                    "two words generate factor F{}",
                    n - p + slot + 1
                )));
            }
        }
        Ok(Self {
            n,
            words: slots
                .into_iter()
                .map(|w| w.expect("all slots filled"))
                .collect(),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[EffectWord] {
        &self.words
    }

    pub fn run_count(&self) -> u64 {
        1u64 << (self.n - self.p())
    }

    pub fn is_standard(&self) -> bool {
        let (n, p) = (self.n, self.p());
        let added = added_factor_mask(n, p);
        self.words
            .iter()
            .enumerate()
            .all(|(i, w)| w.mask() & added == 1 << (n - p + i))
    }

    /// The `p × (n-p)` matrix of basic-factor memberships; `None` when `p = 0`.
    pub fn z(&self) -> Result<Option<Gf2Matrix>> {
        let (n, p) = (self.n, self.p());
        if p == 0 {
            return Ok(None);
        }
        if !self.is_standard() {
            return Err(Error::InvalidFraction(
                "Z is only defined for fractions in standard form".into(),
            ));
        }
        let basic = n - p;
        let rows: Vec<Gf2Vector> = self
            .words
            .iter()
            .map(|w| Gf2Vector::from_mask(basic, w.mask() & low_mask(basic)))
            .collect::<Result<_>>()?;
        Gf2Matrix::from_row_vectors(&rows).map(Some)
    }

    /// Whether `run` has even overlap with every defining word.
    pub fn contains(&self, run: &Gf2Vector) -> bool {
        run.len() == self.n
            && self
                .words
                .iter()
                .all(|w| (w.mask() & run.bits()).count_ones().is_multiple_of(2))
    }

    /// All runs of the principal fraction, in ascending binary order.
    pub fn runs(&self) -> Vec<Gf2Vector> {
        let n = self.n;
        // reduced row echelon form of the word matrix; pivots are solved for
        let mut rows: Vec<u64> = self.words.iter().map(EffectWord::mask).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..n {
            let Some(k) = (r..rows.len()).find(|&k| (rows[k] >> col) & 1 == 1) else {
                continue;
            };
            rows.swap(r, k);
            for k in 0..rows.len() {
                if k != r && (rows[k] >> col) & 1 == 1 {
                    rows[k] ^= rows[r];
                }
            }
            pivots.push(col);
            r += 1;
        }
        let pivot_mask: u64 = pivots.iter().map(|&c| 1u64 << c).sum();
        let free: Vec<usize> = (0..n).filter(|c| pivot_mask >> c & 1 == 0).collect();
        let mut out = Vec::with_capacity(1 << free.len());
        for a in 0u64..(1u64 << free.len()) {
            let mut bits = 0u64;
            for (k, &c) in free.iter().enumerate() {
                bits |= ((a >> k) & 1) << c;
            }
            for (row, &pc) in rows.iter().zip(&pivots) {
                if (row & bits).count_ones() & 1 == 1 {
                    bits |= 1 << pc;
                }
            }
            out.push(Gf2Vector::from_mask(n, bits).expect("run fits"));
        }
        out.sort();
        out
    }

    pub fn subgroup(&self) -> ContrastSubgroup {
        ContrastSubgroup::generate(self.n, &self.words).expect("words checked independent")
    }

    pub fn render_words(&self) -> Vec<String> {
        self.words.iter().map(EffectWord::render).collect()
    }
}

impl fmt::Debug for FractionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^({}-{}) {:?}", self.n, self.p(), self.words)
    }
}

fn low_mask(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

fn added_factor_mask(n: usize, p: usize) -> u64 {
    low_mask(n) & !low_mask(n - p)
}

/// The nonidentity elements of the treatment defining contrast subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContrastSubgroup {
    n: usize,
    elements: Vec<EffectWord>,
    wordlength_pattern: Vec<usize>,
    resolution: Option<usize>,
}

impl ContrastSubgroup {
    /// Closes `words` under symmetric difference.
    pub fn generate(n: usize, words: &[EffectWord]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for w in words {
            let snapshot: Vec<u64> = seen.iter().copied().collect();
            if seen.contains(&w.mask()) {
                return Err(Error::DependentWords(format!(
                    "{w} is already generated by the preceding words"
                )));
            }
            seen.insert(w.mask());
            for m in snapshot {
                let prod = m ^ w.mask();
                if prod == 0 || !seen.insert(prod) {
                    return Err(Error::DependentWords(format!(
                        "{w} is already generated by the preceding words"
                    )));
                }
            }
        }
        let mut elements: Vec<EffectWord> = seen
            .into_iter()
            .map(|m| EffectWord::new(n, m))
            .collect::<Result<_>>()?;
        elements.sort_by_key(|w| (w.order(), w.to_vector().key().reverse_bits()));
        let mut wordlength_pattern = vec![0usize; n + 1];
        for w in &elements {
            wordlength_pattern[w.order()] += 1;
        }
        let resolution = elements.iter().map(EffectWord::order).min();
        Ok(Self {
            n,
            elements,
            wordlength_pattern,
            resolution,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[EffectWord] {
        &self.elements
    }

    /// Entry `k` counts subgroup words of order `k`.
    pub fn wordlength_pattern(&self) -> &[usize] {
        &self.wordlength_pattern
    }

    /// Smallest word order; `None` stands for the full factorial (no words).
    pub fn resolution(&self) -> Option<usize> {
        self.resolution
    }

    pub fn contains_mask(&self, mask: u64) -> bool {
        self.elements.iter().any(|w| w.mask() == mask)
    }

    /// The `2^p - 1` aliases of `e` (excluding `e` itself).
    pub fn alias_set(&self, e: &EffectWord) -> Result<Vec<EffectWord>> {
        if self.contains_mask(e.mask()) {
            return Err(Error::EffectInSubgroup(e.render()));
        }
        Ok(self
            .elements
            .iter()
            .map(|w| e.product(w).expect("e is not in the subgroup"))
            .collect())
    }

    /// Aliases of `e` whose order is at most `max_order`.
    pub fn low_order_aliases(&self, e: &EffectWord, max_order: usize) -> Vec<EffectWord> {
        self.elements
            .iter()
            .filter_map(|w| e.product(w))
            .filter(|a| a.order() <= max_order)
            .collect()
    }

    /// For every length-4 word `ABCD`, the pairs `{AB,CD}`, `{AC,BD}`, `{AD,BC}`.
    pub fn two_factor_alias_pairs(&self) -> Vec<(EffectWord, EffectWord)> {
        let mut out = BTreeSet::new();
        for w in self.elements.iter().filter(|w| w.order() == 4) {
            let f: Vec<usize> = w.factors().collect();
            for (a, b, c, d) in [
                (f[0], f[1], f[2], f[3]),
                (f[0], f[2], f[1], f[3]),
                (f[0], f[3], f[1], f[2]),
            ] {
                let x = EffectWord::interaction(self.n, a, b).expect("valid pair");
                let y = EffectWord::interaction(self.n, c, d).expect("valid pair");
                out.insert(if pair_key(&x) <= pair_key(&y) {
                    (x, y)
                } else {
                    (y, x)
                });
            }
        }
        let mut v: Vec<_> = out.into_iter().collect();
        v.sort_by_key(|(x, y)| (pair_key(x), pair_key(y)));
        v
    }
}

fn pair_key(w: &EffectWord) -> (usize, usize) {
    w.as_pair().expect("two-factor word")
}

/// The defining contrast subgroup of a fraction.
pub fn expand_subgroup(f: &FractionSpec) -> Result<ContrastSubgroup> {
    ContrastSubgroup::generate(f.n(), f.words())
}
