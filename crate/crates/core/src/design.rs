//! Generator matrices, blocks, profile sets and factor groupings.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::effects::{factor_name, EffectWord, FractionSpec};
use crate::error::{Error, Result};
use crate::gf2::{self, Gf2Matrix, Gf2Vector};

/// A `q × n` generator matrix of rank `q`.
///
/// [`GeneratorMatrix::new`] also rejects zero columns, since a zero column
/// confounds that factor's main effect with blocks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GeneratorMatrix {
    inner: Gf2Matrix,
}

impl GeneratorMatrix {
    pub fn new(m: Gf2Matrix) -> Result<Self> {
        let g = Self::full_rank(m)?;
        if let Some(j) = (0..g.n()).find(|&j| g.inner.column(j).is_zero()) {
            return Err(Error::ZeroColumn(j + 1));
        }
        Ok(g)
    }

    /// Checks only the rank; zero columns are allowed.
    pub fn full_rank(m: Gf2Matrix) -> Result<Self> {
        if m.rows() as u32 > gf2::MAX_Q {
            return Err(Error::ExponentOutOfRange(m.rows() as u32));
        }
        let r = gf2::rank(&m);
        if r != m.rows() {
            return Err(Error::RankDeficient {
                rank: r,
                expected: m.rows(),
            });
        }
        Ok(Self { inner: m })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        Self::new(Gf2Matrix::from_rows(rows)?)
    }

    /// Builds the matrix column by column; each column has length `q`.
    pub fn from_columns(columns: &[Gf2Vector]) -> Result<Self> {
        Self::new(Gf2Matrix::from_columns(columns)?)
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.inner.rows()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.inner.cols()
    }

    pub fn matrix(&self) -> &Gf2Matrix {
        &self.inner
    }

    /// Generator row `i` as a treatment combination.
    pub fn row(&self, i: usize) -> Gf2Vector {
        self.inner.row(i)
    }

    pub fn column(&self, j: usize) -> Gf2Vector {
        self.inner.column(j)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.inner.to_rows()
    }
}

impl fmt::Debug for GeneratorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.inner)
    }
}

/// All `2^q` combinations of the generator rows, ascending.
pub fn principal_block(g: &GeneratorMatrix) -> Vec<Gf2Vector> {
    span(g.matrix().row_masks(), g.n())
}

fn span(rows: &[u64], n: usize) -> Vec<Gf2Vector> {
    let mut out = vec![0u64];
    for &r in rows {
        let len = out.len();
        for k in 0..len {
            out.push(out[k] ^ r);
        }
    }
    let mut v: Vec<Gf2Vector> = out
        .into_iter()
        .map(|b| Gf2Vector::from_mask(n, b).expect("row fits"))
        .collect();
    v.sort();
    v.dedup();
    v
}

/// Reduced basis of the row space, used to pick a canonical coset label.
fn reduced_basis(rows: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for &r in rows {
        let mut x = r;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            for b in basis.iter_mut() {
                *b = (*b).min(*b ^ x);
            }
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis
}

fn coset_label(basis: &[u64], x: u64) -> u64 {
    basis.iter().fold(x, |acc, &b| acc.min(acc ^ b))
}

/// The fraction's runs split into cosets of the principal block.
///
/// Runs inside a block ascend; blocks are ordered by their smallest run, so
/// the principal block comes first.
pub fn expand_blocks(g: &GeneratorMatrix, f: &FractionSpec) -> Result<BlockedDesign> {
    let (n, p, q) = (f.n(), f.p(), g.q());
    if g.n() != n {
        return Err(Error::Shape(format!(
            "generator has {} columns but the fraction has {n} factors",
            g.n()
        )));
    }
    if q > n - p {
        return Err(Error::Shape(format!(
            "blocks of size 2^{q} exceed the 2^{} runs of the fraction",
            n - p
        )));
    }
    for i in 0..q {
        if !f.contains(&g.row(i)) {
            return Err(Error::Consistency(format!(
                "generator row {} = {} is not in the principal fraction",
                i + 1,
                run_to_string(&g.row(i))
            )));
        }
    }
    let basis = reduced_basis(g.matrix().row_masks());
    let mut blocks: BTreeMap<u64, Vec<Gf2Vector>> = BTreeMap::new();
    for run in f.runs() {
        if !f.contains(&run) {
            return Err(Error::Consistency(format!(
                "run {} fails the fraction membership test",
                run_to_string(&run)
            )));
        }
        blocks
            .entry(coset_label(&basis, run.bits()))
            .or_default()
            .push(run);
    }
    let mut blocks: Vec<Vec<Gf2Vector>> = blocks
        .into_values()
        .map(|mut b| {
            b.sort();
            b
        })
        .collect();
    blocks.sort_by_key(|b| b[0]);
    let expected = 1usize << (n - p - q);
    if blocks.len() != expected || blocks.iter().any(|b| b.len() != 1 << q) {
        return Err(Error::Consistency(format!(
            "expected {expected} blocks of {} runs",
            1usize << q
        )));
    }
    Ok(BlockedDesign {
        n,
        p,
        q,
        fraction: f.clone(),
        generator: g.clone(),
        blocks,
    })
}

/// Whether some generator row has odd overlap with `e`.
pub fn is_unconfounded(g: &GeneratorMatrix, e: &EffectWord) -> bool {
    g.matrix()
        .row_masks()
        .iter()
        .any(|r| (r & e.mask()).count_ones() & 1 == 1)
}

/// Whether columns `i` and `j` (0-based) of the generator differ.
pub fn interaction_estimable(g: &GeneratorMatrix, i: usize, j: usize) -> Result<bool> {
    if i == j {
        return Err(Error::Parse(format!(
            "an interaction needs two distinct factors, got {} twice",
            factor_name(i, g.n())
        )));
    }
    if i >= g.n() || j >= g.n() {
        return Err(Error::Shape(format!(
            "factor index out of range for {} factors",
            g.n()
        )));
    }
    Ok(g.column(i) != g.column(j))
}

fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Upper bound on the estimable two-factor interactions of a blocked `2^n`.
pub fn phi_max(n: usize, q: u32) -> u64 {
    let k = slots(q) as u64;
    let n = n as u64;
    let v = n / k;
    let w = n - k * v;
    choose2(n) - v * w - k * choose2(v)
}

fn slots(q: u32) -> usize {
    (1usize << q) - 1
}

/// Column multiplicities of a generator, sorted descending and padded to
/// `2^q - 1` entries.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProfileSet {
    q: u32,
    parts: Vec<usize>,
}

impl ProfileSet {
    /// Any multiset of at most `2^q - 1` sizes with a positive total.
    ///
    /// Profiles with fewer than `q` positive parts are representable (they
    /// arise as colour-class sizes) but not realizable by a generator; see
    /// [`ProfileSet::is_realizable`].
    pub fn new(q: u32, parts: &[usize]) -> Result<Self> {
        if q == 0 || q > gf2::MAX_Q {
            return Err(Error::ExponentOutOfRange(q));
        }
        let k = slots(q);
        let mut v: Vec<usize> = parts.iter().copied().filter(|&x| x > 0).collect();
        if v.is_empty() {
            return Err(Error::InvalidProfile(
                "profile needs a positive part".into(),
            ));
        }
        if v.len() > k {
            return Err(Error::InvalidProfile(format!(
                "{} positive parts exceed the {k} columns available for q={q}",
                v.len()
            )));
        }
        v.sort_unstable_by(|a, b| b.cmp(a));
        v.resize(k, 0);
        Ok(Self { q, parts: v })
    }

    /// Parses `⟨3,2,2⟩`, `<3,2,2>`, `3,2,2` or (single digits) `322`.
    pub fn parse(q: u32, s: &str) -> Result<Self> {
        let t = s
            .trim()
            .trim_start_matches(['⟨', '<'])
            .trim_end_matches(['⟩', '>'])
            .trim();
        let parts: Vec<usize> = if t.contains(',') {
            t.split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("bad profile {s:?}")))?
        } else {
            t.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Parse(format!("bad profile {s:?}")))?
        };
        Self::new(q, &parts)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// All `2^q - 1` entries, including trailing zeros.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn positive_parts(&self) -> &[usize] {
        let k = self.parts.iter().take_while(|&&x| x > 0).count();
        &self.parts[..k]
    }

    /// At least `q` positive parts, so an independent column choice exists.
    pub fn is_realizable(&self) -> bool {
        self.positive_parts().len() >= self.q as usize
    }

    /// `v = ⌊n / (2^q - 1)⌋`.
    pub fn v(&self) -> usize {
        self.n() / slots(self.q)
    }

    /// `w = n - (2^q - 1) v`.
    pub fn w(&self) -> usize {
        self.n() - slots(self.q) * self.v()
    }

    /// Largest and smallest entry (over all slots) differ by at most one.
    pub fn is_equitable(&self) -> bool {
        self.parts[0] - self.parts[self.parts.len() - 1] <= 1
    }

    /// Compact digit form (`322`) when every part is a single digit.
    pub fn compact(&self) -> String {
        let pos = self.positive_parts();
        if pos.iter().all(|&x| x < 10) {
            pos.iter().map(|x| x.to_string()).collect()
        } else {
            pos.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

impl fmt::Display for ProfileSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|x| x.to_string()).collect();
        write!(f, "⟨{}⟩", parts.join(","))
    }
}

impl fmt::Debug for ProfileSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The profile set of a generator; zero columns are rejected.
pub fn profile_of(g: &GeneratorMatrix) -> Result<ProfileSet> {
    let mut counts = vec![0usize; slots(g.q() as u32)];
    for j in 0..g.n() {
        let c = g.column(j);
        if c.is_zero() {
            return Err(Error::ZeroColumn(j + 1));
        }
        counts[gf2::xq_index(&c)] += 1;
    }
    ProfileSet::new(g.q() as u32, &counts)
}

/// `Σ_{i<j} n_i n_j`: interactions between different groups.
pub fn count_estimable(p: &ProfileSet) -> u64 {
    let n = p.n() as u64;
    let sq: u64 = p.parts().iter().map(|&x| (x * x) as u64).sum();
    (n * n - sq) / 2
}

/// A partition of the factors; group `i` shares one generator column.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FactorGrouping {
    n: usize,
    groups: Vec<Vec<usize>>,
}

impl FactorGrouping {
    /// Validates that `groups` (0-based factor indices) partition `0..n`.
    /// Group order is kept; members are sorted.
    pub fn new(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::InvalidGrouping("empty group".into()));
            }
            for &f in g {
                if f >= n {
                    return Err(Error::InvalidGrouping(format!(
                        "factor F{} out of range for {n} factors",
                        f + 1
                    )));
                }
                if std::mem::replace(&mut seen[f], true) {
                    return Err(Error::InvalidGrouping(format!(
                        "factor {} appears more than once",
                        factor_name(f, n)
                    )));
                }
            }
        }
        if let Some(f) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGrouping(format!(
                "factor {} is not in any group",
                factor_name(f, n)
            )));
        }
        let groups = groups
            .into_iter()
            .map(|mut g| {
                g.sort_unstable();
                g
            })
            .collect();
        Ok(Self { n, groups })
    }

    /// Groups factors by generator column: largest group first, ties in
    /// canonical column order. Also returns each group's column.
    pub fn from_generator(g: &GeneratorMatrix) -> Result<(Self, Vec<Gf2Vector>)> {
        let mut by_col: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for j in 0..g.n() {
            let c = g.column(j);
            if c.is_zero() {
                return Err(Error::ZeroColumn(j + 1));
            }
            by_col.entry(gf2::xq_index(&c)).or_default().push(j);
        }
        let mut entries: Vec<(usize, Vec<usize>)> = by_col.into_iter().collect();
        entries.sort_by_key(|(idx, members)| (std::cmp::Reverse(members.len()), *idx));
        let xq = gf2::enumerate_xq(g.q() as u32)?;
        let cols = entries.iter().map(|(idx, _)| xq[*idx]).collect();
        let groups = entries.into_iter().map(|(_, m)| m).collect();
        Ok((Self::new(g.n(), groups)?, cols))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Group index of every factor.
    pub fn group_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for (gi, g) in self.groups.iter().enumerate() {
            for &f in g {
                out[f] = gi;
            }
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn profile(&self, q: u32) -> Result<ProfileSet> {
        ProfileSet::new(q, &self.sizes())
    }

    /// Same partition with groups sorted by size (descending), then by
    /// smallest member.
    pub fn canonical(&self) -> Self {
        let mut groups = self.groups.clone();
        groups.sort_by_key(|g| (std::cmp::Reverse(g.len()), g[0]));
        Self { n: self.n, groups }
    }

    /// `{(B,D,G),(A,E),(C,F)}` style, letters when `n` allows.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|g| {
                let names: Vec<String> = g.iter().map(|&f| factor_name(f, self.n)).collect();
                format!("({})", names.join(","))
            })
            .collect();
        format!("{{{}}}", parts.join(","))
    }

    /// `{(F2,F3,F6),(F1,F7),(F4,F5)}` style.
    pub fn render_indexed(&self) -> String {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|g| {
                let names: Vec<String> = g.iter().map(|&f| format!("F{}", f + 1)).collect();
                format!("({})", names.join(","))
            })
            .collect();
        format!("{{{}}}", parts.join(","))
    }
}

impl fmt::Display for FactorGrouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for FactorGrouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Builds the generator whose column `j` is `colmap[group of j]`.
pub fn grouping_to_generator(
    fg: &FactorGrouping,
    q: u32,
    colmap: &[Gf2Vector],
) -> Result<GeneratorMatrix> {
    if q == 0 || q > gf2::MAX_Q {
        return Err(Error::ExponentOutOfRange(q));
    }
    if colmap.len() != fg.len() {
        return Err(Error::Shape(format!(
            "{} columns supplied for {} groups",
            colmap.len(),
            fg.len()
        )));
    }
    for (i, c) in colmap.iter().enumerate() {
        if c.len() != q as usize {
            return Err(Error::Shape(format!(
                "column for group {} has length {}, expected {q}",
                i + 1,
                c.len()
            )));
        }
        if c.is_zero() {
            return Err(Error::ZeroColumn(fg.groups()[i][0] + 1));
        }
        if colmap[..i].contains(c) {
            return Err(Error::InvalidGrouping(format!(
                "column {c} assigned to two groups"
            )));
        }
    }
    let group_of = fg.group_of();
    let columns: Vec<Gf2Vector> = group_of.iter().map(|&g| colmap[g]).collect();
    GeneratorMatrix::from_columns(&columns)
}

/// Distinct columns for `k` groups: each group takes the earliest unused
/// column of the canonical order that still leaves rank `q` reachable.
pub fn canonical_colmap(k: usize, q: u32) -> Result<Vec<Gf2Vector>> {
    let xq = gf2::enumerate_xq(q)?;
    let q = q as usize;
    if k > xq.len() {
        return Err(Error::InvalidGrouping(format!(
            "{k} groups exceed the {} nonzero columns for q={q}",
            xq.len()
        )));
    }
    if k < q {
        return Err(Error::RankDeficient {
            rank: k,
            expected: q,
        });
    }
    let mut chosen: Vec<Gf2Vector> = Vec::with_capacity(k);
    let mut masks: Vec<u64> = Vec::with_capacity(k);
    let mut rank = 0;
    for t in 0..k {
        let remaining = k - t - 1;
        let pick = xq.iter().find(|c| {
            if chosen.contains(c) {
                return false;
            }
            masks.push(c.bits());
            let r = gf2::rank_of_masks(&masks);
            masks.pop();
            r + remaining >= q
        });
        let c = *pick.ok_or_else(|| Error::Consistency("no admissible column".into()))?;
        chosen.push(c);
        masks.push(c.bits());
        rank = gf2::rank_of_masks(&masks);
    }
    debug_assert_eq!(rank, q);
    Ok(chosen)
}

/// `(1)` for the all-low run, otherwise lower-case letters of the high factors.
pub fn run_to_string(run: &Gf2Vector) -> String {
    if run.is_zero() {
        return "(1)".into();
    }
    let n = run.len();
    (0..n)
        .filter(|&i| run.get(i))
        .map(|i| {
            if n <= crate::effects::MAX_LETTERS {
                factor_name(i, n).to_lowercase()
            } else {
                format!("f{}", i + 1)
            }
        })
        .collect()
}

/// Inverse of [`run_to_string`].
pub fn parse_run(s: &str, n: usize) -> Result<Gf2Vector> {
    let s = s.trim();
    if s == "(1)" {
        return Gf2Vector::zero(n);
    }
    if s.is_empty() {
        return Err(Error::Parse("empty run string".into()));
    }
    let word = EffectWord::parse(&s.to_uppercase(), n)?;
    Ok(word.to_vector())
}

/// A blocked (fractional) factorial laid out in explicit blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockedDesign {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub fraction: FractionSpec,
    pub generator: GeneratorMatrix,
    pub blocks: Vec<Vec<Gf2Vector>>,
}

/// Serialized form of a [`BlockedDesign`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignDocument {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub defining_words: Vec<String>,
    pub generator: Vec<Vec<u8>>,
    pub blocks: Vec<Vec<String>>,
}

impl BlockedDesign {
    pub fn runs(&self) -> impl Iterator<Item = &Gf2Vector> {
        self.blocks.iter().flatten()
    }

    pub fn run_count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn principal_block(&self) -> &[Gf2Vector] {
        &self.blocks[0]
    }

    pub fn to_document(&self) -> DesignDocument {
        DesignDocument {
            n: self.n,
            p: self.p,
            q: self.q,
            defining_words: self.fraction.render_words(),
            generator: self.generator.to_rows(),
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(run_to_string).collect())
                .collect(),
        }
    }

    /// Rebuilds a design from its document without checking the block
    /// structure; that is the oracle's job.
    pub fn from_document(doc: &DesignDocument) -> Result<Self> {
        let n = doc.n;
        let words = doc
            .defining_words
            .iter()
            .map(|w| EffectWord::parse(w, n))
            .collect::<Result<Vec<_>>>()?;
        if words.len() != doc.p {
            return Err(Error::Parse(format!(
                "p = {} but {} defining words given",
                doc.p,
                words.len()
            )));
        }
        let fraction = FractionSpec::new(n, words)?;
        let generator = GeneratorMatrix::full_rank(Gf2Matrix::from_rows(&doc.generator)?)?;
        if generator.q() != doc.q || generator.n() != n {
            return Err(Error::Shape(format!(
                "generator is {}x{}, expected {}x{n}",
                generator.q(),
                generator.n(),
                doc.q
            )));
        }
        let blocks = doc
            .blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|r| parse_run(r, n))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            p: doc.p,
            q: doc.q,
            fraction,
            generator,
            blocks,
        })
    }

    /// One row per run: block number, run string, then factor levels.
    pub fn run_sheet_csv(&self) -> String {
        let mut out = String::from("block,run");
        for i in 0..self.n {
            out.push(',');
            out.push_str(&factor_name(i, self.n));
        }
        out.push('\n');
        for (b, block) in self.blocks.iter().enumerate() {
            for run in block {
                out.push_str(&format!("{},{}", b + 1, run_to_string(run)));
                for i in 0..self.n {
                    out.push_str(if run.get(i) { ",1" } else { ",0" });
                }
                out.push('\n');
            }
        }
        out
    }
}
