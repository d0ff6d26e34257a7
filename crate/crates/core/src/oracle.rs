//! Brute-force verification of blocked designs.
//!
//! Nothing here uses the parity shortcuts of [`crate::design`]: confounding
//! is read off the contrast signs inside each block, aliases off the
//! contrast columns over all runs, and estimability from an exact rank test
//! against block indicators and low-order alias columns. The parity answers
//! are then compared against these.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::design::{self, run_to_string, BlockedDesign};
use crate::effects::EffectWord;
use crate::error::{Error, Result};
use crate::gf2::Gf2Vector;
use crate::graphs::pair_name;

/// `+1` when the run has an even number of the effect's factors at the
/// high level, `-1` when odd.
pub fn contrast_sign(run: &Gf2Vector, e: &EffectWord) -> i8 {
    if (run.bits() & e.mask()).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Per-block sign counts for `e`: `(balanced, constant)` block totals.
fn block_counts(d: &BlockedDesign, e: &EffectWord) -> (usize, usize) {
    let mut balanced = 0;
    let mut constant = 0;
    for block in &d.blocks {
        let plus = block.iter().filter(|r| contrast_sign(r, e) == 1).count();
        if 2 * plus == block.len() {
            balanced += 1;
        }
        if plus == 0 || plus == block.len() {
            constant += 1;
        }
    }
    (balanced, constant)
}

/// Whether `e` is confounded with blocks: some block is not split evenly
/// between the two signs. A confounded effect must then have a single sign
/// within every block; anything else is a [`Error::Consistency`] error.
pub fn verify_confounding(d: &BlockedDesign, e: &EffectWord) -> Result<bool> {
    if d.fraction.subgroup().contains_mask(e.mask()) {
        return Err(Error::EffectInSubgroup(e.render()));
    }
    let (balanced, constant) = block_counts(d, e);
    let blocks = d.blocks.len();
    if balanced == blocks {
        return Ok(false);
    }
    if constant != blocks {
        return Err(Error::Consistency(format!(
            "{} is unbalanced in {} blocks but constant in only {constant} of {blocks}",
            e.render(),
            blocks - balanced
        )));
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectStatus {
    Estimable,
    ConfoundedWithBlocks,
    /// Aliased with a main effect or two-factor interaction.
    AliasedWithNonnegligible,
    Both,
    /// The effect is a defining word.
    AliasedWithMean,
}

impl EffectStatus {
    pub fn is_estimable(self) -> bool {
        self == Self::Estimable
    }

    fn label(self) -> &'static str {
        match self {
            Self::Estimable => "estimable",
            Self::ConfoundedWithBlocks => "confounded",
            Self::AliasedWithNonnegligible => "aliased",
            Self::Both => "confounded+aliased",
            Self::AliasedWithMean => "aliased with mean",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EffectReport {
    pub effect: String,
    pub order: usize,
    pub status: EffectStatus,
    /// Blocks in which the two signs are equally frequent.
    pub balanced_blocks: usize,
    /// Blocks in which the sign is constant.
    pub constant_blocks: usize,
    /// Main effects and interactions with the same contrast column up to sign.
    pub aliases: Vec<String>,
    pub rank_estimable: bool,
    pub parity_estimable: bool,
}

/// What a synthesis run claims about its design.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub estimable: Vec<(usize, usize)>,
    pub required: Vec<(usize, usize)>,
    pub inestimable_required: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub runs: usize,
    pub blocks: usize,
    pub structural_failures: Vec<String>,
    pub effects: Vec<EffectReport>,
    /// Places where the oracle and the parity rules differ.
    pub disagreements: Vec<String>,
    pub prediction_failures: Vec<String>,
    pub main_effects_estimable: usize,
    pub interactions_estimable: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.structural_failures.is_empty()
            && self.disagreements.is_empty()
            && self.prediction_failures.is_empty()
    }

    pub fn effect(&self, name: &str) -> Option<&EffectReport> {
        self.effects.iter().find(|e| e.effect == name)
    }

    /// Estimable two-factor interactions, by name.
    pub fn estimable_interactions(&self) -> Vec<&str> {
        self.effects
            .iter()
            .filter(|e| e.order == 2 && e.status.is_estimable())
            .map(|e| e.effect.as_str())
            .collect()
    }

    /// Plain-text summary, one line per effect.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "2^({}-{}) design, {} runs in {} blocks of {}",
            self.n,
            self.p,
            self.runs,
            self.blocks,
            1usize << self.q
        );
        let width = self
            .effects
            .iter()
            .map(|e| e.effect.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let _ = writeln!(
            out,
            "{:<width$}  {:<18}  {:>8}  {:>8}  aliases",
            "effect", "status", "balanced", "constant"
        );
        for e in &self.effects {
            let _ = writeln!(
                out,
                "{:<width$}  {:<18}  {:>8}  {:>8}  {}",
                e.effect,
                e.status.label(),
                e.balanced_blocks,
                e.constant_blocks,
                if e.aliases.is_empty() {
                    "-".to_string()
                } else {
                    e.aliases.join(" ")
                }
            );
        }
        let _ = writeln!(
            out,
            "main effects estimable: {}; interactions estimable: {}",
            self.main_effects_estimable, self.interactions_estimable
        );
        for s in self
            .structural_failures
            .iter()
            .chain(&self.disagreements)
            .chain(&self.prediction_failures)
        {
            let _ = writeln!(out, "FAIL: {s}");
        }
        let _ = writeln!(
            out,
            "{}",
            if self.passed() {
                "verification passed"
            } else {
                "verification FAILED"
            }
        );
        out
    }
}

fn span(rows: &[Gf2Vector], n: usize) -> Result<BTreeSet<Gf2Vector>> {
    let mut out = BTreeSet::new();
    out.insert(Gf2Vector::zero(n)?);
    for r in rows {
        let next: Vec<Gf2Vector> = out.iter().map(|x| x.xor(r)).collect();
        out.extend(next);
    }
    Ok(out)
}

fn structural(d: &BlockedDesign) -> Result<Vec<String>> {
    let mut fails = Vec::new();
    let n = d.n;
    let expected_runs = 1usize << (d.n - d.p);
    let block_size = 1usize << d.q;
    let runs: Vec<&Gf2Vector> = d.runs().collect();
    if runs.len() != expected_runs {
        fails.push(format!("{} runs, expected {expected_runs}", runs.len()));
    }
    let distinct: BTreeSet<&Gf2Vector> = runs.iter().copied().collect();
    if distinct.len() != runs.len() {
        fails.push("repeated runs".into());
    }
    for r in &runs {
        if r.len() != n {
            fails.push(format!("run {} has {} factors", run_to_string(r), r.len()));
            return Ok(fails);
        }
        if let Some(w) = d
            .fraction
            .words()
            .iter()
            .find(|w| contrast_sign(r, w) == -1)
        {
            fails.push(format!(
                "run {} is outside the fraction (odd on {})",
                run_to_string(r),
                w.render()
            ));
        }
    }
    if d.blocks.len() * block_size != expected_runs {
        fails.push(format!(
            "{} blocks, expected {}",
            d.blocks.len(),
            expected_runs / block_size
        ));
    }
    for (i, b) in d.blocks.iter().enumerate() {
        if b.len() != block_size {
            fails.push(format!(
                "block {} has {} runs, expected {block_size}",
                i + 1,
                b.len()
            ));
        }
    }
    let rows: Vec<Gf2Vector> = (0..d.generator.q()).map(|i| d.generator.row(i)).collect();
    if d.generator.n() != n {
        fails.push("generator has the wrong number of columns".into());
        return Ok(fails);
    }
    let principal = span(&rows, n)?;
    if principal.len() != block_size {
        fails.push(format!(
            "generator rows span {} runs, expected {block_size}",
            principal.len()
        ));
    }
    if let Some(first) = d.blocks.first() {
        let got: BTreeSet<Gf2Vector> = first.iter().copied().collect();
        if got != principal {
            fails.push("first block is not the span of the generator rows".into());
        }
    }
    for (i, b) in d.blocks.iter().enumerate() {
        let Some(r) = b.first() else {
            fails.push(format!("block {} is empty", i + 1));
            continue;
        };
        let coset: BTreeSet<Gf2Vector> = principal.iter().map(|x| x.xor(r)).collect();
        let got: BTreeSet<Gf2Vector> = b.iter().copied().collect();
        if coset != got {
            fails.push(format!(
                "block {} is not a coset of the principal block",
                i + 1
            ));
        }
    }
    Ok(fails)
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Rank over the rationals of integer row vectors, by fraction-free
/// elimination with each row divided by its content.
fn rational_rank(mut rows: Vec<Vec<i128>>) -> Result<usize> {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let pivot_row = rows[rank].clone();
        let a = pivot_row[col];
        for r in rank + 1..rows.len() {
            let b = rows[r][col];
            if b == 0 {
                continue;
            }
            let mut g = 0;
            for (x, &y) in rows[r].iter_mut().zip(&pivot_row) {
                let v = a
                    .checked_mul(*x)
                    .zip(b.checked_mul(y))
                    .and_then(|(u, w)| u.checked_sub(w))
                    .ok_or(Error::Overflow)?;
                *x = v;
                g = gcd(g, v);
            }
            if g > 1 {
                rows[r].iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    Ok(rank)
}

/// Contrast column of `e` over all runs with block means removed, scaled
/// by the block size so entries stay integral.
fn projected_contrast(d: &BlockedDesign, e: &EffectWord) -> Vec<i128> {
    let size = d.blocks.first().map_or(1, Vec::len) as i128;
    let mut out = Vec::new();
    for block in &d.blocks {
        let total: i128 = block.iter().map(|r| contrast_sign(r, e) as i128).sum();
        for r in block {
            out.push(size * contrast_sign(r, e) as i128 - total);
        }
    }
    out
}

/// Exact estimability: `e`'s contrast, after removing block effects, is
/// not a combination of the (block-adjusted) contrasts of its aliases.
fn rank_estimable(d: &BlockedDesign, e: &EffectWord, aliases: &[EffectWord]) -> Result<bool> {
    let target = projected_contrast(d, e);
    if target.iter().all(|&x| x == 0) {
        return Ok(false);
    }
    let others: Vec<Vec<i128>> = aliases.iter().map(|a| projected_contrast(d, a)).collect();
    let base = rational_rank(others.clone())?;
    let mut with = others;
    with.push(target);
    Ok(rational_rank(with)? > base)
}

fn contrast_column(d: &BlockedDesign, e: &EffectWord) -> Vec<i8> {
    d.runs().map(|r| contrast_sign(r, e)).collect()
}

/// Audits every main effect and two-factor interaction of `d`, and checks
/// a synthesis prediction when given.
pub fn verify_design(
    d: &BlockedDesign,
    predicted: Option<&Prediction>,
) -> Result<VerificationReport> {
    let n = d.n;
    let structural_failures = structural(d)?;
    let mut report = VerificationReport {
        n,
        p: d.p,
        q: d.q,
        runs: d.run_count(),
        blocks: d.blocks.len(),
        structural_failures,
        effects: Vec::new(),
        disagreements: Vec::new(),
        prediction_failures: Vec::new(),
        main_effects_estimable: 0,
        interactions_estimable: 0,
    };
    if !report.structural_failures.is_empty() {
        return Ok(report);
    }
    let mut effects: Vec<EffectWord> = (0..n)
        .map(|i| EffectWord::main_effect(n, i))
        .collect::<Result<_>>()?;
    for a in 0..n {
        for b in a + 1..n {
            effects.push(EffectWord::interaction(n, a, b)?);
        }
    }
    let columns: Vec<Vec<i8>> = effects.iter().map(|e| contrast_column(d, e)).collect();
    let sub = d.fraction.subgroup();
    let mut estimable_pairs = BTreeSet::new();
    for (i, e) in effects.iter().enumerate() {
        let name = e.render();
        let constant = columns[i].iter().all(|&s| s == columns[i][0]);
        let in_subgroup = sub.contains_mask(e.mask());
        if constant != in_subgroup {
            report.disagreements.push(format!(
                "{name}: constant over all runs = {constant}, defining word = {in_subgroup}"
            ));
        }
        let (balanced_blocks, constant_blocks) = block_counts(d, e);
        let mut aliases = Vec::new();
        let mut alias_words = Vec::new();
        for (j, f) in effects.iter().enumerate() {
            if i == j {
                continue;
            }
            let same = columns[i] == columns[j];
            let opposite = columns[i].iter().zip(&columns[j]).all(|(x, y)| x == &-y);
            if same || opposite {
                aliases.push(f.render());
                alias_words.push(*f);
            }
        }
        let status = if in_subgroup {
            EffectStatus::AliasedWithMean
        } else {
            let confounded = match verify_confounding(d, e) {
                Ok(c) => c,
                Err(err) => {
                    report.disagreements.push(format!("{name}: {err}"));
                    balanced_blocks != d.blocks.len()
                }
            };
            match (confounded, !aliases.is_empty()) {
                (false, false) => EffectStatus::Estimable,
                (true, false) => EffectStatus::ConfoundedWithBlocks,
                (false, true) => EffectStatus::AliasedWithNonnegligible,
                (true, true) => EffectStatus::Both,
            }
        };
        // aliases by the subgroup algebra
        if !in_subgroup {
            let mut algebra: Vec<String> = sub
                .low_order_aliases(e, 2)
                .iter()
                .map(EffectWord::render)
                .collect();
            algebra.sort();
            let mut brute = aliases.clone();
            brute.sort();
            if algebra != brute {
                report.disagreements.push(format!(
                    "{name}: aliases by contrast columns {{{}}}, by defining words {{{}}}",
                    brute.join(" "),
                    algebra.join(" ")
                ));
            }
        }
        let rank_ok = !in_subgroup && rank_estimable(d, e, &alias_words)?;
        let parity_ok = !in_subgroup
            && design::is_unconfounded(&d.generator, e)
            && sub.low_order_aliases(e, 2).is_empty();
        if rank_ok != status.is_estimable() {
            report.disagreements.push(format!(
                "{name}: rank test says {rank_ok}, block counts say {:?}",
                status
            ));
        }
        if parity_ok != status.is_estimable() {
            report.disagreements.push(format!(
                "{name}: parity rule says {parity_ok}, block counts say {:?}",
                status
            ));
        }
        if status.is_estimable() {
            if e.order() == 1 {
                report.main_effects_estimable += 1;
            } else {
                report.interactions_estimable += 1;
                estimable_pairs.insert(e.as_pair().expect("order two"));
            }
        }
        report.effects.push(EffectReport {
            effect: name,
            order: e.order(),
            status,
            balanced_blocks,
            constant_blocks,
            aliases,
            rank_estimable: rank_ok,
            parity_estimable: parity_ok,
        });
    }
    if let Some(pred) = predicted {
        let claimed: BTreeSet<(usize, usize)> = pred.estimable.iter().copied().collect();
        for &(a, b) in claimed.symmetric_difference(&estimable_pairs) {
            let says = claimed.contains(&(a, b));
            report.prediction_failures.push(format!(
                "{} predicted {}, oracle finds it {}",
                pair_name(a, b, n),
                if says { "estimable" } else { "inestimable" },
                if says { "inestimable" } else { "estimable" }
            ));
        }
        let failing: BTreeSet<(usize, usize)> = pred.inestimable_required.iter().copied().collect();
        for &(a, b) in &pred.required {
            if failing.contains(&(a, b)) == estimable_pairs.contains(&(a, b)) {
                report.prediction_failures.push(format!(
                    "required {} listed as {}, oracle disagrees",
                    pair_name(a, b, n),
                    if failing.contains(&(a, b)) {
                        "failing"
                    } else {
                        "estimable"
                    }
                ));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{expand_blocks, GeneratorMatrix};
    use crate::effects::FractionSpec;

    fn d1() -> BlockedDesign {
        let g = GeneratorMatrix::from_rows(&[vec![1, 0, 1, 0, 0], vec![0, 1, 0, 1, 1]]).unwrap();
        expand_blocks(&g, &FractionSpec::full(5).unwrap()).unwrap()
    }

    #[test]
    fn signs() {
        let e = EffectWord::parse("AC", 5).unwrap();
        assert_eq!(contrast_sign(&design::parse_run("(1)", 5).unwrap(), &e), 1);
        assert_eq!(contrast_sign(&design::parse_run("abc", 5).unwrap(), &e), 1);
        let de = EffectWord::parse("DE", 5).unwrap();
        assert_eq!(contrast_sign(&design::parse_run("bde", 5).unwrap(), &de), 1);
        assert_eq!(contrast_sign(&design::parse_run("a", 5).unwrap(), &e), -1);
    }

    #[test]
    fn rank_of_dependent_rows() {
        assert_eq!(rational_rank(vec![vec![2, 4], vec![1, 2]]).unwrap(), 1);
        assert_eq!(
            rational_rank(vec![vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 2]]).unwrap(),
            2
        );
        assert_eq!(rational_rank(vec![vec![1, 1], vec![1, -1]]).unwrap(), 2);
    }

    #[test]
    fn confounding_by_signs() {
        let d = d1();
        let conf = |s: &str| verify_confounding(&d, &EffectWord::parse(s, 5).unwrap()).unwrap();
        assert!(conf("AC"));
        assert!(conf("DE"));
        assert!(!conf("AB"));
    }

    #[test]
    fn broken_block_is_structural() {
        let mut d = d1();
        let x = d.blocks[1][0];
        d.blocks[1][0] = d.blocks[2][0];
        d.blocks[2][0] = x;
        let r = verify_design(&d, None).unwrap();
        assert!(!r.passed());
        assert!(!r.structural_failures.is_empty());
    }
}
