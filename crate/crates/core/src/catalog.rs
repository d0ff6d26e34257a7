//! Embedded template catalog for blocks of size four.
//!
//! The data file (`data/catalog.txt`) lists fractions by id and templates
//! as printed. Every template is re-derived when the catalog is loaded;
//! rows that fail ship with their precomputed `repaired` grouping, which
//! must itself validate. Rows that still fail are quarantined.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::OnceLock;

use serde::Serialize;

use crate::design::{self, FactorGrouping, ProfileSet};
use crate::effects::{EffectWord, FractionSpec};
use crate::error::{Error, Result};
use crate::gf2::{self, Gf2Vector};
use crate::synth::{self, ScanConfig, Template};

/// The shipped catalog text.
pub const EMBEDDED: &str = include_str!("../data/catalog.txt");

/// Environment variable naming a catalog file to use instead of the
/// embedded one.
pub const CATALOG_ENV: &str = "BLOCKPLAN_CATALOG";

/// Block size exponent of every shipped template.
pub const CATALOG_Q: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Section {
    /// Fractions of resolution at least V.
    Res5,
    /// Resolution IV fractions with exactly one length-4 word.
    Res4,
}

impl Section {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "res5" => Ok(Self::Res5),
            "res4" => Ok(Self::Res4),
            _ => Err(Error::Catalog(format!("unknown section {s:?}"))),
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Res5 => "res5",
            Self::Res4 => "res4",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionRecord {
    pub id: String,
    pub fraction: FractionSpec,
}

/// A template row as written in the data file. Slots are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateRecord {
    pub section: Section,
    pub n: usize,
    pub p: usize,
    pub profile: ProfileSet,
    pub int_count: u64,
    pub fraction_id: String,
    /// Groups as written; may contain repeats or omissions.
    pub grouping: Vec<Vec<usize>>,
    /// The grouping field verbatim.
    pub grouping_text: String,
    pub aliased_pairs: Vec<(usize, usize)>,
    pub line: usize,
}

impl TemplateRecord {
    pub fn runs(&self) -> u64 {
        1 << (self.n - self.p)
    }

    pub fn render_grouping(&self) -> String {
        self.grouping_text.clone()
    }

    fn with_grouping(&self, groups: Vec<Vec<usize>>) -> Self {
        Self {
            grouping_text: render_slots(&groups),
            grouping: groups,
            ..self.clone()
        }
    }

    pub fn render_aliased(&self) -> String {
        if self.aliased_pairs.is_empty() {
            return "-".into();
        }
        self.aliased_pairs
            .iter()
            .map(|&(a, b)| format!("F{}F{}", a + 1, b + 1))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn label(&self) -> String {
        format!("{} {}", self.fraction_id, self.profile)
    }
}

fn render_slots(groups: &[Vec<usize>]) -> String {
    groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|s| (s + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("|")
}

/// Outcome of re-deriving a template row.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub discrepancies: Vec<String>,
    /// Estimable interactions of the reconstructed design, when one exists.
    pub estimable: Option<u64>,
    pub aliased_pairs: Option<Vec<(usize, usize)>>,
    pub template: Option<Template>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Every injective assignment of distinct nonzero columns to `k` groups,
/// canonical one first.
fn colmaps(k: usize, q: u32) -> Result<Vec<Vec<Gf2Vector>>> {
    let mut out = vec![design::canonical_colmap(k, q)?];
    let xq = gf2::enumerate_xq(q)?;
    let mut cur = Vec::new();
    fn rec(xq: &[Gf2Vector], k: usize, cur: &mut Vec<Gf2Vector>, out: &mut Vec<Vec<Gf2Vector>>) {
        if cur.len() == k {
            if !out.contains(cur) {
                out.push(cur.clone());
            }
            return;
        }
        for c in xq {
            if !cur.contains(c) {
                cur.push(*c);
                rec(xq, k, cur, out);
                cur.pop();
            }
        }
    }
    rec(&xq, k, &mut cur, &mut out);
    Ok(out)
}

/// Re-derives a template row: the grouping must partition the slots with
/// the printed profile, some column assignment must keep every defining
/// word in the principal fraction, and the estimable count, aliased pairs
/// and fraction resolution must match the row.
pub fn validate_row(t: &TemplateRecord, f: &FractionRecord) -> ValidationReport {
    let mut report = ValidationReport {
        discrepancies: Vec::new(),
        estimable: None,
        aliased_pairs: None,
        template: None,
    };
    let mut fail = |s: String| report.discrepancies.push(s);
    let fr = &f.fraction;
    if t.fraction_id != f.id {
        fail(format!(
            "row names fraction {} but {} was supplied",
            t.fraction_id, f.id
        ));
    }
    if fr.n() != t.n || fr.p() != t.p {
        fail(format!(
            "fraction {} is 2^({}-{}), row is 2^({}-{})",
            f.id,
            fr.n(),
            fr.p(),
            t.n,
            t.p
        ));
        return report;
    }
    if !fr.is_standard() {
        fail(format!("fraction {} is not in standard form", f.id));
    }
    let sub = fr.subgroup();
    let res = sub.resolution();
    let fours = sub.wordlength_pattern().get(4).copied().unwrap_or(0);
    match t.section {
        Section::Res5 if res.is_some_and(|r| r < 5) => {
            fail(format!("fraction {} has resolution {}, expected at least 5", f.id, res.unwrap_or(0)))
        }
        Section::Res4 if res != Some(4) || fours != 1 => fail(format!(
            "fraction {} has resolution {:?} with {fours} length-4 words, expected resolution 4 with one",
            f.id, res
        )),
        _ => {}
    }
    let grouping = match FactorGrouping::new(t.n, t.grouping.clone()) {
        Ok(g) => g,
        Err(e) => {
            fail(format!(
                "grouping {} is not a partition: {e}",
                t.render_grouping()
            ));
            return report;
        }
    };
    let mut sizes = grouping.sizes();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    if sizes != t.profile.positive_parts() {
        fail(format!(
            "grouping sizes {:?} do not match profile {}",
            sizes, t.profile
        ));
    }
    let q = t.profile.q();
    let maps = match colmaps(grouping.len(), q) {
        Ok(m) => m,
        Err(e) => {
            fail(format!("no column assignment: {e}"));
            return report;
        }
    };
    let mut template = None;
    for cols in maps {
        let Ok(g) = design::grouping_to_generator(&grouping, q, &cols) else {
            continue;
        };
        // X^II = X^I Zᵀ, written as: each word's columns sum to zero.
        let in_fraction = fr
            .words()
            .iter()
            .all(|w| w.factors().fold(0u64, |acc, j| acc ^ g.column(j).bits()) == 0);
        if !in_fraction {
            continue;
        }
        match Template::new(
            t.label(),
            Some(f.id.clone()),
            fr.clone(),
            grouping.clone(),
            cols,
            q,
            0,
        ) {
            Ok(tpl) => {
                template = Some(tpl);
                break;
            }
            Err(e) => {
                fail(format!("generator rejected: {e}"));
                return report;
            }
        }
    }
    let Some(tpl) = template else {
        fail("no column assignment keeps the defining words in the principal fraction".into());
        return report;
    };
    if tpl.profile != t.profile {
        fail(format!(
            "reconstructed profile {} differs from {}",
            tpl.profile, t.profile
        ));
    }
    if tpl.int_count != t.int_count {
        fail(format!(
            "{} estimable interactions, row says {}",
            tpl.int_count, t.int_count
        ));
    }
    if tpl.aliased_pairs != t.aliased_pairs {
        let render = |v: &[(usize, usize)]| {
            v.iter()
                .map(|&(a, b)| format!("F{}F{}", a + 1, b + 1))
                .collect::<Vec<_>>()
                .join(",")
        };
        fail(format!(
            "aliased cross-group pairs {{{}}}, row says {{{}}}",
            render(&tpl.aliased_pairs),
            render(&t.aliased_pairs)
        ));
    }
    report.estimable = Some(tpl.int_count);
    report.aliased_pairs = Some(tpl.aliased_pairs.clone());
    report.template = Some(tpl);
    report
}

/// Finds a grouping for the row's fraction that validates with the same
/// profile, estimable count and aliased pairs. Among candidates the one
/// agreeing most with the printed groups wins, then the first in scan
/// order. A row that already validates comes back unchanged.
pub fn repair_row(t: &TemplateRecord, f: &FractionRecord) -> Result<TemplateRecord> {
    if validate_row(t, f).is_valid() {
        return Ok(t.clone());
    }
    let q = t.profile.q();
    let cfg = ScanConfig {
        saturated_only: false,
        ..ScanConfig::default()
    };
    let printed: Vec<BTreeSet<usize>> = t
        .grouping
        .iter()
        .map(|g| g.iter().copied().collect())
        .collect();
    let mut seen = BTreeSet::new();
    let mut best: Option<(usize, TemplateRecord)> = None;
    let mut err = None;
    synth::scan_assignments(&f.fraction, q, &cfg, &mut |cols| {
        let g = match design::GeneratorMatrix::from_columns(cols) {
            Ok(g) => g,
            Err(e) => {
                err = Some(e);
                return ControlFlow::Break(());
            }
        };
        let Ok((grouping, _)) = FactorGrouping::from_generator(&g) else {
            return ControlFlow::Continue(());
        };
        if grouping.profile(q).ok().as_ref() != Some(&t.profile) {
            return ControlFlow::Continue(());
        }
        // order groups like the printed row: by size, then overlap
        let mut groups: Vec<Vec<usize>> = grouping.canonical().groups().to_vec();
        if !seen.insert(groups.clone()) {
            return ControlFlow::Continue(());
        }
        let score: usize = printed
            .iter()
            .map(|p| {
                groups
                    .iter()
                    .map(|g| g.iter().filter(|x| p.contains(x)).count())
                    .max()
                    .unwrap_or(0)
            })
            .sum();
        groups.sort_by_key(|g| std::cmp::Reverse(g.len()));
        let candidate = t.with_grouping(groups);
        if !validate_row(&candidate, f).is_valid() {
            return ControlFlow::Continue(());
        }
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, candidate));
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    best.map(|(_, r)| r).ok_or_else(|| {
        Error::Catalog(format!(
            "no grouping of fraction {} realizes {} with {} estimable interactions",
            f.id, t.profile, t.int_count
        ))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Verbatim,
    Repaired,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Verbatim => "verbatim",
            Self::Repaired => "repaired",
        })
    }
}

/// A shipped template.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    /// The row as shipped (repaired grouping if any).
    pub record: TemplateRecord,
    /// The row as printed, when it had to be repaired.
    pub printed: Option<TemplateRecord>,
    pub provenance: Provenance,
    pub template: Template,
}

/// A row that failed validation and had no valid repair.
#[derive(Clone, Debug)]
pub struct Quarantined {
    pub record: TemplateRecord,
    pub discrepancies: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Catalog {
    fractions: Vec<FractionRecord>,
    entries: Vec<CatalogEntry>,
    quarantined: Vec<Quarantined>,
}

/// Row of the CSV/JSON dump.
#[derive(Clone, Debug, Serialize)]
pub struct DumpRow {
    pub section: Section,
    pub n: usize,
    pub p: usize,
    pub runs: u64,
    pub profile: String,
    pub int: u64,
    pub fraction: String,
    pub defining_words: Vec<String>,
    pub grouping: String,
    pub aliased: String,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed_grouping: Option<String>,
}

fn parse_grouping(s: &str, line: usize) -> Result<Vec<Vec<usize>>> {
    s.split('|')
        .map(|g| {
            g.split(',')
                .filter(|x| !x.is_empty())
                .map(|x| match x.parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(Error::Catalog(format!("line {line}: bad slot {x:?}"))),
                })
                .collect()
        })
        .collect()
}

fn parse_aliased(s: &str, n: usize, line: usize) -> Result<Vec<(usize, usize)>> {
    if s == "-" {
        return Ok(Vec::new());
    }
    let mut out = s
        .split(',')
        .map(|w| {
            EffectWord::parse(w, n)
                .ok()
                .and_then(|e| e.as_pair())
                .ok_or_else(|| Error::Catalog(format!("line {line}: bad aliased pair {w:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_unstable();
    Ok(out)
}

impl Catalog {
    /// The compiled-in catalog, parsed and validated once.
    pub fn embedded() -> Result<&'static Catalog> {
        static CELL: OnceLock<std::result::Result<Catalog, String>> = OnceLock::new();
        CELL.get_or_init(|| Catalog::parse(EMBEDDED).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Catalog(e.clone()))
    }

    /// The file named by `BLOCKPLAN_CATALOG` if set, else the embedded one.
    pub fn from_env() -> Result<Catalog> {
        match std::env::var_os(CATALOG_ENV) {
            Some(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    Error::Catalog(format!("cannot read {}: {e}", path.to_string_lossy()))
                })?;
                Catalog::parse(&text)
            }
            None => Ok(Catalog::embedded()?.clone()),
        }
    }

    /// Parses and validates catalog text.
    pub fn parse(text: &str) -> Result<Catalog> {
        let (fractions, rows) = Self::parse_records(text)?;
        let mut cat = Catalog {
            fractions,
            ..Catalog::default()
        };
        for (record, repaired) in rows {
            let f = cat
                .fraction(&record.fraction_id)
                .ok_or_else(|| {
                    Error::Catalog(format!(
                        "line {}: unknown fraction {}",
                        record.line, record.fraction_id
                    ))
                })?
                .clone();
            let report = validate_row(&record, &f);
            let index = cat.entries.len();
            let (shipped, printed, provenance, report) = if report.is_valid() {
                (record, None, Provenance::Verbatim, report)
            } else if let Some(groups) = repaired {
                let fixed = record.with_grouping(groups);
                let r2 = validate_row(&fixed, &f);
                if !r2.is_valid() {
                    cat.quarantined.push(Quarantined {
                        discrepancies: r2.discrepancies,
                        record: fixed,
                    });
                    continue;
                }
                (fixed, Some(record), Provenance::Repaired, r2)
            } else {
                cat.quarantined.push(Quarantined {
                    record,
                    discrepancies: report.discrepancies,
                });
                continue;
            };
            let mut template = report.template.expect("valid rows carry a template");
            template.index = index;
            cat.entries.push(CatalogEntry {
                record: shipped,
                printed,
                provenance,
                template,
            });
        }
        Ok(cat)
    }

    /// Fractions and raw template rows (each with its `repaired` grouping,
    /// if any), without validation.
    #[allow(clippy::type_complexity)]
    pub fn parse_records(
        text: &str,
    ) -> Result<(
        Vec<FractionRecord>,
        Vec<(TemplateRecord, Option<Vec<Vec<usize>>>)>,
    )> {
        let mut fractions: Vec<FractionRecord> = Vec::new();
        let mut rows: Vec<(TemplateRecord, Option<Vec<Vec<usize>>>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            match fields[0] {
                "fraction" => {
                    if fields.len() < 3 {
                        return Err(Error::Catalog(format!(
                            "line {line}: fraction needs an id and words"
                        )));
                    }
                    let id = fields[1].to_string();
                    let (n, _) = id
                        .split_once('-')
                        .and_then(|(n, rest)| Some((n.parse::<usize>().ok()?, rest)))
                        .ok_or_else(|| {
                            Error::Catalog(format!("line {line}: bad fraction id {id:?}"))
                        })?;
                    let words = fields[2..]
                        .iter()
                        .map(|w| EffectWord::parse(w, n))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| Error::Catalog(format!("line {line}: {e}")))?;
                    let fraction = FractionSpec::new(n, words)
                        .map_err(|e| Error::Catalog(format!("line {line}: {e}")))?;
                    if fractions.iter().any(|f| f.id == id) {
                        return Err(Error::Catalog(format!(
                            "line {line}: duplicate fraction {id}"
                        )));
                    }
                    fractions.push(FractionRecord { id, fraction });
                }
                "template" => {
                    if fields.len() != 9 {
                        return Err(Error::Catalog(format!(
                            "line {line}: template needs 8 fields, found {}",
                            fields.len() - 1
                        )));
                    }
                    let num = |s: &str| {
                        s.parse::<usize>()
                            .map_err(|_| Error::Catalog(format!("line {line}: bad number {s:?}")))
                    };
                    let n = num(fields[2])?;
                    let p = num(fields[3])?;
                    if p >= n {
                        return Err(Error::Catalog(format!("line {line}: p must be below n")));
                    }
                    let profile = ProfileSet::parse(CATALOG_Q, fields[4])
                        .map_err(|e| Error::Catalog(format!("line {line}: {e}")))?;
                    rows.push((
                        TemplateRecord {
                            section: Section::parse(fields[1])?,
                            n,
                            p,
                            profile,
                            int_count: num(fields[5])? as u64,
                            fraction_id: fields[6].to_string(),
                            grouping: parse_grouping(fields[7], line)?,
                            grouping_text: fields[7].to_string(),
                            aliased_pairs: parse_aliased(fields[8], n, line)?,
                            line,
                        },
                        None,
                    ));
                }
                "repaired" => {
                    let last = rows.last_mut().ok_or_else(|| {
                        Error::Catalog(format!("line {line}: repaired without a template"))
                    })?;
                    if fields.len() != 2 || last.1.is_some() {
                        return Err(Error::Catalog(format!(
                            "line {line}: malformed repaired line"
                        )));
                    }
                    last.1 = Some(parse_grouping(fields[1], line)?);
                }
                other => {
                    return Err(Error::Catalog(format!(
                        "line {line}: unknown record {other:?}"
                    )))
                }
            }
        }
        Ok((fractions, rows))
    }

    pub fn fractions(&self) -> &[FractionRecord] {
        &self.fractions
    }

    pub fn fraction(&self, id: &str) -> Option<&FractionRecord> {
        self.fractions.iter().find(|f| f.id == id)
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn quarantined(&self) -> &[Quarantined] {
        &self.quarantined
    }

    /// First template for exactly this `(n, p, q, profile)`.
    pub fn lookup(
        &self,
        n: usize,
        p: usize,
        q: u32,
        profile: &ProfileSet,
    ) -> Option<&CatalogEntry> {
        self.lookup_all(n, p, q, profile).into_iter().next()
    }

    pub fn lookup_all(
        &self,
        n: usize,
        p: usize,
        q: u32,
        profile: &ProfileSet,
    ) -> Vec<&CatalogEntry> {
        self.entries
            .iter()
            .filter(|e| {
                e.record.n == n
                    && e.record.p == p
                    && e.template.q == q
                    && &e.record.profile == profile
            })
            .collect()
    }

    /// Templates for `(n, p, q)` in catalog order.
    pub fn templates(&self, n: usize, p: usize, q: u32) -> Vec<&Template> {
        self.filter(Some(n), Some(p))
            .into_iter()
            .filter(|e| e.template.q == q)
            .map(|e| &e.template)
            .collect()
    }

    pub fn filter(&self, n: Option<usize>, p: Option<usize>) -> Vec<&CatalogEntry> {
        self.entries
            .iter()
            .filter(|e| n.is_none_or(|n| e.record.n == n) && p.is_none_or(|p| e.record.p == p))
            .collect()
    }

    pub fn dump_rows(&self, n: Option<usize>, p: Option<usize>) -> Vec<DumpRow> {
        self.filter(n, p)
            .into_iter()
            .map(|e| {
                let r = &e.record;
                DumpRow {
                    section: r.section,
                    n: r.n,
                    p: r.p,
                    runs: r.runs(),
                    profile: r.profile.to_string(),
                    int: r.int_count,
                    fraction: r.fraction_id.clone(),
                    defining_words: e
                        .template
                        .fraction
                        .words()
                        .iter()
                        .map(EffectWord::to_indexed)
                        .collect(),
                    grouping: r.render_grouping(),
                    aliased: r.render_aliased(),
                    provenance: e.provenance,
                    printed_grouping: e.printed.as_ref().map(TemplateRecord::render_grouping),
                }
            })
            .collect()
    }

    pub fn dump_csv(&self, n: Option<usize>, p: Option<usize>) -> String {
        let mut out =
            String::from("section,n,p,runs,profile,int,fraction,grouping,aliased,provenance\n");
        for r in self.dump_rows(n, p) {
            out.push_str(&format!(
                "{},{},{},{},\"{}\",{},{},\"{}\",\"{}\",{}\n",
                r.section,
                r.n,
                r.p,
                r.runs,
                r.profile,
                r.int,
                r.fraction,
                r.grouping,
                r.aliased,
                r.provenance
            ));
        }
        out
    }

    pub fn dump_json(&self, n: Option<usize>, p: Option<usize>) -> String {
        serde_json::to_string_pretty(&self.dump_rows(n, p)).expect("plain data serializes")
    }
}
