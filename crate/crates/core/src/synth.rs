//! Design synthesis.
//!
//! Full factorials (`p = 0`) go straight from a colouring of the
//! requirements graph to a generator. Fractions go through *templates*: a
//! fraction in standard form plus a factor grouping over its factor slots
//! `F1..Fn`. Templates come from the embedded catalog or from a scan of a
//! user-supplied fraction; experiment factors are then mapped onto slots,
//! avoiding slots whose two-factor interactions are aliased.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::design::{
    self, count_estimable, expand_blocks, BlockedDesign, DesignDocument, FactorGrouping,
    GeneratorMatrix, ProfileSet,
};
use crate::effects::{factor_name, ContrastSubgroup, EffectWord, FractionSpec};
use crate::error::{Error, Result};
use crate::gf2::{self, Gf2Vector};
use crate::graphs::{
    self, check_sufficient_conditions, pair_name, Coloring, ConditionReport, RequirementsGraph,
};

/// Default cap on scanned generator candidates.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

/// Colourings examined per template before giving up on finding a better
/// factor-to-slot mapping.
pub const COLORING_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Any design that estimates the required interactions.
    RequireOnly,
    /// Among such designs, the most estimable interactions.
    #[default]
    MaximizeEstimable,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "require-only" => Ok(Self::RequireOnly),
            "maximize-estimable" => Ok(Self::MaximizeEstimable),
            _ => Err(Error::Parse(format!(
                "unknown objective {s:?} (expected require-only or maximize-estimable)"
            ))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RequireOnly => "require-only",
            Self::MaximizeEstimable => "maximize-estimable",
        })
    }
}

/// What to build: `2^(n-p)` runs in blocks of `2^q`, estimating every main
/// effect and every interaction in `interactions`.
#[derive(Clone, Debug)]
pub struct SynthesisRequest {
    pub n: usize,
    pub p: usize,
    pub q: u32,
    pub interactions: RequirementsGraph,
    pub objective: Objective,
    /// Defining words to use instead of the catalog.
    pub fraction: Option<FractionSpec>,
    /// Cap on scanned generator candidates for a user-supplied fraction.
    pub budget: u128,
}

impl SynthesisRequest {
    pub fn full(n: usize, q: u32, interactions: RequirementsGraph) -> Self {
        Self::fractional(n, 0, q, interactions)
    }

    pub fn fractional(n: usize, p: usize, q: u32, interactions: RequirementsGraph) -> Self {
        Self {
            n,
            p,
            q,
            interactions,
            objective: Objective::default(),
            fraction: None,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_fraction(mut self, fraction: FractionSpec) -> Self {
        self.p = fraction.p();
        self.fraction = Some(fraction);
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.q > gf2::MAX_Q {
            return Err(Error::ExponentOutOfRange(self.q));
        }
        if self.interactions.n() != self.n {
            return Err(Error::Shape(format!(
                "interaction graph has {} factors, request has {}",
                self.interactions.n(),
                self.n
            )));
        }
        if self.p >= self.n || self.q as usize > self.n - self.p {
            return Err(Error::Shape(format!(
                "blocks of 2^{} runs do not fit a 2^({}-{}) design",
                self.q, self.n, self.p
            )));
        }
        if let Some(f) = &self.fraction {
            if f.n() != self.n || f.p() != self.p {
                return Err(Error::InvalidFraction(format!(
                    "fraction is 2^({}-{}), request is 2^({}-{})",
                    f.n(),
                    f.p(),
                    self.n,
                    self.p
                )));
            }
        }
        Ok(())
    }

    fn max_colors(&self) -> usize {
        ((1usize << self.q) - 1).min(self.n)
    }
}

/// Why an interaction cannot be estimated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FailureReason {
    /// Both factors share a generator column (fails C2).
    ConfoundedWithBlocks,
    /// Aliased with main effects or two-factor interactions (fails C1).
    Aliased { with: Vec<String> },
    /// The interaction is itself a defining word.
    AliasedWithMean,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inestimable {
    pub pair: (usize, usize),
    pub reason: FailureReason,
}

/// Estimability of the interaction `ab` in a design: `None` when estimable.
pub fn pair_failure(
    g: &GeneratorMatrix,
    sub: &ContrastSubgroup,
    a: usize,
    b: usize,
) -> Option<FailureReason> {
    let n = g.n();
    let e = EffectWord::interaction(n, a, b).expect("distinct factors in range");
    if sub.contains_mask(e.mask()) {
        return Some(FailureReason::AliasedWithMean);
    }
    if g.column(a) == g.column(b) {
        return Some(FailureReason::ConfoundedWithBlocks);
    }
    let low = sub.low_order_aliases(&e, 2);
    if !low.is_empty() {
        return Some(FailureReason::Aliased {
            with: low.iter().map(EffectWord::render).collect(),
        });
    }
    None
}

/// How a fractional result was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateUse {
    pub label: String,
    pub fraction_id: Option<String>,
    /// Template slot (0-based `F` index) of every experiment factor.
    pub slot_of: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub objective: Objective,
    pub design: BlockedDesign,
    pub grouping: FactorGrouping,
    pub profile: ProfileSet,
    /// Every estimable two-factor interaction, `a < b`.
    pub estimable: Vec<(usize, usize)>,
    pub required: Vec<(usize, usize)>,
    pub inestimable_required: Vec<Inestimable>,
    pub diagnostics: ConditionReport,
    pub template: Option<TemplateUse>,
    pub notes: Vec<String>,
}

impl SynthesisResult {
    pub fn is_success(&self) -> bool {
        self.inestimable_required.is_empty()
    }

    pub fn estimable_count(&self) -> usize {
        self.estimable.len()
    }

    pub fn prediction(&self) -> crate::oracle::Prediction {
        crate::oracle::Prediction {
            estimable: self.estimable.clone(),
            required: self.required.clone(),
            inestimable_required: self.inestimable_required.iter().map(|x| x.pair).collect(),
        }
    }

    pub fn to_document(&self) -> ResultDocument {
        let n = self.design.n;
        let status = if self.is_success() {
            "success"
        } else {
            "partial"
        };
        ResultDocument {
            status: status.into(),
            n,
            p: self.design.p,
            q: self.design.q,
            objective: self.objective,
            profile: self.profile.positive_parts().to_vec(),
            grouping: self
                .grouping
                .groups()
                .iter()
                .map(|g| g.iter().map(|&f| factor_name(f, n)).collect())
                .collect(),
            factor_mapping: self.template.as_ref().map(|t| {
                t.slot_of
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (factor_name(i, n), format!("F{}", s + 1)))
                    .collect()
            }),
            template: self.template.as_ref().map(|t| t.label.clone()),
            fraction_id: self.template.as_ref().and_then(|t| t.fraction_id.clone()),
            required: self
                .required
                .iter()
                .map(|&(a, b)| pair_name(a, b, n))
                .collect(),
            estimable: self
                .estimable
                .iter()
                .map(|&(a, b)| pair_name(a, b, n))
                .collect(),
            estimable_count: self.estimable.len(),
            inestimable_required: self
                .inestimable_required
                .iter()
                .map(|x| InestimableDoc {
                    interaction: pair_name(x.pair.0, x.pair.1, n),
                    reason: x.reason.clone(),
                })
                .collect(),
            diagnostics: self.diagnostics.clone(),
            notes: self.notes.clone(),
            design: self.design.to_document(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InestimableDoc {
    pub interaction: String,
    pub reason: FailureReason,
}

/// JSON form of a [`SynthesisResult`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultDocument {
    pub status: String,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub objective: Objective,
    pub profile: Vec<usize>,
    pub grouping: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor_mapping: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction_id: Option<String>,
    pub required: Vec<String>,
    pub estimable: Vec<String>,
    pub estimable_count: usize,
    pub inestimable_required: Vec<InestimableDoc>,
    #[serde(skip_deserializing, default = "no_diagnostics")]
    pub diagnostics: ConditionReport,
    #[serde(default)]
    pub notes: Vec<String>,
    pub design: DesignDocument,
}

fn no_diagnostics() -> ConditionReport {
    check_sufficient_conditions(&RequirementsGraph::new(1).expect("one vertex"), 1)
}

impl ResultDocument {
    /// The claims a verifier should check against the design.
    pub fn prediction(&self) -> Result<crate::oracle::Prediction> {
        let pairs = |list: &[String]| -> Result<Vec<(usize, usize)>> {
            list.iter()
                .map(|s| {
                    EffectWord::parse(s, self.n)?
                        .as_pair()
                        .ok_or_else(|| Error::Parse(format!("{s:?} is not an interaction")))
                })
                .collect()
        };
        let failing: Vec<String> = self
            .inestimable_required
            .iter()
            .map(|x| x.interaction.clone())
            .collect();
        Ok(crate::oracle::Prediction {
            estimable: pairs(&self.estimable)?,
            required: pairs(&self.required)?,
            inestimable_required: pairs(&failing)?,
        })
    }
}

/// Edge-removal suggestions for an uncolourable request.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Advice {
    /// Interactions whose removal alone makes the request feasible.
    pub single_edge_fixes: Vec<(usize, usize)>,
    /// A feasible subset obtained by repeatedly dropping an interaction at
    /// the highest-degree factor.
    pub greedy_removal: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct Infeasible {
    pub reason: String,
    pub chromatic_number: Option<usize>,
    pub diagnostics: ConditionReport,
    pub achievable_profiles: Vec<ProfileSet>,
    pub template_profiles: Vec<ProfileSet>,
    pub advice: Option<Advice>,
}

#[derive(Clone, Debug)]
pub enum SynthesisOutcome {
    Success(Box<SynthesisResult>),
    /// A design exists but some required interactions are aliased.
    Partial(Box<SynthesisResult>),
    Infeasible(Box<Infeasible>),
}

impl SynthesisOutcome {
    pub fn success(&self) -> Option<&SynthesisResult> {
        match self {
            Self::Success(r) => Some(r),
            _ => None,
        }
    }

    /// The design for success or partial outcomes.
    pub fn result(&self) -> Option<&SynthesisResult> {
        match self {
            Self::Success(r) | Self::Partial(r) => Some(r),
            Self::Infeasible(_) => None,
        }
    }

    pub fn infeasible(&self) -> Option<&Infeasible> {
        match self {
            Self::Infeasible(i) => Some(i),
            _ => None,
        }
    }

    fn from_result(r: SynthesisResult) -> Self {
        if r.is_success() {
            Self::Success(Box::new(r))
        } else {
            Self::Partial(Box::new(r))
        }
    }
}

/// Dispatches on `p`: full factorials colour directly, fractions use
/// templates from `catalog` (or a scan of `req.fraction`).
pub fn synthesize(req: &SynthesisRequest, catalog: Option<&Catalog>) -> Result<SynthesisOutcome> {
    if req.p == 0 && req.fraction.is_none() {
        synthesize_full(req)
    } else {
        synthesize_fraction(req, catalog)
    }
}

fn advice(g: &RequirementsGraph, k: usize) -> Advice {
    let mut out = Advice::default();
    if g.n() <= graphs::MAX_EXACT {
        for (a, b) in g.edges() {
            let mut h = g.clone();
            h.remove_edge(a, b);
            if graphs::find_coloring(&h, k).is_some() {
                out.single_edge_fixes.push((a, b));
            }
        }
    }
    let mut h = g.clone();
    while graphs::find_coloring(&h, k).is_none() {
        let Some(v) = (0..h.n()).max_by_key(|&v| (h.degree(v), std::cmp::Reverse(v))) else {
            break;
        };
        let Some(u) = (0..h.n())
            .filter(|&u| h.has_edge(v, u))
            .max_by_key(|&u| (h.degree(u), std::cmp::Reverse(u)))
        else {
            break;
        };
        h.remove_edge(v, u);
        out.greedy_removal.push((v.min(u), v.max(u)));
    }
    out
}

fn infeasible_colouring(req: &SynthesisRequest, chi: Option<usize>) -> SynthesisOutcome {
    let k = (1usize << req.q) - 1;
    let reason = match chi {
        Some(c) => format!(
            "requirements graph is {c}-chromatic; blocks of size 2^{} allow at most {k} colours",
            req.q
        ),
        None => format!("requirements graph has no colouring with {k} colours"),
    };
    SynthesisOutcome::Infeasible(Box::new(Infeasible {
        reason,
        chromatic_number: chi,
        diagnostics: check_sufficient_conditions(&req.interactions, req.q),
        achievable_profiles: Vec::new(),
        template_profiles: Vec::new(),
        advice: Some(advice(&req.interactions, k)),
    }))
}

/// Chromatic number when exact search is allowed, and whether the graph
/// fits `k` colours.
fn colour_check(g: &RequirementsGraph, k: usize) -> Result<(Option<usize>, bool)> {
    if g.n() <= graphs::MAX_EXACT {
        let chi = graphs::chromatic_number(g)?;
        Ok((Some(chi), chi <= k))
    } else {
        Ok((None, graphs::find_coloring(g, k).is_some()))
    }
}

/// Full-factorial synthesis from a colouring of the requirements graph.
pub fn synthesize_full(req: &SynthesisRequest) -> Result<SynthesisOutcome> {
    req.validate()?;
    if req.p != 0 {
        return Err(Error::InvalidFraction("synthesize_full needs p = 0".into()));
    }
    let g = &req.interactions;
    let k = req.max_colors();
    let (chi, ok) = colour_check(g, k)?;
    if !ok {
        return Ok(infeasible_colouring(req, chi));
    }
    let mut notes = Vec::new();
    let coloring = match req.objective {
        Objective::MaximizeEstimable if g.n() <= graphs::MAX_EXACT => {
            let by = graphs::colorings_by_profile(g, req.q)?;
            let best = by
                .iter()
                .filter(|(p, _)| p.is_realizable())
                .max_by(|(a, _), (b, _)| {
                    count_estimable(a)
                        .cmp(&count_estimable(b))
                        .then_with(|| a.parts().cmp(b.parts()))
                })
                .ok_or_else(|| Error::Consistency("no realizable profile".into()))?;
            let top = count_estimable(best.0);
            let tied: Vec<String> = by
                .keys()
                .filter(|p| p.is_realizable() && count_estimable(p) == top && *p != best.0)
                .map(ToString::to_string)
                .collect();
            if !tied.is_empty() {
                notes.push(format!(
                    "profiles {} estimate as many interactions as {}; chose the lexicographically largest",
                    tied.join(", "),
                    best.0
                ));
            }
            best.1.clone()
        }
        objective => {
            let mut c = graphs::find_coloring(g, k).expect("colourability checked");
            let target = if objective == Objective::MaximizeEstimable {
                notes.push(format!(
                    "more than {} factors: profile chosen by splitting colour classes",
                    graphs::MAX_EXACT
                ));
                k
            } else {
                req.q as usize
            };
            while c.k() < target {
                c = graphs::split_color_class(&c, g)?;
            }
            c
        }
    };
    let result = realize_coloring(req, &coloring, notes)?;
    Ok(SynthesisOutcome::from_result(result))
}

fn realize_coloring(
    req: &SynthesisRequest,
    coloring: &Coloring,
    notes: Vec<String>,
) -> Result<SynthesisResult> {
    let grouping = coloring.to_grouping();
    let columns = design::canonical_colmap(grouping.len(), req.q)?;
    let generator = design::grouping_to_generator(&grouping, req.q, &columns)?;
    let fraction = FractionSpec::full(req.n)?;
    let d = expand_blocks(&generator, &fraction)?;
    finish(req, d, grouping, None, notes)
}

fn finish(
    req: &SynthesisRequest,
    design: BlockedDesign,
    grouping: FactorGrouping,
    template: Option<TemplateUse>,
    notes: Vec<String>,
) -> Result<SynthesisResult> {
    let n = req.n;
    let sub = design.fraction.subgroup();
    let mut estimable = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if pair_failure(&design.generator, &sub, a, b).is_none() {
                estimable.push((a, b));
            }
        }
    }
    let required = req.interactions.edges();
    let inestimable_required = required
        .iter()
        .filter_map(|&(a, b)| {
            pair_failure(&design.generator, &sub, a, b).map(|reason| Inestimable {
                pair: (a, b),
                reason,
            })
        })
        .collect();
    let profile = design::profile_of(&design.generator)?;
    Ok(SynthesisResult {
        objective: req.objective,
        design,
        grouping,
        profile,
        estimable,
        required,
        inestimable_required,
        diagnostics: check_sufficient_conditions(&req.interactions, req.q),
        template,
        notes,
    })
}

/// Scan settings.
#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub budget: u128,
    /// Keep only profiles that use `min(n, 2^q - 1)` distinct columns.
    pub saturated_only: bool,
    /// Index into the canonical column order for the fixed first column.
    pub first_column: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            saturated_only: true,
            first_column: 0,
        }
    }
}

/// One generator found by a scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanHit {
    pub grouping: FactorGrouping,
    /// Generator column of each group.
    pub columns: Vec<Gf2Vector>,
}

impl ScanHit {
    pub fn generator(&self, q: u32) -> Result<GeneratorMatrix> {
        design::grouping_to_generator(&self.grouping, q, &self.columns)
    }
}

/// Visits every admissible generator for a fraction in standard form.
///
/// The first basic column is fixed; each other basic column runs over all
/// `2^q - 1` nonzero vectors (last column fastest), the added columns follow
/// from `X^II = X^I Zᵀ`, and candidates with a zero column or rank below `q`
/// are skipped. `visit` receives all `n` columns.
pub fn scan_assignments(
    f: &FractionSpec,
    q: u32,
    cfg: &ScanConfig,
    visit: &mut dyn FnMut(&[Gf2Vector]) -> ControlFlow<()>,
) -> Result<()> {
    let xq = gf2::enumerate_xq(q)?;
    let k = xq.len();
    let (n, p) = (f.n(), f.p());
    if !f.is_standard() {
        return Err(Error::InvalidFraction(
            "scanning needs defining words in standard form".into(),
        ));
    }
    if cfg.first_column >= k {
        return Err(Error::Shape(format!(
            "first column index {} out of range",
            cfg.first_column
        )));
    }
    let basic = n - p;
    if (q as usize) > basic {
        return Err(Error::Shape(format!(
            "blocks of 2^{q} exceed 2^{basic} runs"
        )));
    }
    let candidates = (k as u128)
        .checked_pow(basic as u32 - 1)
        .unwrap_or(u128::MAX);
    if candidates > cfg.budget {
        return Err(Error::BudgetExceeded {
            candidates,
            budget: cfg.budget,
        });
    }
    let low = if basic == 64 {
        u64::MAX
    } else {
        (1u64 << basic) - 1
    };
    let z: Vec<u64> = f.words().iter().map(|w| w.mask() & low).collect();
    let mut idx = vec![0usize; basic];
    idx[0] = cfg.first_column;
    let mut cols: Vec<Gf2Vector> = vec![xq[0]; n];
    loop {
        for j in 0..basic {
            cols[j] = xq[idx[j]];
        }
        let mut ok = true;
        for (i, zi) in z.iter().enumerate() {
            let mut acc = 0u64;
            let mut m = *zi;
            while m != 0 {
                acc ^= cols[m.trailing_zeros() as usize].bits();
                m &= m - 1;
            }
            if acc == 0 {
                ok = false;
                break;
            }
            cols[basic + i] = Gf2Vector::from_mask(q as usize, acc)?;
        }
        if ok {
            let masks: Vec<u64> = cols.iter().map(Gf2Vector::bits).collect();
            if gf2::rank_of_masks(&masks) == q as usize && visit(&cols).is_break() {
                return Ok(());
            }
        }
        // odometer over basic columns 1.., last fastest
        let mut j = basic;
        loop {
            if j == 1 {
                return Ok(());
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < k {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// The first generator (in scan order) for every profile the fraction
/// supports.
pub fn scan_profiles(
    f: &FractionSpec,
    q: u32,
    cfg: &ScanConfig,
) -> Result<BTreeMap<ProfileSet, ScanHit>> {
    let k = (1usize << q) - 1;
    let want_parts = k.min(f.n());
    let mut out = BTreeMap::new();
    let mut err = None;
    scan_assignments(f, q, cfg, &mut |cols| {
        let g = match GeneratorMatrix::from_columns(cols) {
            Ok(g) => g,
            Err(e) => {
                err = Some(e);
                return ControlFlow::Break(());
            }
        };
        let (grouping, columns) = FactorGrouping::from_generator(&g).expect("nonzero columns");
        if cfg.saturated_only && grouping.len() != want_parts {
            return ControlFlow::Continue(());
        }
        let profile = grouping.profile(q).expect("valid sizes");
        out.entry(profile).or_insert(ScanHit { grouping, columns });
        ControlFlow::Continue(())
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// A fraction plus a factor grouping over its slots `F1..Fn`.
#[derive(Clone, Debug)]
pub struct Template {
    pub label: String,
    pub fraction_id: Option<String>,
    pub fraction: FractionSpec,
    pub grouping: FactorGrouping,
    pub columns: Vec<Gf2Vector>,
    pub q: u32,
    pub profile: ProfileSet,
    /// Estimable two-factor interactions.
    pub int_count: u64,
    /// Cross-group slot pairs lost to two-factor aliasing, `a < b`.
    pub aliased_pairs: Vec<(usize, usize)>,
    /// Position in the source listing; breaks ties.
    pub index: usize,
}

impl Template {
    /// Checks that the grouping and columns give an admissible generator
    /// for the fraction (resolution at least IV).
    pub fn new(
        label: String,
        fraction_id: Option<String>,
        fraction: FractionSpec,
        grouping: FactorGrouping,
        columns: Vec<Gf2Vector>,
        q: u32,
        index: usize,
    ) -> Result<Self> {
        let generator = design::grouping_to_generator(&grouping, q, &columns)?;
        for i in 0..generator.q() {
            if !fraction.contains(&generator.row(i)) {
                return Err(Error::InvalidFraction(format!(
                    "generator row {} leaves the principal fraction",
                    i + 1
                )));
            }
        }
        let sub = fraction.subgroup();
        if sub.resolution().is_some_and(|r| r < 4) {
            return Err(Error::InvalidFraction(format!(
                "resolution {} aliases main effects with two-factor interactions",
                sub.resolution().unwrap_or(0)
            )));
        }
        let n = fraction.n();
        let mut aliased_pairs = Vec::new();
        let mut int_count = 0;
        for a in 0..n {
            for b in a + 1..n {
                match pair_failure(&generator, &sub, a, b) {
                    None => int_count += 1,
                    Some(FailureReason::Aliased { .. }) => aliased_pairs.push((a, b)),
                    Some(_) => {}
                }
            }
        }
        let profile = design::profile_of(&generator)?;
        Ok(Self {
            label,
            fraction_id,
            fraction,
            grouping,
            columns,
            q,
            profile,
            int_count,
            aliased_pairs,
            index,
        })
    }

    pub fn generator(&self) -> Result<GeneratorMatrix> {
        design::grouping_to_generator(&self.grouping, self.q, &self.columns)
    }
}

/// Templates for every saturated profile a fraction supports.
pub fn templates_from_scan(f: &FractionSpec, q: u32, cfg: &ScanConfig) -> Result<Vec<Template>> {
    let f = FractionSpec::standard(f.n(), f.words().to_vec())?;
    let hits = scan_profiles(&f, q, cfg)?;
    let mut out = Vec::new();
    for (i, (profile, hit)) in hits.into_iter().rev().enumerate() {
        out.push(Template::new(
            format!("scan {profile}"),
            None,
            f.clone(),
            hit.grouping,
            hit.columns,
            q,
            i,
        )?);
    }
    Ok(out)
}

/// A colouring mapped onto a template's slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fit {
    pub coloring: Coloring,
    /// Template slot of every experiment factor.
    pub slot_of: Vec<usize>,
    /// Required interactions landing on aliased slot pairs.
    pub failures: Vec<(usize, usize)>,
}

/// The best mapping of the requirements graph onto `t`: fewest required
/// interactions on aliased slot pairs, first found on ties.
///
/// Every colouring with the template's class sizes is tried (up to
/// `cap`), every matching of classes to equal-size groups, and every
/// placement of class members on the group's aliased slots.
pub fn fit_template(g: &RequirementsGraph, t: &Template, cap: usize) -> Option<Fit> {
    let n = g.n();
    if t.fraction.n() != n {
        return None;
    }
    let aliased: BTreeSet<(usize, usize)> = t.aliased_pairs.iter().copied().collect();
    let hot: BTreeSet<usize> = t.aliased_pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut groups: Vec<usize> = (0..t.grouping.len()).collect();
    groups.sort_by_key(|&i| std::cmp::Reverse(t.grouping.groups()[i].len()));
    let edges = g.edges();
    let sizes = t.profile.positive_parts().to_vec();
    let mut best: Option<Fit> = None;
    let mut seen = 0usize;
    graphs::for_each_coloring_with_sizes(g, &sizes, &mut |c| {
        seen += 1;
        let classes = c.classes();
        for matching in size_matchings(&sizes, &groups, t) {
            let mut slot_of = vec![usize::MAX; n];
            let done = place(
                &classes,
                &matching,
                0,
                t,
                &hot,
                &mut slot_of,
                &mut |slot_of| {
                    let failures: Vec<(usize, usize)> = edges
                        .iter()
                        .copied()
                        .filter(|&(a, b)| {
                            let (x, y) = (slot_of[a], slot_of[b]);
                            aliased.contains(&(x.min(y), x.max(y)))
                        })
                        .collect();
                    if best
                        .as_ref()
                        .is_none_or(|b| failures.len() < b.failures.len())
                    {
                        let zero = failures.is_empty();
                        best = Some(Fit {
                            coloring: c.clone(),
                            slot_of: slot_of.to_vec(),
                            failures,
                        });
                        if zero {
                            return ControlFlow::Break(());
                        }
                    }
                    ControlFlow::Continue(())
                },
            );
            if done.is_break() {
                return ControlFlow::Break(());
            }
        }
        if seen >= cap {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    best
}

/// All assignments of colour classes (sizes descending) to template groups
/// of the same size. Entry `i` is the group for class `i`.
fn size_matchings(sizes: &[usize], groups: &[usize], t: &Template) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut i = 0;
    while i < sizes.len() {
        let mut j = i;
        while j < sizes.len() && sizes[j] == sizes[i] {
            j += 1;
        }
        let bucket: Vec<usize> = groups[i..j].to_vec();
        debug_assert!(bucket
            .iter()
            .all(|&g| t.grouping.groups()[g].len() == sizes[i]));
        let perms = permutations(&bucket);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(p);
                    v
                })
            })
            .collect();
        i = j;
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Places class `ci` (and later ones) onto their matched groups: every
/// ordered choice of members for the group's aliased slots, remaining
/// members on the other slots in ascending order.
fn place(
    classes: &[Vec<usize>],
    matching: &[usize],
    ci: usize,
    t: &Template,
    hot: &BTreeSet<usize>,
    slot_of: &mut Vec<usize>,
    leaf: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if ci == classes.len() {
        return leaf(slot_of);
    }
    let members = &classes[ci];
    let slots = &t.grouping.groups()[matching[ci]];
    let hot_slots: Vec<usize> = slots.iter().copied().filter(|s| hot.contains(s)).collect();
    let cold_slots: Vec<usize> = slots.iter().copied().filter(|s| !hot.contains(s)).collect();
    let mut chosen = Vec::with_capacity(hot_slots.len());
    choose_ordered(members, hot_slots.len(), &mut chosen, &mut |picked| {
        for (&m, &s) in picked.iter().zip(&hot_slots) {
            slot_of[m] = s;
        }
        let rest = members.iter().filter(|m| !picked.contains(m));
        for (&m, &s) in rest.zip(&cold_slots) {
            slot_of[m] = s;
        }
        place(classes, matching, ci + 1, t, hot, slot_of, leaf)
    })
}

fn choose_ordered(
    items: &[usize],
    k: usize,
    cur: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if cur.len() == k {
        return f(cur);
    }
    for &x in items {
        if cur.contains(&x) {
            continue;
        }
        cur.push(x);
        let flow = choose_ordered(items, k, cur, f);
        cur.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

/// Builds the design obtained by putting experiment factor `i` on slot
/// `slot_of[i]` of template `t`.
pub fn realize_template(
    req: &SynthesisRequest,
    t: &Template,
    slot_of: &[usize],
    notes: Vec<String>,
) -> Result<SynthesisResult> {
    let n = req.n;
    let mut factor_at = vec![usize::MAX; n];
    for (i, &s) in slot_of.iter().enumerate() {
        if s >= n || factor_at[s] != usize::MAX {
            return Err(Error::InvalidGrouping(
                "slot mapping is not a bijection".into(),
            ));
        }
        factor_at[s] = i;
    }
    let slot_group = t.grouping.group_of();
    let columns: Vec<Gf2Vector> = slot_of.iter().map(|&s| t.columns[slot_group[s]]).collect();
    let generator = GeneratorMatrix::from_columns(&columns)?;
    let words = t
        .fraction
        .words()
        .iter()
        .map(|w| {
            let mask = (0..n)
                .filter(|&i| w.contains(slot_of[i]))
                .fold(0u64, |m, i| m | 1 << i);
            EffectWord::new(n, mask)
        })
        .collect::<Result<Vec<_>>>()?;
    let fraction = FractionSpec::new(n, words)?;
    let d = expand_blocks(&generator, &fraction)?;
    let grouping = FactorGrouping::new(
        n,
        t.grouping
            .groups()
            .iter()
            .map(|g| g.iter().map(|&s| factor_at[s]).collect())
            .collect(),
    )?;
    let use_ = TemplateUse {
        label: t.label.clone(),
        fraction_id: t.fraction_id.clone(),
        slot_of: slot_of.to_vec(),
    };
    finish(req, d, grouping, Some(use_), notes)
}

/// A user-supplied fraction keeps its factor labels: only the basic
/// generator columns vary, so the search runs over the whole scan rather
/// than over slot mappings.
fn synthesize_fixed_fraction(
    req: &SynthesisRequest,
    f: &FractionSpec,
    chi: Option<usize>,
) -> Result<SynthesisOutcome> {
    let g = &req.interactions;
    let n = req.n;
    let sub = f.subgroup();
    if sub.resolution().is_some_and(|r| r < 4) {
        return Err(Error::InvalidFraction(format!(
            "resolution {} aliases main effects with two-factor interactions",
            sub.resolution().unwrap_or(0)
        )));
    }
    // pairs lost to a low-order alias whatever the blocking
    let mut alias_lost = vec![0u64; n];
    for a in 0..n {
        for b in a + 1..n {
            let e = EffectWord::interaction(n, a, b)?;
            if !sub.low_order_aliases(&e, 2).is_empty() {
                alias_lost[a] |= 1 << b;
            }
        }
    }
    let edges = g.edges();
    let cfg = ScanConfig {
        budget: req.budget,
        saturated_only: false,
        first_column: 0,
    };
    // (estimable count, profile parts, columns)
    let mut best: Option<(u64, Vec<usize>, Vec<Gf2Vector>)> = None;
    scan_assignments(f, req.q, &cfg, &mut |cols| {
        if edges.iter().any(|&(a, b)| cols[a] == cols[b]) {
            return ControlFlow::Continue(());
        }
        if req.objective == Objective::RequireOnly {
            best = Some((0, Vec::new(), cols.to_vec()));
            return ControlFlow::Break(());
        }
        let mut count = 0;
        for a in 0..n {
            for b in a + 1..n {
                if cols[a] != cols[b] && alias_lost[a] >> b & 1 == 0 {
                    count += 1;
                }
            }
        }
        let better = match &best {
            None => true,
            Some((c, parts, _)) => count > *c || (count == *c && &profile_parts(cols) > parts),
        };
        if better {
            best = Some((count, profile_parts(cols), cols.to_vec()));
        }
        ControlFlow::Continue(())
    })?;
    let Some((_, _, cols)) = best else {
        return Ok(SynthesisOutcome::Infeasible(Box::new(Infeasible {
            reason: "no blocking of this fraction keeps every required pair of factors in different groups"
                .into(),
            chromatic_number: chi,
            diagnostics: check_sufficient_conditions(g, req.q),
            achievable_profiles: Vec::new(),
            template_profiles: Vec::new(),
            advice: None,
        })));
    };
    let generator = GeneratorMatrix::from_columns(&cols)?;
    let (grouping, _) = FactorGrouping::from_generator(&generator)?;
    let d = expand_blocks(&generator, f)?;
    let lost = edges
        .iter()
        .filter(|&&(a, b)| alias_lost[a] >> b & 1 == 1)
        .count();
    let notes = if lost > 0 {
        vec![format!(
            "{lost} required interactions are aliased by the defining words themselves"
        )]
    } else {
        Vec::new()
    };
    let r = finish(req, d, grouping, None, notes)?;
    Ok(SynthesisOutcome::from_result(r))
}

/// Group sizes in descending order.
fn profile_parts(cols: &[Gf2Vector]) -> Vec<usize> {
    let mut counts: BTreeMap<Gf2Vector, usize> = BTreeMap::new();
    for c in cols {
        *counts.entry(*c).or_default() += 1;
    }
    let mut parts: Vec<usize> = counts.into_values().collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

/// Fractional synthesis through templates.
pub fn synthesize_fraction(
    req: &SynthesisRequest,
    catalog: Option<&Catalog>,
) -> Result<SynthesisOutcome> {
    req.validate()?;
    let g = &req.interactions;
    let k = req.max_colors();
    let (chi, ok) = colour_check(g, k)?;
    if !ok {
        return Ok(infeasible_colouring(req, chi));
    }
    if let Some(f) = &req.fraction {
        return synthesize_fixed_fraction(req, f, chi);
    }
    let cat = match catalog {
        Some(c) => c,
        None => Catalog::embedded()?,
    };
    let mut templates: Vec<Template> = cat
        .templates(req.n, req.p, req.q)
        .into_iter()
        .cloned()
        .collect();
    if templates.is_empty() {
        return Ok(SynthesisOutcome::Infeasible(Box::new(Infeasible {
            reason: format!(
                "no template for a 2^({}-{}) design in blocks of 2^{}; supply defining words",
                req.n, req.p, req.q
            ),
            chromatic_number: chi,
            diagnostics: check_sufficient_conditions(g, req.q),
            achievable_profiles: Vec::new(),
            template_profiles: Vec::new(),
            advice: None,
        })));
    }
    match req.objective {
        Objective::MaximizeEstimable => templates.sort_by(|a, b| {
            b.int_count
                .cmp(&a.int_count)
                .then_with(|| b.profile.parts().cmp(a.profile.parts()))
                .then_with(|| a.index.cmp(&b.index))
        }),
        Objective::RequireOnly => templates.sort_by_key(|t| t.index),
    }
    let mut best: Option<(Fit, usize)> = None;
    for (ti, t) in templates.iter().enumerate() {
        let Some(fit) = fit_template(g, t, COLORING_CAP) else {
            continue;
        };
        if fit.failures.is_empty() {
            let mut notes = Vec::new();
            if req.objective == Objective::MaximizeEstimable {
                let tied: Vec<String> = templates[ti + 1..]
                    .iter()
                    .filter(|o| o.int_count == t.int_count && o.profile != t.profile)
                    .filter(|o| {
                        fit_template(g, o, COLORING_CAP).is_some_and(|f| f.failures.is_empty())
                    })
                    .map(|o| o.profile.to_string())
                    .collect();
                if !tied.is_empty() {
                    notes.push(format!(
                        "profiles {} estimate as many interactions as {}; chose the lexicographically largest",
                        tied.join(", "),
                        t.profile
                    ));
                }
            }
            let r = realize_template(req, t, &fit.slot_of, notes)?;
            return Ok(SynthesisOutcome::from_result(r));
        }
        if best
            .as_ref()
            .is_none_or(|(b, _)| fit.failures.len() < b.failures.len())
        {
            best = Some((fit, ti));
        }
    }
    if let Some((fit, ti)) = best {
        let t = &templates[ti];
        let notes = vec![format!(
            "no mapping avoids aliased interactions; {} required interactions fail",
            fit.failures.len()
        )];
        let r = realize_template(req, t, &fit.slot_of, notes)?;
        return Ok(SynthesisOutcome::from_result(r));
    }
    let achievable = if g.n() <= graphs::MAX_EXACT {
        graphs::colorings_by_profile(g, req.q)?
            .into_keys()
            .filter(ProfileSet::is_realizable)
            .collect()
    } else {
        Vec::new()
    };
    let mut template_profiles: Vec<ProfileSet> =
        templates.iter().map(|t| t.profile.clone()).collect();
    template_profiles.sort();
    template_profiles.dedup();
    Ok(SynthesisOutcome::Infeasible(Box::new(Infeasible {
        reason: "no colouring of the requirements graph matches an available template profile"
            .into(),
        chromatic_number: chi,
        diagnostics: check_sufficient_conditions(g, req.q),
        achievable_profiles: achievable,
        template_profiles,
        advice: None,
    })))
}
