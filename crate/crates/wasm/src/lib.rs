//! Browser bindings. Every entry point takes plain strings and numbers and
//! returns a JSON string; the `*_json` functions are the same operations
//! for native callers and tests.

use blockplan::design::{count_estimable, phi_max};
use blockplan::effects::FractionSpec;
use blockplan::graphs::{self, check_sufficient_conditions, pair_name};
use blockplan::synth::{self, Objective, ScanConfig, SynthesisOutcome, SynthesisRequest};
use blockplan::RequirementsGraph;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct ProfileEntry {
    profile: String,
    estimable: u64,
    /// Colour class of each factor in a witness colouring.
    coloring: Vec<usize>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Chromatic number, condition flags and every achievable profile set.
pub fn analyze_json(n: usize, q: u32, interactions: &str) -> Result<String, String> {
    let g = RequirementsGraph::parse(n, interactions).map_err(err)?;
    let chi = graphs::chromatic_number(&g).map_err(err)?;
    let profiles: Vec<ProfileEntry> = graphs::colorings_by_profile(&g, q)
        .map_err(err)?
        .into_iter()
        .rev()
        .map(|(p, c)| ProfileEntry {
            profile: p.to_string(),
            estimable: count_estimable(&p),
            coloring: (0..n).map(|v| c.color(v)).collect(),
        })
        .collect();
    let doc = json!({
        "n": n,
        "q": q,
        "edges": g.edges().iter().map(|&(a, b)| pair_name(a, b, n)).collect::<Vec<_>>(),
        "chromatic_number": chi,
        "feasible": chi < (1 << q),
        "conditions": check_sufficient_conditions(&g, q),
        "phi_max": phi_max(n, q),
        "profiles": profiles,
    });
    serde_json::to_string(&doc).map_err(err)
}

/// Runs synthesis; `fraction` may be empty for a full factorial or a
/// catalog template.
pub fn construct_json(
    n: usize,
    p: usize,
    q: u32,
    interactions: &str,
    fraction: &str,
    objective: &str,
) -> Result<String, String> {
    let g = RequirementsGraph::parse(n, interactions).map_err(err)?;
    let objective: Objective = objective.parse().map_err(err)?;
    let mut req = SynthesisRequest::fractional(n, p, q, g).with_objective(objective);
    if !fraction.trim().is_empty() {
        req = req.with_fraction(FractionSpec::parse(n, fraction).map_err(err)?);
    }
    let doc = match synth::synthesize(&req, None).map_err(err)? {
        SynthesisOutcome::Success(r) | SynthesisOutcome::Partial(r) => {
            serde_json::to_value(r.to_document()).map_err(err)?
        }
        SynthesisOutcome::Infeasible(inf) => {
            let names = |v: &[(usize, usize)]| -> Vec<String> {
                v.iter().map(|&(a, b)| pair_name(a, b, n)).collect()
            };
            json!({
                "status": "infeasible",
                "reason": inf.reason,
                "chromatic_number": inf.chromatic_number,
                "achievable_profiles": inf.achievable_profiles.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "template_profiles": inf.template_profiles.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "single_edge_fixes": inf.advice.as_ref().map(|a| names(&a.single_edge_fixes)),
            })
        }
    };
    serde_json::to_string(&doc).map_err(err)
}

/// Profile sets reachable by blocking a fraction given in standard form.
pub fn scan_json(n: usize, words: &str, q: u32) -> Result<String, String> {
    let f = FractionSpec::parse(n, words).map_err(err)?;
    let hits = synth::scan_profiles(&f, q, &ScanConfig::default()).map_err(err)?;
    let rows: Vec<_> = hits
        .iter()
        .rev()
        .map(|(p, hit)| {
            json!({
                "profile": p.to_string(),
                "grouping": hit.grouping.to_string(),
                "generator": hit.generator(q).map(|g| g.to_rows()).unwrap_or_default(),
            })
        })
        .collect();
    serde_json::to_string(&rows).map_err(err)
}

#[wasm_bindgen]
pub fn analyze(n: usize, q: u32, interactions: &str) -> Result<String, JsError> {
    analyze_json(n, q, interactions).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn construct(
    n: usize,
    p: usize,
    q: u32,
    interactions: &str,
    fraction: &str,
    objective: &str,
) -> Result<String, JsError> {
    construct_json(n, p, q, interactions, fraction, objective).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn scan(n: usize, words: &str, q: u32) -> Result<String, JsError> {
    scan_json(n, words, q).map_err(|e| JsError::new(&e))
}
