//! Request documents and interaction lists.

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};
use blockplan::effects::{EffectWord, FractionSpec};
use blockplan::synth::{Objective, SynthesisRequest, DEFAULT_BUDGET};
use blockplan::RequirementsGraph;
use serde::{Deserialize, Serialize};

/// JSON request accepted by `--request`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestDocument {
    pub n: usize,
    #[serde(default)]
    pub p: usize,
    pub q: u32,
    #[serde(default)]
    pub interactions: Vec<String>,
    #[serde(default)]
    pub objective: Objective,
    /// Defining words overriding the catalog fraction.
    #[serde(default)]
    pub fraction: Option<Vec<String>>,
}

/// An input mistake: exits with the input-error status.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(InputError(msg.into()).into())
}

/// Splits interaction text into tokens with 1-based line and column.
/// `#` starts a comment.
fn tokens(text: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut start = None;
        for (i, c) in line
            .char_indices()
            .chain(std::iter::once((line.len(), ' ')))
        {
            let sep = c.is_whitespace() || c == ',' || c == ';';
            match (sep, start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    let col = line[..s].chars().count() + 1;
                    out.push((ln + 1, col, &line[s..i]));
                    start = None;
                }
                _ => {}
            }
        }
    }
    out
}

/// Parses interactions such as `AB AC` or `F1F2, F3F4`, one or many per
/// line, reporting the position of the first bad token.
pub fn parse_interactions(n: usize, text: &str, source: &str) -> Result<RequirementsGraph> {
    let mut g = RequirementsGraph::new(n).map_err(|e| InputError(e.to_string()))?;
    for (line, col, tok) in tokens(text) {
        let pair = EffectWord::parse(tok, n)
            .map_err(|e| e.to_string())
            .and_then(|w| {
                w.as_pair()
                    .ok_or_else(|| "not a two-factor interaction".to_string())
            });
        match pair {
            Ok((a, b)) => g.add_edge(a, b).map_err(|e| InputError(e.to_string()))?,
            Err(e) => return input_error(format!("{source}:{line}:{col}: {tok:?}: {e}")),
        }
    }
    Ok(g)
}

/// `--interactions` names a file when one exists at that path, otherwise it
/// is the interaction list itself.
pub fn read_interactions(n: usize, arg: &str) -> Result<RequirementsGraph> {
    let path = Path::new(arg);
    if path.is_file() {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        parse_interactions(n, &text, &path.display().to_string())
    } else {
        parse_interactions(n, arg, "<inline>")
    }
}

pub fn read_request_document(path: &Path) -> Result<RequestDocument> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        InputError(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
        .into()
    })
}

pub fn parse_fraction(n: usize, words: &str) -> Result<FractionSpec> {
    FractionSpec::parse(n, words).map_err(|e| InputError(format!("fraction {words:?}: {e}")).into())
}

impl RequestDocument {
    pub fn to_request(&self, budget: Option<u128>) -> Result<SynthesisRequest> {
        let g = parse_interactions(self.n, &self.interactions.join(" "), "interactions")?;
        let mut req = SynthesisRequest::fractional(self.n, self.p, self.q, g)
            .with_objective(self.objective)
            .with_budget(budget.unwrap_or(DEFAULT_BUDGET));
        if let Some(words) = &self.fraction {
            let f = parse_fraction(self.n, &words.join(" "))?;
            if self.p != 0 && f.p() != self.p {
                bail!(InputError(format!(
                    "p = {} but the fraction has {} words",
                    self.p,
                    f.p()
                )));
            }
            req = req.with_fraction(f);
        }
        req.validate().map_err(|e| InputError(e.to_string()))?;
        Ok(req)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_reported() {
        let err = parse_interactions(4, "AB AC\n  AD AZ", "s.txt").unwrap_err();
        assert!(err.to_string().starts_with("s.txt:2:6:"), "{err}");
        let err = parse_interactions(4, "AB A", "s.txt").unwrap_err();
        assert!(err.to_string().contains("1:4"), "{err}");
    }

    #[test]
    fn comments_and_separators() {
        let g = parse_interactions(4, "# header\nAB, AC; BD # trailing\n", "x").unwrap();
        assert_eq!(g.edge_count(), 3);
    }
}
