use serde::Serialize;

use super::RequirementsGraph;

/// Sufficient conditions for a requirements graph to fit blocks of `2^q`.
///
/// Any of the first three flags guarantees a proper colouring in at most
/// `2^q - 1` colours. The two forest flags (only evaluated for `q = 2`)
/// additionally guarantee an equitable 3-colouring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub q: u32,
    pub max_degree: usize,
    /// Max degree at most `2^q - 1` and no complete subgraph on `2^q` vertices.
    pub degree_and_clique: bool,
    /// At most `2^q - 1` vertices of degree `2^q - 1` or more.
    pub few_high_degree: bool,
    /// `q = 2`: acyclic, or all cycles pass through one common vertex.
    pub cycles_share_vertex: Option<bool>,
    pub forest: bool,
    /// `q = 2`, forest, and max degree `Δ` with `3Δ ≤ n + 8` or `3Δ = n + 10`.
    pub bollobas_guy: Option<bool>,
    /// `q = 2`, forest with max degree at most 4.
    pub forest_degree_four: Option<bool>,
}

impl ConditionReport {
    /// Some flag guarantees a colouring in `2^q - 1` colours.
    pub fn colorable(&self) -> bool {
        self.degree_and_clique || self.few_high_degree || self.cycles_share_vertex == Some(true)
    }

    /// Some flag guarantees an equitable 3-colouring.
    pub fn equitable(&self) -> bool {
        self.bollobas_guy == Some(true) || self.forest_degree_four == Some(true)
    }
}

/// Evaluates each condition exactly as stated; no flag is inferred from
/// another.
pub fn check_sufficient_conditions(g: &RequirementsGraph, q: u32) -> ConditionReport {
    let n = g.n();
    let k = if q >= 63 {
        usize::MAX
    } else {
        (1usize << q) - 1
    };
    let max_degree = g.max_degree();
    let degree_and_clique = max_degree <= k && (k >= n || !g.has_clique(k + 1));
    let high = (0..n).filter(|&v| g.degree(v) >= k).count();
    let few_high_degree = high <= k;
    let forest = g.is_acyclic();
    let (cycles_share_vertex, bollobas_guy, forest_degree_four) = if q == 2 {
        let share = forest || (0..n).any(|v| g.without_vertex(v).is_acyclic());
        let bg = forest && (3 * max_degree <= n + 8 || 3 * max_degree == n + 10);
        (Some(share), Some(bg), Some(forest && max_degree <= 4))
    } else {
        (None, None, None)
    };
    ConditionReport {
        n,
        q,
        max_degree,
        degree_and_clique,
        few_high_degree,
        cycles_share_vertex,
        forest,
        bollobas_guy,
        forest_degree_four,
    }
}
