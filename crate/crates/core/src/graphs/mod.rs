//! Requirements graphs and their colourings.
//!
//! Vertices are factors, edges are the interactions that must be estimable.
//! A proper colouring with at most `2^q - 1` colours is a factor grouping for
//! blocks of size `2^q`.

mod coloring;
mod conditions;
pub mod dot;

use std::fmt;

pub use coloring::{
    chromatic_number, coloring_with_sizes, colorings_by_profile, equitable_coloring, find_coloring,
    for_each_coloring_with_sizes, split_color_class, MAX_EXACT,
};
pub use conditions::{check_sufficient_conditions, ConditionReport};

use crate::design::{FactorGrouping, ProfileSet};
use crate::effects::{factor_name, EffectWord};
use crate::error::{Error, Result};

/// A simple graph on factors `0..n`, stored as adjacency bitmasks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RequirementsGraph {
    n: usize,
    adj: Vec<u64>,
}

impl RequirementsGraph {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidGraph(format!(
                "vertex count must be in 1..=64, got {n}"
            )));
        }
        Ok(Self { n, adj: vec![0; n] })
    }

    /// Duplicate edges collapse; loops and out-of-range vertices are errors.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n)?;
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Parses interactions such as `"AB AC BD"` or `"F1F2, F3F10"`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut g = Self::new(n)?;
        for tok in text
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let w = EffectWord::parse(tok, n)?;
            let (a, b) = w
                .as_pair()
                .ok_or_else(|| Error::Parse(format!("{tok:?} is not a two-factor interaction")))?;
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Self::new(n)?;
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(a, b)?;
            }
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n {
            return Err(Error::InvalidGraph(format!(
                "edge ({}, {}) out of range for {} vertices",
                a + 1,
                b + 1,
                self.n
            )));
        }
        if a == b {
            return Err(Error::InvalidGraph(format!(
                "loop at {}",
                factor_name(a, self.n)
            )));
        }
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
        Ok(())
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        if a < self.n && b < self.n {
            self.adj[a] &= !(1 << b);
            self.adj[b] &= !(1 << a);
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        (self.adj[a] >> b) & 1 == 1
    }

    /// Neighbour set of `v` as a bitmask.
    #[inline]
    pub fn neighbors(&self, v: usize) -> u64 {
        self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj
            .iter()
            .map(|a| a.count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            let mut m = self.adj[a] >> (a + 1) << (a + 1);
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                out.push((a, b));
                m &= m - 1;
            }
        }
        out
    }

    /// Same vertex set with every edge at `v` removed.
    pub fn without_vertex(&self, v: usize) -> Self {
        let mut g = self.clone();
        let nb = g.adj[v];
        g.adj[v] = 0;
        for (u, a) in g.adj.iter_mut().enumerate() {
            if (nb >> u) & 1 == 1 {
                *a &= !(1 << v);
            }
        }
        g
    }

    /// No cycles (a forest).
    pub fn is_acyclic(&self) -> bool {
        // a forest has n - c edges where c counts components
        self.edge_count() + self.component_count() == self.n
    }

    pub fn component_count(&self) -> usize {
        let mut seen = 0u64;
        let mut count = 0;
        for s in 0..self.n {
            if (seen >> s) & 1 == 1 {
                continue;
            }
            count += 1;
            let mut frontier = 1u64 << s;
            seen |= frontier;
            while frontier != 0 {
                let v = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let fresh = self.adj[v] & !seen;
                seen |= fresh;
                frontier |= fresh;
            }
        }
        count
    }

    /// Size of a largest clique (exact, by branch and bound).
    pub fn clique_number(&self) -> usize {
        let all = if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        };
        let mut best = 0;
        self.grow_clique(0, all, &mut best);
        best
    }

    fn grow_clique(&self, size: usize, mut cand: u64, best: &mut usize) {
        if cand == 0 {
            *best = (*best).max(size);
            return;
        }
        while cand != 0 {
            if size + cand.count_ones() as usize <= *best {
                return;
            }
            let v = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            self.grow_clique(size + 1, cand & self.adj[v], best);
        }
        *best = (*best).max(size);
    }

    /// Whether some `k` vertices are pairwise adjacent.
    pub fn has_clique(&self, k: usize) -> bool {
        k <= 1 && self.n >= k || self.clique_number() >= k
    }

    /// `AB AC ...` (or indexed form for large `n`).
    pub fn render_edges(&self) -> String {
        self.edges()
            .iter()
            .map(|&(a, b)| pair_name(a, b, self.n))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Debug for RequirementsGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RequirementsGraph(n={}; {})",
            self.n,
            self.render_edges()
        )
    }
}

/// Name of the interaction between factors `a` and `b`.
pub fn pair_name(a: usize, b: usize, n: usize) -> String {
    let (a, b) = (a.min(b), a.max(b));
    format!("{}{}", factor_name(a, n), factor_name(b, n))
}

/// A proper vertex colouring; colours are `0..k` and all are used.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Coloring {
    colors: Vec<usize>,
    k: usize,
}

impl Coloring {
    /// Checks properness and that colours `0..k` are all used.
    pub fn new(g: &RequirementsGraph, colors: Vec<usize>) -> Result<Self> {
        if colors.len() != g.n() {
            return Err(Error::InvalidGraph(format!(
                "{} colours for {} vertices",
                colors.len(),
                g.n()
            )));
        }
        let k = colors.iter().max().map_or(0, |&m| m + 1);
        let mut used = vec![false; k];
        for &c in &colors {
            used[c] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::InvalidGraph(
                "colour indices must be contiguous".into(),
            ));
        }
        for (a, b) in g.edges() {
            if colors[a] == colors[b] {
                return Err(Error::InvalidGraph(format!(
                    "edge {} joins two vertices of colour {}",
                    pair_name(a, b, g.n()),
                    colors[a] + 1
                )));
            }
        }
        Ok(Self { colors, k })
    }

    pub(crate) fn from_raw(colors: Vec<usize>) -> Self {
        let k = colors.iter().max().map_or(0, |&m| m + 1);
        Self { colors, k }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    #[inline]
    pub fn color(&self, v: usize) -> usize {
        self.colors[v]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (v, &c) in self.colors.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &c in &self.colors {
            out[c] += 1;
        }
        out
    }

    pub fn is_proper(&self, g: &RequirementsGraph) -> bool {
        g.edges()
            .iter()
            .all(|&(a, b)| self.colors[a] != self.colors[b])
    }

    pub fn is_equitable(&self) -> bool {
        let s = self.class_sizes();
        match (s.iter().max(), s.iter().min()) {
            (Some(hi), Some(lo)) => hi - lo <= 1,
            _ => true,
        }
    }

    pub fn profile(&self, q: u32) -> Result<ProfileSet> {
        ProfileSet::new(q, &self.class_sizes())
    }

    /// Pairs of vertices in different classes, `Σ_{i<j} n_i n_j`.
    pub fn cross_pairs(&self) -> u64 {
        let n = self.n() as u64;
        let sq: u64 = self.class_sizes().iter().map(|&x| (x * x) as u64).sum();
        (n * n - sq) / 2
    }

    /// Colour classes as groups, largest first, ties by smallest member.
    pub fn to_grouping(&self) -> FactorGrouping {
        FactorGrouping::new(self.n(), self.classes())
            .expect("colour classes partition the vertices")
            .canonical()
    }

    /// Renumbers colours so that classes come largest first, ties by
    /// smallest member.
    pub fn normalized(&self) -> Self {
        let mut order: Vec<usize> = (0..self.k).collect();
        let classes = self.classes();
        order.sort_by_key(|&c| (std::cmp::Reverse(classes[c].len()), classes[c][0]));
        let mut relabel = vec![0; self.k];
        for (new, &old) in order.iter().enumerate() {
            relabel[old] = new;
        }
        Self {
            colors: self.colors.iter().map(|&c| relabel[c]).collect(),
            k: self.k,
        }
    }
}
