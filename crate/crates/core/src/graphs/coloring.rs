use std::collections::BTreeMap;
use std::ops::ControlFlow;

use super::{Coloring, RequirementsGraph};
use crate::design::ProfileSet;
use crate::error::{Error, Result};

/// Largest vertex count accepted by the exact searches.
pub const MAX_EXACT: usize = 24;

fn check_exact(g: &RequirementsGraph) -> Result<()> {
    if g.n() > MAX_EXACT {
        return Err(Error::SearchTooLarge {
            n: g.n(),
            limit: MAX_EXACT,
        });
    }
    Ok(())
}

/// DSATUR state: per-vertex counts of neighbours holding each colour.
struct Dsatur<'a> {
    g: &'a RequirementsGraph,
    k: usize,
    colors: Vec<usize>,
    seen: Vec<Vec<u16>>,
    sat: Vec<u64>,
}

const NONE: usize = usize::MAX;

impl<'a> Dsatur<'a> {
    fn new(g: &'a RequirementsGraph, k: usize) -> Self {
        Self {
            g,
            k,
            colors: vec![NONE; g.n()],
            seen: vec![vec![0; k]; g.n()],
            sat: vec![0; g.n()],
        }
    }

    /// Highest saturation, then most uncoloured neighbours, then lowest index.
    fn pick(&self) -> Option<usize> {
        let uncolored: u64 = (0..self.g.n())
            .filter(|&v| self.colors[v] == NONE)
            .fold(0, |m, v| m | 1 << v);
        let mut best: Option<(u32, u32, usize)> = None;
        let mut m = uncolored;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            let key = (
                self.sat[v].count_ones(),
                (self.g.neighbors(v) & uncolored).count_ones(),
                v,
            );
            match best {
                Some((s, d, _)) if (key.0, key.1) <= (s, d) => {}
                _ => best = Some(key),
            }
        }
        best.map(|b| b.2)
    }

    fn assign(&mut self, v: usize, c: usize) {
        self.colors[v] = c;
        let mut m = self.g.neighbors(v);
        while m != 0 {
            let u = m.trailing_zeros() as usize;
            m &= m - 1;
            self.seen[u][c] += 1;
            self.sat[u] |= 1 << c;
        }
    }

    fn unassign(&mut self, v: usize) {
        let c = self.colors[v];
        self.colors[v] = NONE;
        let mut m = self.g.neighbors(v);
        while m != 0 {
            let u = m.trailing_zeros() as usize;
            m &= m - 1;
            self.seen[u][c] -= 1;
            if self.seen[u][c] == 0 {
                self.sat[u] &= !(1 << c);
            }
        }
    }

    fn solve(&mut self, used: usize) -> bool {
        let Some(v) = self.pick() else {
            return true;
        };
        for c in 0..(used + 1).min(self.k) {
            if (self.sat[v] >> c) & 1 == 1 {
                continue;
            }
            self.assign(v, c);
            if self.solve(used.max(c + 1)) {
                return true;
            }
            self.unassign(v);
        }
        false
    }

    fn greedy(&mut self) -> usize {
        let mut used = 0;
        while let Some(v) = self.pick() {
            let c = (0..self.k)
                .find(|&c| (self.sat[v] >> c) & 1 == 0)
                .expect("k = n always suffices");
            self.assign(v, c);
            used = used.max(c + 1);
        }
        used
    }
}

/// A proper colouring with at most `k` colours, or `None` when the
/// chromatic number exceeds `k`.
///
/// Vertices are taken in DSATUR order (lowest index breaks ties) and each
/// gets the lowest admissible colour, so the result is deterministic.
pub fn find_coloring(g: &RequirementsGraph, k: usize) -> Option<Coloring> {
    let k = k.min(g.n());
    if k == 0 {
        return None;
    }
    let mut s = Dsatur::new(g, k);
    s.solve(0).then(|| Coloring::from_raw(s.colors))
}

/// Exact chromatic number: clique lower bound, DSATUR upper bound, then
/// backtracking on the values in between.
pub fn chromatic_number(g: &RequirementsGraph) -> Result<usize> {
    check_exact(g)?;
    let lower = g.clique_number();
    let upper = Dsatur::new(g, g.n()).greedy();
    for k in lower..upper {
        if find_coloring(g, k).is_some() {
            return Ok(k);
        }
    }
    Ok(upper)
}

/// Capacitated search: class `c` must end with exactly `sizes[c]` vertices.
struct Sized<'a> {
    g: &'a RequirementsGraph,
    sizes: Vec<usize>,
    members: Vec<u64>,
    count: Vec<usize>,
    colors: Vec<usize>,
}

impl<'a> Sized<'a> {
    fn admissible(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let nb = self.g.neighbors(v);
        (0..self.sizes.len()).filter(move |&c| {
            if self.count[c] == self.sizes[c] || self.members[c] & nb != 0 {
                return false;
            }
            // equal-size classes are interchangeable; open them in order
            !(self.count[c] == 0
                && c > 0
                && self.sizes[c - 1] == self.sizes[c]
                && self.count[c - 1] == 0)
        })
    }

    fn pick(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for v in 0..self.g.n() {
            if self.colors[v] != NONE {
                continue;
            }
            let options = self.admissible(v).count();
            if options == 0 {
                return Some((v, 0));
            }
            if best.is_none_or(|(_, o)| options < o) {
                best = Some((v, options));
            }
        }
        best
    }

    fn run(&mut self, visit: &mut dyn FnMut(&Coloring) -> ControlFlow<()>) -> ControlFlow<()> {
        let Some((v, options)) = self.pick() else {
            return visit(&Coloring::from_raw(self.colors.clone()));
        };
        if options == 0 {
            return ControlFlow::Continue(());
        }
        let choices: Vec<usize> = self.admissible(v).collect();
        for c in choices {
            self.colors[v] = c;
            self.members[c] |= 1 << v;
            self.count[c] += 1;
            let flow = self.run(visit);
            self.count[c] -= 1;
            self.members[c] &= !(1 << v);
            self.colors[v] = NONE;
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Visits every proper colouring whose class `c` has exactly `sizes[c]`
/// vertices, where `sizes` is taken in descending order. Colourings that
/// differ only by swapping two classes of equal size are visited once.
pub fn for_each_coloring_with_sizes(
    g: &RequirementsGraph,
    sizes: &[usize],
    visit: &mut dyn FnMut(&Coloring) -> ControlFlow<()>,
) {
    let mut sizes: Vec<usize> = sizes.iter().copied().filter(|&s| s > 0).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    if sizes.iter().sum::<usize>() != g.n() || sizes.len() > 64 {
        return;
    }
    let mut s = Sized {
        g,
        members: vec![0; sizes.len()],
        count: vec![0; sizes.len()],
        colors: vec![NONE; g.n()],
        sizes,
    };
    let _ = s.run(visit);
}

/// First colouring (in search order) with the given class sizes.
pub fn coloring_with_sizes(g: &RequirementsGraph, sizes: &[usize]) -> Option<Coloring> {
    let mut found = None;
    for_each_coloring_with_sizes(g, sizes, &mut |c| {
        found = Some(c.clone());
        ControlFlow::Break(())
    });
    found
}

/// Partitions of `n` into at most `max_parts` positive parts, descending.
pub(crate) fn partitions(n: usize, max_parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, cap: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        if parts == 0 {
            return;
        }
        for x in (1..=cap.min(left)).rev() {
            cur.push(x);
            rec(left - x, x, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, max_parts, &mut Vec::new(), &mut out);
    out
}

/// One witness colouring per achievable class-size multiset using at most
/// `2^q - 1` colours.
pub fn colorings_by_profile(
    g: &RequirementsGraph,
    q: u32,
) -> Result<BTreeMap<ProfileSet, Coloring>> {
    check_exact(g)?;
    if q == 0 || q > crate::gf2::MAX_Q {
        return Err(Error::ExponentOutOfRange(q));
    }
    let k_star = ((1usize << q) - 1).min(g.n());
    let chi = chromatic_number(g)?;
    let mut out = BTreeMap::new();
    if chi > k_star {
        return Ok(out);
    }
    for parts in partitions(g.n(), k_star) {
        if parts.len() < chi {
            continue;
        }
        if let Some(c) = coloring_with_sizes(g, &parts) {
            out.insert(ProfileSet::new(q, &parts)?, c);
        }
    }
    Ok(out)
}

/// A proper colouring whose class sizes differ by at most one, using `k`
/// colours (or `n` singleton classes when `k > n`).
pub fn equitable_coloring(g: &RequirementsGraph, k: usize) -> Option<Coloring> {
    if k == 0 {
        return None;
    }
    let n = g.n();
    let k = k.min(n);
    let (base, extra) = (n / k, n % k);
    let sizes: Vec<usize> = (0..k).map(|i| base + usize::from(i < extra)).collect();
    coloring_with_sizes(g, &sizes)
}

/// Moves `⌊n_1/2⌋` vertices of a largest class into a new colour.
///
/// The largest class with the lowest colour index is split; its
/// highest-numbered vertices move.
pub fn split_color_class(c: &Coloring, g: &RequirementsGraph) -> Result<Coloring> {
    if !c.is_proper(g) {
        return Err(Error::InvalidGraph("colouring is not proper".into()));
    }
    let sizes = c.class_sizes();
    let (target, &n1) = sizes
        .iter()
        .enumerate()
        .max_by_key(|&(i, s)| (*s, std::cmp::Reverse(i)))
        .ok_or(Error::NothingToSplit)?;
    if n1 < 2 {
        return Err(Error::NothingToSplit);
    }
    let mut colors = c.colors().to_vec();
    let members: Vec<usize> = (0..colors.len()).filter(|&v| colors[v] == target).collect();
    for &v in &members[n1 - n1 / 2..] {
        colors[v] = c.k();
    }
    Ok(Coloring::from_raw(colors))
}
