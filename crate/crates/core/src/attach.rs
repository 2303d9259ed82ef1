//! Procedure Attach: cover every non-isolated risky vertex of a safe/risky
//! labeled graph by vertex-disjoint stars whose leaves are all risky.

use std::collections::BTreeSet;

use serde::Serialize;

/// Undirected graph on `0..n` with a safe/risky label per vertex.
#[derive(Clone, Debug, Default)]
pub struct LabeledGraph {
    adj: Vec<Vec<usize>>,
    safe: Vec<bool>,
}

impl LabeledGraph {
    pub fn new(safe: Vec<bool>) -> Self {
        Self { adj: vec![Vec::new(); safe.len()], safe }
    }

    pub fn n(&self) -> usize {
        self.safe.len()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v, "self-loop at {u}");
        if !self.adj[u].contains(&v) {
            self.adj[u].push(v);
            self.adj[v].push(u);
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn is_safe(&self, v: usize) -> bool {
        self.safe[v]
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.adj[v].is_empty()
    }

    /// The attachment arc of a risky vertex: its lowest-index safe neighbor,
    /// or failing that its lowest-index neighbor.
    fn arc(&self, z: usize) -> Option<usize> {
        if self.safe[z] {
            return None;
        }
        let nb = &self.adj[z];
        nb.iter().copied().filter(|&x| self.safe[x]).min().or_else(|| nb.iter().copied().min())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Star {
    pub center: usize,
    pub leaves: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StarForest {
    pub stars: Vec<Star>,
}

pub fn attach(g: &LabeledGraph) -> StarForest {
    attach_with_arcs(g, (0..g.n()).map(|z| g.arc(z)).collect())
}

/// Runs both stages on a given attachment digraph: `out[z]` is the arc of
/// risky `z`, which must point to a neighbor of `z`.
pub fn attach_with_arcs(g: &LabeledGraph, mut out: Vec<Option<usize>>) -> StarForest {
    let n = g.n();
    assert_eq!(out.len(), n);
    let mut indeg = vec![0usize; n];
    for &x in out.iter().flatten() {
        indeg[x] += 1;
    }
    let mut star_of: Vec<Option<usize>> = vec![None; n];
    let mut stars: Vec<Star> = Vec::new();

    // Stage 1: peel sources of the attachment digraph.
    let mut work: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0 && out[v].is_some()).collect();
    while let Some(z) = work.pop_first() {
        let Some(s) = out[z].take() else { continue };
        indeg[s] -= 1;
        match star_of[s] {
            Some(k) if stars[k].center == s => {
                stars[k].leaves.push(z);
                star_of[z] = Some(k);
            }
            _ => {
                let k = stars.len();
                stars.push(Star { center: s, leaves: vec![z] });
                star_of[s] = Some(k);
                star_of[z] = Some(k);
                if let Some(y) = out[s].take() {
                    indeg[y] -= 1;
                    if indeg[y] == 0 && out[y].is_some() {
                        work.insert(y);
                    }
                }
            }
        }
        if indeg[s] == 0 && out[s].is_some() {
            work.insert(s);
        }
    }

    // Stage 2: what remains is a union of directed cycles.
    for v0 in 0..n {
        if out[v0].is_none() {
            continue;
        }
        let mut cycle = vec![v0];
        let mut v = out[v0].take().expect("cycle arc");
        while v != v0 {
            cycle.push(v);
            v = out[v].take().expect("cycle arc");
        }
        let g_len = cycle.len();
        let pairs_end = if g_len % 2 == 0 { g_len } else { g_len - 3 };
        for pair in cycle[..pairs_end].chunks(2) {
            stars.push(Star { center: pair[1], leaves: vec![pair[0]] });
        }
        if g_len % 2 == 1 {
            stars.push(Star { center: cycle[g_len - 2], leaves: vec![cycle[g_len - 3], cycle[g_len - 1]] });
        }
    }
    StarForest { stars }
}

/// Checks conditions 1 and 2, disjointness, and that star edges are graph edges.
pub fn check_star_forest(g: &LabeledGraph, f: &StarForest) -> Result<(), String> {
    let mut seen = vec![false; g.n()];
    for (k, star) in f.stars.iter().enumerate() {
        if star.leaves.is_empty() {
            return Err(format!("star {k} centered at {} has no leaves", star.center));
        }
        for &v in std::iter::once(&star.center).chain(&star.leaves) {
            if v >= g.n() {
                return Err(format!("star {k} names vertex {v} outside the graph"));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(format!("vertex {v} appears in two stars or twice in star {k}"));
            }
        }
        for &q in &star.leaves {
            if g.is_safe(q) {
                return Err(format!("leaf {q} of star {k} is safe"));
            }
            if !g.has_edge(star.center, q) {
                return Err(format!("star edge ({}, {q}) is not a graph edge", star.center));
            }
        }
    }
    for (v, &covered) in seen.iter().enumerate() {
        if !g.is_safe(v) && !g.is_isolated(v) && !covered {
            return Err(format!("non-isolated risky vertex {v} is not covered"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(labels: &str, edges: &[(usize, usize)]) -> LabeledGraph {
        let mut g = LabeledGraph::new(labels.chars().map(|c| c == 's').collect());
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    #[test]
    fn risky_to_safe_edge() {
        let g = graph("rs", &[(0, 1)]);
        let f = attach(&g);
        assert_eq!(f.stars, vec![Star { center: 1, leaves: vec![0] }]);
        check_star_forest(&g, &f).unwrap();
    }

    #[test]
    fn three_cycle_inverts_last_arc() {
        // Arcs 0→1→2→0 with no sources: everything reaches stage 2.
        let g = graph("rrr", &[(0, 1), (1, 2), (2, 0)]);
        let f = attach_with_arcs(&g, vec![Some(1), Some(2), Some(0)]);
        assert_eq!(f.stars, vec![Star { center: 1, leaves: vec![0, 2] }]);
        check_star_forest(&g, &f).unwrap();
    }

    #[test]
    fn four_cycle_pairs_up() {
        let g = graph("rrrr", &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let f = attach_with_arcs(&g, vec![Some(1), Some(2), Some(3), Some(0)]);
        check_star_forest(&g, &f).unwrap();
        assert_eq!(f.stars, vec![Star { center: 1, leaves: vec![0] }, Star { center: 3, leaves: vec![2] }]);
        // Lowest-neighbor arcs: 0→1, 1→0, 2→1, 3→0. Sources 2 and 3 peel first.
        let f = attach(&g);
        check_star_forest(&g, &f).unwrap();
        assert_eq!(f.stars, vec![Star { center: 1, leaves: vec![2] }, Star { center: 0, leaves: vec![3] }]);
    }

    #[test]
    fn isolated_risky_is_skipped() {
        let g = graph("rrs", &[(1, 2)]);
        let f = attach(&g);
        assert!(f.stars.iter().all(|s| s.center != 0 && !s.leaves.contains(&0)));
        check_star_forest(&g, &f).unwrap();
    }

    #[test]
    fn checker_rejects_bad_forests() {
        let g = graph("rrs", &[(0, 2), (1, 2)]);
        assert!(check_star_forest(&g, &StarForest::default()).unwrap_err().contains("not covered"));
        let safe_leaf = StarForest { stars: vec![Star { center: 0, leaves: vec![2] }] };
        assert!(check_star_forest(&g, &safe_leaf).is_err());
        let no_edge = StarForest { stars: vec![Star { center: 1, leaves: vec![0] }] };
        assert!(check_star_forest(&g, &no_edge).is_err());
        let empty = StarForest { stars: vec![Star { center: 2, leaves: vec![] }] };
        assert!(check_star_forest(&g, &empty).unwrap_err().contains("no leaves"));
    }

    #[test]
    fn chain_of_risky_vertices() {
        // 0→1→2→3, 3→2: sources peel from the left.
        let g = graph("rrrr", &[(0, 1), (1, 2), (2, 3)]);
        let f = attach(&g);
        check_star_forest(&g, &f).unwrap();
    }
}
