//! Weighted undirected graphs over point ids and the exact oracles used to
//! measure them: Dijkstra, Prim, preorder traversal and hop-bounded distances.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PointId};
use crate::scalar::{le_rel, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge<S> {
    pub u: PointId,
    pub v: PointId,
    pub w: S,
}

/// Undirected weighted graph on vertices `0..n`. Inserting an existing pair
/// is a no-op, so the edge set never holds parallel edges.
#[derive(Clone, Debug)]
pub struct SpannerGraph<S> {
    n: usize,
    edges: Vec<Edge<S>>,
    adj: Vec<Vec<(PointId, S)>>,
    present: HashSet<(PointId, PointId)>,
}

fn key(u: PointId, v: PointId) -> (PointId, PointId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl<S: Scalar> SpannerGraph<S> {
    pub fn new(n: usize) -> Self {
        Self { n, edges: Vec::new(), adj: vec![Vec::new(); n], present: HashSet::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Inserts `{u, v}` with weight `w`; returns `false` if it was present.
    ///
    /// # Panics
    /// On a self-loop or an out-of-range endpoint.
    pub fn add_edge(&mut self, u: PointId, v: PointId, w: S) -> bool {
        assert!(u != v, "self-loop at {u}");
        assert!(u < self.n && v < self.n, "edge ({u},{v}) out of range for n = {}", self.n);
        if !self.present.insert(key(u, v)) {
            return false;
        }
        self.edges.push(Edge { u, v, w });
        self.adj[u].push((v, w));
        self.adj[v].push((u, w));
        true
    }

    pub fn has_edge(&self, u: PointId, v: PointId) -> bool {
        self.present.contains(&key(u, v))
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, u: PointId) -> &[(PointId, S)] {
        &self.adj[u]
    }

    pub fn degree(&self, u: PointId) -> usize {
        self.adj[u].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn weight(&self) -> S {
        self.edges.iter().fold(S::zero(), |acc, e| acc + e.w)
    }

    pub fn max_edge_weight(&self) -> S {
        self.edges.iter().fold(S::zero(), |acc, e| acc.max(e.w))
    }

    /// Adds every edge of `other`; returns the number of new edges.
    pub fn union_with(&mut self, other: &SpannerGraph<S>) -> usize {
        other.edges.iter().filter(|e| self.add_edge(e.u, e.v, e.w)).count()
    }

    /// Subgraph keeping only edges with both endpoints in `keep`.
    pub fn restricted_to(&self, keep: &[bool]) -> SpannerGraph<S> {
        let mut g = SpannerGraph::new(self.n);
        for e in &self.edges {
            if keep[e.u] && keep[e.v] {
                g.add_edge(e.u, e.v, e.w);
            }
        }
        g
    }

    /// Copy without the edges in `drop`.
    pub fn without(&self, drop: &SpannerGraph<S>) -> SpannerGraph<S> {
        let mut g = SpannerGraph::new(self.n);
        for e in &self.edges {
            if !drop.has_edge(e.u, e.v) {
                g.add_edge(e.u, e.v, e.w);
            }
        }
        g
    }

    /// Edge-list export: one `u v w` line per edge, `u < v`, sorted.
    pub fn to_edge_list(&self) -> String {
        let mut rows: Vec<(PointId, PointId, S)> =
            self.edges.iter().map(|e| (e.u.min(e.v), e.u.max(e.v), e.w)).collect();
        rows.sort_by_key(|r| (r.0, r.1));
        let mut out = String::new();
        for (u, v, w) in rows {
            let _ = writeln!(out, "{u} {v} {w}");
        }
        out
    }

    pub fn parse_edge_list(n: usize, text: &str) -> Result<Self> {
        let mut g = SpannerGraph::new(n);
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(bad("expected `u v w`"));
            }
            let u: usize = toks[0].parse().map_err(|_| bad("bad vertex"))?;
            let v: usize = toks[1].parse().map_err(|_| bad("bad vertex"))?;
            let w: S = toks[2].parse().map_err(|_| bad("bad weight"))?;
            if u == v || u >= n || v >= n {
                return Err(bad("edge endpoint invalid"));
            }
            g.add_edge(u, v, w);
        }
        Ok(g)
    }
}

/// Max-heap entry ordered so that the smallest distance pops first.
#[derive(Clone, Copy)]
struct MinItem<S>(S, PointId);

impl<S: Scalar> PartialEq for MinItem<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for MinItem<S> {}
impl<S: Scalar> PartialOrd for MinItem<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for MinItem<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(other.1.cmp(&self.1))
    }
}

/// Exact single-source shortest-path lengths; unreachable vertices get `+∞`.
pub fn dijkstra_from<S: Scalar>(g: &SpannerGraph<S>, s: PointId) -> Vec<S> {
    let mut dist = vec![S::infinity(); g.n()];
    dist[s] = S::zero();
    let mut heap = BinaryHeap::from([MinItem(S::zero(), s)]);
    while let Some(MinItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(MinItem(nd, v));
            }
        }
    }
    dist
}

/// Reusable scratch state for many bounded Dijkstra runs on one graph.
pub struct BoundedDijkstra<S> {
    dist: Vec<S>,
    touched: Vec<PointId>,
    heap: BinaryHeap<MinItem<S>>,
}

impl<S: Scalar> BoundedDijkstra<S> {
    pub fn new(n: usize) -> Self {
        Self { dist: vec![S::infinity(); n], touched: Vec::new(), heap: BinaryHeap::new() }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = S::infinity();
        }
        self.touched.clear();
        self.heap.clear();
    }

    /// Shortest `s`–`t` distance if it is at most `bound`, else `None`.
    /// Vertices farther than `bound` are never expanded.
    pub fn distance_within(&mut self, adj: &[Vec<(PointId, S)>], s: PointId, t: PointId, bound: S) -> Option<S> {
        self.reset();
        self.dist[s] = S::zero();
        self.touched.push(s);
        self.heap.push(MinItem(S::zero(), s));
        while let Some(MinItem(d, u)) = self.heap.pop() {
            if u == t {
                return Some(d);
            }
            if d > self.dist[u] {
                continue;
            }
            for &(v, w) in &adj[u] {
                let nd = d + w;
                if nd <= bound && nd < self.dist[v] {
                    if self.dist[v] == S::infinity() {
                        self.touched.push(v);
                    }
                    self.dist[v] = nd;
                    self.heap.push(MinItem(nd, v));
                }
            }
        }
        None
    }

    /// All vertices within `bound` of `s`, with their distances.
    pub fn ball(&mut self, g: &SpannerGraph<S>, s: PointId, bound: S) -> Vec<(PointId, S)> {
        self.ball_in(&g.adj, s, bound)
    }

    /// [`ball`](Self::ball) over a bare adjacency list.
    pub fn ball_in(&mut self, adj: &[Vec<(PointId, S)>], s: PointId, bound: S) -> Vec<(PointId, S)> {
        self.reset();
        self.dist[s] = S::zero();
        self.touched.push(s);
        self.heap.push(MinItem(S::zero(), s));
        let mut out = Vec::new();
        while let Some(MinItem(d, u)) = self.heap.pop() {
            if d > self.dist[u] {
                continue;
            }
            out.push((u, d));
            for &(v, w) in &adj[u] {
                let nd = d + w;
                if nd <= bound && nd < self.dist[v] {
                    if self.dist[v] == S::infinity() {
                        self.touched.push(v);
                    }
                    self.dist[v] = nd;
                    self.heap.push(MinItem(nd, v));
                }
            }
        }
        out
    }
}

/// Minimum spanning tree. Without `over`, runs O(n²) Prim on the complete
/// metric; with `over`, runs heap Prim restricted to that graph's edges.
pub fn prim_mst<S: Scalar>(m: &MetricSpace<S>, over: Option<&SpannerGraph<S>>) -> Result<SpannerGraph<S>> {
    let n = m.n();
    let mut tree = SpannerGraph::new(n);
    if n <= 1 {
        return Ok(tree);
    }
    match over {
        None => {
            let mut in_tree = vec![false; n];
            let mut best = vec![S::infinity(); n];
            let mut from = vec![0usize; n];
            let mut u = 0;
            in_tree[0] = true;
            for _ in 1..n {
                let mut next = usize::MAX;
                for v in 0..n {
                    if in_tree[v] {
                        continue;
                    }
                    let d = m.dist(u, v);
                    if d < best[v] {
                        best[v] = d;
                        from[v] = u;
                    }
                    if next == usize::MAX || best[v] < best[next] {
                        next = v;
                    }
                }
                in_tree[next] = true;
                tree.add_edge(from[next], next, best[next]);
                u = next;
            }
        }
        Some(g) => {
            let mut in_tree = vec![false; n];
            let mut best = vec![S::infinity(); n];
            let mut from = vec![usize::MAX; n];
            let mut heap = BinaryHeap::from([MinItem(S::zero(), 0)]);
            best[0] = S::zero();
            while let Some(MinItem(d, u)) = heap.pop() {
                if in_tree[u] || d > best[u] {
                    continue;
                }
                in_tree[u] = true;
                if from[u] != usize::MAX {
                    tree.add_edge(from[u], u, d);
                }
                for &(v, w) in g.neighbors(u) {
                    if !in_tree[v] && w < best[v] {
                        best[v] = w;
                        from[v] = u;
                        heap.push(MinItem(w, v));
                    }
                }
            }
            if tree.edge_count() != n - 1 {
                return Err(Error::DisconnectedInput);
            }
        }
    }
    Ok(tree)
}

/// The Hamiltonian path `L`: a point order with prefix sums of consecutive
/// distances.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianPath<S> {
    order: Vec<PointId>,
    rank: Vec<usize>,
    prefix: Vec<S>,
}

impl<S: Scalar> HamiltonianPath<S> {
    /// Builds the path visiting `order`, measuring hops with `m`.
    pub fn from_order(order: Vec<PointId>, m: &MetricSpace<S>) -> Self {
        let mut rank = vec![usize::MAX; m.n()];
        let mut prefix = Vec::with_capacity(order.len());
        let mut acc = S::zero();
        for (k, &p) in order.iter().enumerate() {
            if k > 0 {
                acc = acc + m.dist(order[k - 1], p);
            }
            rank[p] = k;
            prefix.push(acc);
        }
        Self { order, rank, prefix }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[PointId] {
        &self.order
    }

    /// Position of `p` along the path.
    pub fn rank(&self, p: PointId) -> usize {
        self.rank[p]
    }

    /// Path distance from the first point to `p`.
    pub fn position(&self, p: PointId) -> S {
        self.prefix[self.rank[p]]
    }

    pub fn prefix(&self) -> &[S] {
        &self.prefix
    }

    /// Total length `L`.
    pub fn total(&self) -> S {
        self.prefix.last().copied().unwrap_or_else(S::zero)
    }

    /// δ_L(p, q).
    pub fn delta_l(&self, p: PointId, q: PointId) -> S {
        (self.position(p) - self.position(q)).abs()
    }

    /// `p ≺_L q`.
    pub fn precedes(&self, p: PointId, q: PointId) -> bool {
        self.rank[p] < self.rank[q]
    }
}

/// Preorder traversal of a spanning tree from `root`, children in ascending id.
pub fn preorder_path<S: Scalar>(
    tree: &SpannerGraph<S>,
    m: &MetricSpace<S>,
    root: PointId,
) -> Result<HamiltonianPath<S>> {
    let n = m.n();
    if tree.n() != n {
        return Err(Error::NotATree(format!("tree has {} vertices, metric has {n}", tree.n())));
    }
    if n > 0 && tree.edge_count() != n - 1 {
        return Err(Error::NotATree(format!("{} edges for {n} vertices", tree.edge_count())));
    }
    if n == 0 {
        return Ok(HamiltonianPath::from_order(Vec::new(), m));
    }
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        order.push(u);
        let mut kids: Vec<PointId> = tree.neighbors(u).iter().map(|&(v, _)| v).filter(|&v| !seen[v]).collect();
        kids.sort_unstable_by(|a, b| b.cmp(a));
        for v in kids {
            seen[v] = true;
            stack.push(v);
        }
    }
    if order.len() != n {
        return Err(Error::NotATree("tree is disconnected".into()));
    }
    Ok(HamiltonianPath::from_order(order, m))
}

/// Dense `n × n` distance table.
#[derive(Clone, Debug, PartialEq)]
pub struct DistMatrix<S> {
    pub n: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> DistMatrix<S> {
    pub fn get(&self, p: PointId, q: PointId) -> S {
        self.data[p * self.n + q]
    }
}

fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::SizeLimitExceeded { what, n, cap });
    }
    Ok(())
}

/// One min-plus relaxation round: `next[p][v] = min(cur[p][v], cur[p][u] + w(u,v))`.
fn relax_round<S: Scalar>(g: &SpannerGraph<S>, cur: &[S], next: &mut [S]) {
    let n = g.n();
    next.copy_from_slice(cur);
    for p in 0..n {
        let row = &cur[p * n..(p + 1) * n];
        let out = &mut next[p * n..(p + 1) * n];
        for e in g.edges() {
            let (du, dv) = (row[e.u], row[e.v]);
            if du + e.w < out[e.v] {
                out[e.v] = du + e.w;
            }
            if dv + e.w < out[e.u] {
                out[e.u] = dv + e.w;
            }
        }
    }
}

fn identity_matrix<S: Scalar>(n: usize) -> Vec<S> {
    let mut d = vec![S::infinity(); n * n];
    for p in 0..n {
        d[p * n + p] = S::zero();
    }
    d
}

/// Distances over paths with at most `h` edges.
pub fn hop_bounded_distances<S: Scalar>(g: &SpannerGraph<S>, h: usize, cap: usize) -> Result<DistMatrix<S>> {
    let n = g.n();
    check_cap("hop_bounded_distances", n, cap)?;
    let mut cur = identity_matrix(n);
    let mut next = cur.clone();
    for _ in 0..h {
        relax_round(g, &cur, &mut next);
        if next == cur {
            break;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(DistMatrix { n, data: cur })
}

/// Least `h` such that every pair `p ≠ q` among `vertices` has a path of at
/// most `h` edges and weight at most `s · dist(p, q)` (relative tolerance
/// 1e-9). `None` when no `h` qualifies.
///
/// Rounds are applied one at a time and the condition is checked after each,
/// so every relaxation is reused by the next round.
pub fn hop_diameter<S, F>(g: &SpannerGraph<S>, vertices: &[PointId], dist: F, s: S, cap: usize) -> Result<Option<usize>>
where
    S: Scalar,
    F: Fn(PointId, PointId) -> S,
{
    let n = g.n();
    check_cap("hop_diameter", n, cap)?;
    if vertices.len() <= 1 {
        return Ok(Some(0));
    }
    let targets: Vec<(PointId, PointId, S)> = vertices
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| vertices[i + 1..].iter().map(move |&q| (p, q)))
        .map(|(p, q)| (p, q, s * dist(p, q)))
        .collect();
    let mut cur = identity_matrix(n);
    let mut next = cur.clone();
    let mut pending: Vec<usize> = (0..targets.len()).collect();
    for h in 1..n.max(2) {
        relax_round(g, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        pending.retain(|&k| {
            let (p, q, bound) = targets[k];
            !le_rel(cur[p * n + q], bound, 1e-9)
        });
        if pending.is_empty() {
            return Ok(Some(h));
        }
        if cur == next {
            break;
        }
    }
    Ok(None)
}

/// Maximum over pairs of `d_G(p,q) / dist(p,q)`, via one Dijkstra per source.
pub fn stretch<S, F>(g: &SpannerGraph<S>, vertices: &[PointId], dist: F, cap: usize) -> Result<S>
where
    S: Scalar,
    F: Fn(PointId, PointId) -> S,
{
    check_cap("stretch", vertices.len(), cap)?;
    let mut worst = S::one();
    for (i, &p) in vertices.iter().enumerate() {
        let d = dijkstra_from(g, p);
        for &q in &vertices[i + 1..] {
            let r = d[q] / dist(p, q);
            if r > worst || r.is_nan() {
                worst = if r.is_nan() { S::infinity() } else { r };
            }
        }
    }
    Ok(worst)
}

/// Size limits for the quadratic and cubic oracles.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleCaps {
    pub apsp: usize,
    pub minplus: usize,
    pub greedy: usize,
    pub exact_mst: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self { apsp: 2048, minplus: 512, greedy: 4096, exact_mst: 8192 }
    }
}

impl OracleCaps {
    pub const ENV_VAR: &'static str = "LIGHTSP_ORACLE_CAPS";

    /// Parses `apsp=2048,minplus=512,...`; unknown keys are an error.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut caps = Self::default();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("oracle cap {part:?}: expected key=value")))?;
            let v: usize = v.trim().parse().map_err(|_| Error::InvalidSpec(format!("oracle cap {part:?}")))?;
            match k.trim() {
                "apsp" => caps.apsp = v,
                "minplus" => caps.minplus = v,
                "greedy" => caps.greedy = v,
                "exact_mst" => caps.exact_mst = v,
                other => return Err(Error::InvalidSpec(format!("unknown oracle cap {other:?}"))),
            }
        }
        Ok(caps)
    }

    /// Defaults overridden by the environment variable, if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(Self::ENV_VAR) {
            Ok(s) => Self::parse(&s),
            Err(_) => Ok(Self::default()),
        }
    }
}

/// Summary measurements of a graph against its metric.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Measurement {
    pub edge_count: usize,
    pub max_degree: usize,
    pub weight: f64,
    pub lightness: Option<f64>,
    pub stretch: Option<f64>,
    pub hop_diameter: Option<usize>,
}

/// Measures `g`; stretch and hop diameter (at stretch `s`) are `None` above the caps.
pub fn measure<S: Scalar>(g: &SpannerGraph<S>, m: &MetricSpace<S>, s: S, caps: &OracleCaps) -> Measurement {
    let all: Vec<PointId> = (0..m.n()).collect();
    let dist = |p, q| m.dist(p, q);
    let lightness = (m.n() <= caps.exact_mst)
        .then(|| prim_mst(m, None).ok())
        .flatten()
        .map(|t| t.weight())
        .filter(|w| *w > S::zero())
        .map(|w| (g.weight() / w).as_f64());
    Measurement {
        edge_count: g.edge_count(),
        max_degree: g.max_degree(),
        weight: g.weight().as_f64(),
        lightness,
        stretch: stretch(g, &all, dist, caps.apsp).ok().map(S::as_f64),
        hop_diameter: hop_diameter(g, &all, dist, s, caps.minplus).ok().flatten(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{generate_points, PointKind};

    fn path_graph(n: usize) -> SpannerGraph<f64> {
        let mut g = SpannerGraph::new(n);
        for i in 1..n {
            g.add_edge(i - 1, i, 1.0);
        }
        g
    }

    #[test]
    fn insert_is_idempotent() {
        let mut g = SpannerGraph::<f64>::new(3);
        assert!(g.add_edge(0, 1, 1.0));
        assert!(!g.add_edge(1, 0, 1.0));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    #[should_panic(expected = "self-loop")]
    fn self_loop_panics() {
        SpannerGraph::<f64>::new(2).add_edge(1, 1, 0.0);
    }

    #[test]
    fn dijkstra_triangle_and_isolated() {
        let mut g = SpannerGraph::<f64>::new(4);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 1.0);
        g.add_edge(0, 2, 3.0);
        let d = dijkstra_from(&g, 0);
        assert_eq!(d[2], 2.0);
        assert!(d[3].is_infinite());
    }

    #[test]
    fn prim_on_line_and_singleton() {
        let m = MetricSpace::<f64>::from_points(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let t = prim_mst(&m, None).unwrap();
        assert_eq!(t.weight(), 3.0);
        assert!(t.has_edge(0, 1) && t.has_edge(1, 2));
        let one = MetricSpace::<f64>::from_points(&[vec![0.0]]).unwrap();
        assert_eq!(prim_mst(&one, None).unwrap().edge_count(), 0);
    }

    #[test]
    fn prim_over_disconnected_graph_fails() {
        let m = generate_points::<f64>(PointKind::Uniform, 4, 2, 1).unwrap();
        let mut g = SpannerGraph::new(4);
        g.add_edge(0, 1, m.dist(0, 1));
        assert!(matches!(prim_mst(&m, Some(&g)), Err(Error::DisconnectedInput)));
    }

    #[test]
    fn preorder_of_star_and_path() {
        let m = MetricSpace::<f64>::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]])
            .unwrap();
        let mut star = SpannerGraph::new(4);
        for leaf in 1..4 {
            star.add_edge(0, leaf, 1.0);
        }
        let p = preorder_path(&star, &m, 0).unwrap();
        assert_eq!(p.order(), &[0, 1, 2, 3]);
        let expected = 1.0 + 2f64.sqrt() + 2f64.sqrt();
        assert!((p.total() - expected).abs() < 1e-12);
        assert!(p.total() <= 2.0 * star.weight());

        let line = generate_points::<f64>(PointKind::Line, 5, 1, 0).unwrap();
        let t = prim_mst(&line, None).unwrap();
        let p = preorder_path(&t, &line, 0).unwrap();
        assert_eq!(p.total(), t.weight());

        let mut bad = SpannerGraph::new(4);
        bad.add_edge(0, 1, 1.0);
        assert!(matches!(preorder_path(&bad, &m, 0), Err(Error::NotATree(_))));
    }

    #[test]
    fn hop_bounded_unit_path() {
        let g = path_graph(4);
        let d2 = hop_bounded_distances(&g, 2, 512).unwrap();
        assert!(d2.get(0, 3).is_infinite());
        let d3 = hop_bounded_distances(&g, 3, 512).unwrap();
        assert_eq!(d3.get(0, 3), 3.0);
        assert!(matches!(hop_bounded_distances(&path_graph(10), 1, 5), Err(Error::SizeLimitExceeded { .. })));
    }

    #[test]
    fn complete_graph_measurements() {
        let m = generate_points::<f64>(PointKind::Uniform, 12, 2, 3).unwrap();
        let mut g = SpannerGraph::new(12);
        for p in 0..12 {
            for q in p + 1..12 {
                g.add_edge(p, q, m.dist(p, q));
            }
        }
        let meas = measure(&g, &m, 1.0, &OracleCaps::default());
        assert_eq!(meas.stretch, Some(1.0));
        assert_eq!(meas.hop_diameter, Some(1));
        let mst = prim_mst(&m, None).unwrap();
        let meas = measure(&mst, &m, 1.0, &OracleCaps::default());
        assert_eq!(meas.lightness, Some(1.0));
    }

    #[test]
    fn edge_list_round_trip() {
        let m = generate_points::<f64>(PointKind::Uniform, 30, 2, 9).unwrap();
        let t = prim_mst(&m, None).unwrap();
        let text = t.to_edge_list();
        let back = SpannerGraph::<f64>::parse_edge_list(30, &text).unwrap();
        assert_eq!(back.to_edge_list(), text);
        for e in back.edges() {
            assert_eq!(e.w, m.dist(e.u, e.v));
        }
    }

    #[test]
    fn caps_parse() {
        let c = OracleCaps::parse("apsp=100, minplus=50").unwrap();
        assert_eq!((c.apsp, c.minplus, c.greedy), (100, 50, OracleCaps::default().greedy));
        assert!(OracleCaps::parse("bogus=1").is_err());
    }
}
