//! An exact 1-spanner for the path metric δ_L.
//!
//! The path positions are split recursively into ρ-ary segments. A segment
//! owns `ρ + 1` separator points (its first point, its last point and `ρ − 1`
//! evenly spaced interior points); the stretches between consecutive
//! separators are its parts, which are split again. Every point is a
//! separator of exactly one segment. Edges:
//!
//! * consecutive separators of a segment are joined;
//! * every separator of a part is joined to both separators bounding that part.
//!
//! Travelling from `p` to `q` (`p ≺_L q`) climbs from `p` to the right
//! boundary of each enclosing part (one hop per level), walks at most ρ
//! separators of the lowest segment separating `p` from `q`, and descends
//! symmetrically. Every step moves right along the path, so each such path has
//! weight exactly δ_L(p, q), at most `2·depth + ρ` hops, and every point has
//! degree at most `2ρ + 6`.

use crate::error::Result;
use crate::graph::{hop_diameter, HamiltonianPath, SpannerGraph};
use crate::metric::MetricSpace;
use crate::scalar::Scalar;

/// One segment of the recursive decomposition, as a half-open rank range.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub lo: usize,
    pub hi: usize,
    pub depth: usize,
    /// Ranks of this segment's separators, ascending.
    pub separators: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct PathSpanner<S> {
    /// Edges weighted by δ_L.
    pub graph: SpannerGraph<S>,
    pub segments: Vec<Segment>,
    pub rho: usize,
}

type Bounds = Option<(usize, usize)>;

/// Builds the path spanner over `path` with branching factor `rho ≥ 2`.
pub fn build_path_spanner<S: Scalar>(path: &HamiltonianPath<S>, rho: usize) -> PathSpanner<S> {
    assert!(rho >= 2, "rho must be at least 2");
    let n = path.len();
    let order = path.order();
    let prefix = path.prefix();
    let mut graph = SpannerGraph::new(order.iter().copied().max().map_or(0, |m| m + 1));
    let mut segments = Vec::new();
    let link = |graph: &mut SpannerGraph<S>, a: usize, b: usize| {
        if a != b {
            graph.add_edge(order[a], order[b], (prefix[a] - prefix[b]).abs());
        }
    };
    // (lo, hi, depth, bounds): bounds are the separators enclosing the segment.
    let mut stack: Vec<(usize, usize, usize, Bounds)> = Vec::new();
    if n > 0 {
        stack.push((0, n, 0, None));
    }
    while let Some((lo, hi, depth, bounds)) = stack.pop() {
        let seps = separators(lo, hi, rho);
        for w in seps.windows(2) {
            link(&mut graph, w[0], w[1]);
        }
        if let Some((left, right)) = bounds {
            for &s in &seps {
                link(&mut graph, s, left);
                link(&mut graph, s, right);
            }
        }
        for w in seps.windows(2) {
            if w[1] > w[0] + 1 {
                stack.push((w[0] + 1, w[1], depth + 1, Some((w[0], w[1]))));
            }
        }
        segments.push(Segment { lo, hi, depth, separators: seps });
    }
    segments.sort_by_key(|s| (s.depth, s.lo));
    PathSpanner { graph, segments, rho }
}

/// Separator ranks of `[lo, hi)`: both ends plus `rho − 1` interior points
/// that cut the remainder into `rho` parts of near-equal size. Segments too
/// small to split consist of separators only.
fn separators(lo: usize, hi: usize, rho: usize) -> Vec<usize> {
    let m = hi - lo;
    if m <= rho + 1 {
        return (lo..hi).collect();
    }
    let in_parts = m - 2 - (rho - 1);
    let (base, extra) = (in_parts / rho, in_parts % rho);
    let mut seps = vec![lo];
    let mut at = lo;
    for i in 0..rho - 1 {
        at += base + usize::from(i < extra) + 1;
        seps.push(at);
    }
    seps.push(hi - 1);
    seps
}

/// Same edge set with each weight replaced by the metric distance.
pub fn reweight_to_metric<S: Scalar>(ps: &PathSpanner<S>, m: &MetricSpace<S>) -> SpannerGraph<S> {
    let mut g = SpannerGraph::new(m.n());
    for e in ps.graph.edges() {
        g.add_edge(e.u, e.v, m.dist(e.u, e.v));
    }
    g
}

/// Measured hop diameter at stretch 1 over δ_L.
pub fn hop_budget<S: Scalar>(ps: &PathSpanner<S>, path: &HamiltonianPath<S>, cap: usize) -> Result<usize> {
    let vertices = path.order().to_vec();
    let h = hop_diameter(&ps.graph, &vertices, |p, q| path.delta_l(p, q), S::one(), cap)?;
    Ok(h.expect("path spanner is connected and exact"))
}

/// Upper bound on the hop diameter that the construction guarantees.
pub fn hop_guarantee(n: usize, rho: usize) -> usize {
    let depth = log_ceil(n.max(1), rho);
    2 * (depth + 1) + rho
}

/// ⌈log_ρ n⌉ in exact integer arithmetic.
pub fn log_ceil(n: usize, rho: usize) -> usize {
    let mut k = 0;
    let mut p: usize = 1;
    while p < n {
        p = p.saturating_mul(rho);
        k += 1;
    }
    k
}
