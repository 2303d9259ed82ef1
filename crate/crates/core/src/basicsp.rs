//! Pluggable base-spanner back-ends.
//!
//! Every back-end can be asked for the full spanner of a sub-metric or for
//! only its edges of weight at most a threshold. The thresholded variants
//! return exactly the pruned full output:
//!
//! * greedy processes pairs in ascending distance, and each decision depends
//!   only on shorter edges, so the run restricted to short pairs agrees with
//!   the full run on those pairs;
//! * the Θ-graph search is limited to radius `τ / cos(θ/2)`, which always
//!   contains the true cone winner whenever that winner is within `τ`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BoundedDijkstra, OracleCaps, SpannerGraph};
use crate::metric::{MetricKind, MetricSpace, PointId};
use crate::scalar::{total_cmp, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasicSpKind {
    /// Path-greedy with stretch `t`.
    Greedy {
        t: f64,
    },
    /// Θ-graph with `k` cones (2-D Euclidean, `k ≥ 7`).
    Theta {
        k: usize,
    },
    Complete,
}

impl BasicSpKind {
    /// Parses `greedy`, `theta:K` or `complete`; `t` is the greedy stretch.
    pub fn parse(spec: &str, t: f64) -> Result<Self> {
        match spec.trim() {
            "greedy" => Ok(Self::Greedy { t }),
            "complete" => Ok(Self::Complete),
            s => {
                let k = s
                    .strip_prefix("theta:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidSpec(format!("unknown back-end {s:?}")))?;
                if k < 7 {
                    return Err(Error::InvalidSpec(format!("theta graph needs k >= 7, got {k}")));
                }
                Ok(Self::Theta { k })
            }
        }
    }

    /// The stretch the back-end guarantees.
    pub fn declared_stretch(&self) -> f64 {
        match *self {
            Self::Greedy { t } => t,
            Self::Theta { k } => 1.0 / (1.0 - 2.0 * (std::f64::consts::PI / k as f64).sin()),
            Self::Complete => 1.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Greedy { .. } => "greedy".into(),
            Self::Theta { k } => format!("theta:{k}"),
            Self::Complete => "complete".into(),
        }
    }

    /// Builds the spanner of `M[q]`, keeping only edges of weight `≤ threshold`
    /// when one is given. The graph has `m.n()` vertices; those outside `q`
    /// stay isolated.
    pub fn build<S: Scalar>(
        &self,
        m: &MetricSpace<S>,
        q: &[PointId],
        threshold: Option<S>,
        caps: &OracleCaps,
    ) -> Result<(SpannerGraph<S>, BasicStats)> {
        let start = Instant::now();
        let g = match *self {
            Self::Greedy { t } => greedy_spanner(m, q, S::lit(t), threshold, caps.greedy)?,
            Self::Theta { k } => theta_graph(m, q, k, threshold)?,
            Self::Complete => complete_graph(m, q, threshold),
        };
        let stats = BasicStats { sp_sz: g.edge_count(), delta: g.max_degree(), lambda: None, sp_tm: start.elapsed() };
        Ok((g, stats))
    }
}

/// Measured size, degree, hop diameter and time of one back-end call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BasicStats {
    pub sp_sz: usize,
    pub delta: usize,
    pub lambda: Option<usize>,
    #[serde(with = "duration_ms")]
    pub sp_tm: Duration,
}

mod duration_ms {
    pub fn serialize<Ser: serde::Serializer>(d: &std::time::Duration, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        s.serialize_f64(d.as_secs_f64() * 1e3)
    }
}

/// Pairs `(δ, p, q)` with `p < q`, both in `q`, and `δ ≤ threshold`.
fn candidate_pairs<S: Scalar>(m: &MetricSpace<S>, ids: &[PointId], threshold: Option<S>) -> Vec<(S, u32, u32)> {
    let within = |d: S| threshold.is_none_or(|t| d <= t);
    let mut out = Vec::new();
    match (m.kind(), threshold) {
        (MetricKind::Euclidean { .. }, Some(tau)) => {
            let mut sorted: Vec<PointId> = ids.to_vec();
            let x = |p: PointId| m.coords(p).expect("euclidean")[0];
            sorted.sort_by(|&a, &b| total_cmp(&x(a), &x(b)));
            for (i, &p) in sorted.iter().enumerate() {
                for &q in &sorted[i + 1..] {
                    if x(q) - x(p) > tau {
                        break;
                    }
                    let d = m.dist(p, q);
                    if within(d) {
                        out.push((d, p.min(q) as u32, p.max(q) as u32));
                    }
                }
            }
        }
        _ => {
            for (i, &p) in ids.iter().enumerate() {
                for &q in &ids[i + 1..] {
                    let d = m.dist(p, q);
                    if within(d) {
                        out.push((d, p.min(q) as u32, p.max(q) as u32));
                    }
                }
            }
        }
    }
    out
}

/// Path-greedy `t`-spanner: pairs in ascending `(δ, p, q)` order get an edge
/// unless the current graph already joins them within `t · δ`.
///
/// Graph distances only shrink as edges are added, so a table of previously
/// computed distances stays a valid upper bound; a search is run only when the
/// table cannot already certify a pair.
pub fn greedy_spanner<S: Scalar>(
    m: &MetricSpace<S>,
    q: &[PointId],
    t: S,
    threshold: Option<S>,
    cap: usize,
) -> Result<SpannerGraph<S>> {
    if q.len() > cap {
        return Err(Error::SizeLimitExceeded { what: "greedy spanner", n: q.len(), cap });
    }
    let mut pairs = candidate_pairs(m, q, threshold);
    pairs.sort_by(|a, b| total_cmp(&a.0, &b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let k = q.len();
    let mut local = vec![usize::MAX; m.n()];
    for (i, &p) in q.iter().enumerate() {
        local[p] = i;
    }
    let reach = pairs.last().map_or(S::zero(), |p| t * p.0);
    let mut known = vec![S::infinity(); k * k];
    let mut adj: Vec<Vec<(usize, S)>> = vec![Vec::new(); k];
    let mut search = BoundedDijkstra::new(k);
    let mut g = SpannerGraph::new(m.n());
    for (d, p, r) in pairs {
        let (a, b) = (local[p as usize], local[r as usize]);
        if known[a * k + b] <= t * d {
            continue;
        }
        for (v, dv) in search.ball_in(&adj, a, reach) {
            known[a * k + v] = dv;
            known[v * k + a] = dv;
        }
        if known[a * k + b] <= t * d {
            continue;
        }
        adj[a].push((b, d));
        adj[b].push((a, d));
        known[a * k + b] = d;
        known[b * k + a] = d;
        g.add_edge(p as usize, r as usize, d);
    }
    Ok(g)
}

/// Every pair of `q` within the threshold.
pub fn complete_graph<S: Scalar>(m: &MetricSpace<S>, q: &[PointId], threshold: Option<S>) -> SpannerGraph<S> {
    let mut g = SpannerGraph::new(m.n());
    for (d, p, r) in candidate_pairs(m, q, threshold) {
        g.add_edge(p as usize, r as usize, d);
    }
    g
}

/// Θ-graph: for each point and each of `k` equal cones around it, an edge to
/// the point of the cone whose projection on the cone bisector is smallest
/// (ties to the smaller id).
pub fn theta_graph<S: Scalar>(
    m: &MetricSpace<S>,
    q: &[PointId],
    k: usize,
    threshold: Option<S>,
) -> Result<SpannerGraph<S>> {
    if m.dim() != Some(2) {
        return Err(Error::UnsupportedMetric("theta graph requires 2-D Euclidean points".into()));
    }
    if k < 7 {
        return Err(Error::InvalidSpec(format!("theta graph needs k >= 7, got {k}")));
    }
    let pts: Vec<[f64; 2]> = q
        .iter()
        .map(|&p| {
            let c = m.coords(p).expect("euclidean");
            [c[0].as_f64(), c[1].as_f64()]
        })
        .collect();
    let tree = KdTree::new(&pts, q);
    let theta = std::f64::consts::TAU / k as f64;
    let radius = threshold.map_or(f64::INFINITY, |t| t.as_f64() / (theta / 2.0).cos() * (1.0 + 1e-12));
    let mut g = SpannerGraph::new(m.n());
    for (i, &p) in q.iter().enumerate() {
        for c in 0..k {
            let cone = Cone::new(pts[i], c, theta);
            if let Some(j) = tree.cone_nearest(&pts, q, i, &cone, radius) {
                let d = m.dist(p, q[j]);
                if threshold.is_none_or(|t| d <= t) {
                    g.add_edge(p, q[j], d);
                }
            }
        }
    }
    Ok(g)
}

struct Cone {
    apex: [f64; 2],
    index: usize,
    theta: f64,
    axis: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    cos_half: f64,
}

impl Cone {
    fn new(apex: [f64; 2], index: usize, theta: f64) -> Self {
        let a0 = index as f64 * theta;
        let mid = a0 + theta / 2.0;
        let a1 = a0 + theta;
        Self {
            apex,
            index,
            theta,
            axis: [mid.cos(), mid.sin()],
            lo: [a0.cos(), a0.sin()],
            hi: [a1.cos(), a1.sin()],
            cos_half: (theta / 2.0).cos(),
        }
    }

    fn rel(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0] - self.apex[0], x[1] - self.apex[1]]
    }

    /// Cone membership by angle, so each direction belongs to exactly one cone.
    fn contains(&self, x: [f64; 2]) -> bool {
        let r = self.rel(x);
        let mut ang = r[1].atan2(r[0]);
        if ang < 0.0 {
            ang += std::f64::consts::TAU;
        }
        let k = (std::f64::consts::TAU / self.theta).round() as usize;
        ((ang / self.theta) as usize).min(k - 1) == self.index
    }

    fn projection(&self, x: [f64; 2]) -> f64 {
        let r = self.rel(x);
        r[0] * self.axis[0] + r[1] * self.axis[1]
    }

    /// True when the box certainly misses the cone.
    fn misses(&self, bmin: [f64; 2], bmax: [f64; 2]) -> bool {
        let corners = [[bmin[0], bmin[1]], [bmin[0], bmax[1]], [bmax[0], bmin[1]], [bmax[0], bmax[1]]];
        let cross = |d: [f64; 2], c: [f64; 2]| {
            let r = self.rel(c);
            d[0] * r[1] - d[1] * r[0]
        };
        let eps = 1e-12;
        corners.iter().all(|&c| cross(self.lo, c) < -eps) || corners.iter().all(|&c| cross(self.hi, c) > eps)
    }

    /// Lower bound on the projection of any cone point inside the box.
    fn box_bound(&self, bmin: [f64; 2], bmax: [f64; 2]) -> (f64, f64) {
        let mut proj = 0.0;
        for a in 0..2 {
            let lo = (bmin[a] - self.apex[a]) * self.axis[a];
            let hi = (bmax[a] - self.apex[a]) * self.axis[a];
            proj += lo.min(hi);
        }
        let mut d2 = 0.0;
        for a in 0..2 {
            let gap = (bmin[a] - self.apex[a]).max(0.0).max(self.apex[a] - bmax[a]);
            d2 += gap * gap;
        }
        let dist = d2.sqrt();
        (proj.max(dist * self.cos_half), dist)
    }
}

const LEAF_SIZE: usize = 8;

struct KdNode {
    bmin: [f64; 2],
    bmax: [f64; 2],
    /// Range into `KdTree::idx` for leaves; children for inner nodes.
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

struct KdTree {
    nodes: Vec<KdNode>,
    idx: Vec<usize>,
}

impl KdTree {
    fn new(pts: &[[f64; 2]], ids: &[PointId]) -> Self {
        let mut tree = Self { nodes: Vec::new(), idx: (0..pts.len()).collect() };
        if !pts.is_empty() {
            tree.build(pts, ids, 0, pts.len());
        }
        tree
    }

    fn build(&mut self, pts: &[[f64; 2]], ids: &[PointId], start: usize, end: usize) -> usize {
        let mut bmin = [f64::INFINITY; 2];
        let mut bmax = [f64::NEG_INFINITY; 2];
        for &i in &self.idx[start..end] {
            for a in 0..2 {
                bmin[a] = bmin[a].min(pts[i][a]);
                bmax[a] = bmax[a].max(pts[i][a]);
            }
        }
        let me = self.nodes.len();
        self.nodes.push(KdNode { bmin, bmax, start, end, children: None });
        if end - start > LEAF_SIZE {
            let axis = usize::from(bmax[1] - bmin[1] > bmax[0] - bmin[0]);
            let mid = (start + end) / 2;
            self.idx[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                pts[a][axis].total_cmp(&pts[b][axis]).then(ids[a].cmp(&ids[b]))
            });
            let l = self.build(pts, ids, start, mid);
            let r = self.build(pts, ids, mid, end);
            self.nodes[me].children = Some((l, r));
        }
        me
    }

    fn cone_nearest(&self, pts: &[[f64; 2]], ids: &[PointId], apex: usize, cone: &Cone, radius: f64) -> Option<usize> {
        let mut best: Option<(f64, PointId, usize)> = None;
        if self.nodes.is_empty() {
            return None;
        }
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            let (bound, dist) = cone.box_bound(node.bmin, node.bmax);
            if dist > radius || cone.misses(node.bmin, node.bmax) {
                continue;
            }
            if let Some((bp, _, _)) = best {
                if bound > bp {
                    continue;
                }
            }
            match node.children {
                Some((l, r)) => {
                    let bl = cone.box_bound(self.nodes[l].bmin, self.nodes[l].bmax).0;
                    let br = cone.box_bound(self.nodes[r].bmin, self.nodes[r].bmax).0;
                    if bl <= br {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    for &j in &self.idx[node.start..node.end] {
                        if j == apex || !cone.contains(pts[j]) {
                            continue;
                        }
                        let r = cone.rel(pts[j]);
                        if (r[0] * r[0] + r[1] * r[1]).sqrt() > radius {
                            continue;
                        }
                        let pj = cone.projection(pts[j]);
                        let better = match best {
                            None => true,
                            Some((bp, bid, _)) => pj < bp || (pj == bp && ids[j] < bid),
                        };
                        if better {
                            best = Some((pj, ids[j], j));
                        }
                    }
                }
            }
        }
        best.map(|(_, _, j)| j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::stretch;
    use crate::metric::{generate_points, PointKind};

    fn all(n: usize) -> Vec<PointId> {
        (0..n).collect()
    }

    #[test]
    fn parse_back_ends() {
        assert_eq!(BasicSpKind::parse("greedy", 1.5).unwrap(), BasicSpKind::Greedy { t: 1.5 });
        assert_eq!(BasicSpKind::parse("theta:12", 1.0).unwrap(), BasicSpKind::Theta { k: 12 });
        assert!(BasicSpKind::parse("theta:5", 1.0).is_err());
        assert!(BasicSpKind::parse("wspd", 1.0).is_err());
    }

    #[test]
    fn singleton_and_complete() {
        let m = generate_points::<f64>(PointKind::Uniform, 5, 2, 1).unwrap();
        let caps = OracleCaps::default();
        for kind in [BasicSpKind::Greedy { t: 1.5 }, BasicSpKind::Theta { k: 8 }, BasicSpKind::Complete] {
            let (g, s) = kind.build(&m, &[3], None, &caps).unwrap();
            assert_eq!((g.edge_count(), s.sp_sz), (0, 0));
        }
        let (g, s) = BasicSpKind::Complete.build(&m, &all(5), None, &caps).unwrap();
        assert_eq!(s.sp_sz, 10);
        assert_eq!(stretch(&g, &all(5), |p, q| m.dist(p, q), 512).unwrap(), 1.0);
    }

    #[test]
    fn greedy_hand_run() {
        let m = generate_points::<f64>(PointKind::Line, 3, 1, 0).unwrap();
        let g = greedy_spanner(&m, &all(3), 2.0, None, 100).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2));
    }

    #[test]
    fn theta_two_points_and_bad_metric() {
        let m = generate_points::<f64>(PointKind::Uniform, 2, 2, 4).unwrap();
        assert_eq!(theta_graph(&m, &all(2), 9, None).unwrap().edge_count(), 1);
        let m3 = generate_points::<f64>(PointKind::Uniform, 4, 3, 4).unwrap();
        assert!(matches!(theta_graph(&m3, &all(4), 9, None), Err(Error::UnsupportedMetric(_))));
    }

    /// Θ-graph via an exhaustive scan, for comparison with the kd-tree search.
    fn theta_brute(m: &MetricSpace<f64>, k: usize) -> SpannerGraph<f64> {
        let theta = std::f64::consts::TAU / k as f64;
        let mut g = SpannerGraph::new(m.n());
        for p in 0..m.n() {
            let a = m.coords(p).unwrap();
            for c in 0..k {
                let cone = Cone::new([a[0], a[1]], c, theta);
                let mut best: Option<(f64, usize)> = None;
                for q in 0..m.n() {
                    let b = m.coords(q).unwrap();
                    if q == p || !cone.contains([b[0], b[1]]) {
                        continue;
                    }
                    let pr = cone.projection([b[0], b[1]]);
                    if best.is_none_or(|(bp, bq)| pr < bp || (pr == bp && q < bq)) {
                        best = Some((pr, q));
                    }
                }
                if let Some((_, q)) = best {
                    g.add_edge(p, q, m.dist(p, q));
                }
            }
        }
        g
    }

    #[test]
    fn theta_matches_brute_force_and_prunes_exactly() {
        for seed in 0..4 {
            let m = generate_points::<f64>(PointKind::Clustered { k: 4 }, 300, 2, seed).unwrap();
            let fast = theta_graph(&m, &all(300), 10, None).unwrap();
            let slow = theta_brute(&m, 10);
            assert_eq!(fast.to_edge_list(), slow.to_edge_list());
            let tau = 0.05;
            let pruned = theta_graph(&m, &all(300), 10, Some(tau)).unwrap();
            let mut expect = SpannerGraph::new(300);
            for e in slow.edges().iter().filter(|e| e.w <= tau) {
                expect.add_edge(e.u, e.v, e.w);
            }
            assert_eq!(pruned.to_edge_list(), expect.to_edge_list());
        }
    }

    #[test]
    fn greedy_threshold_equals_pruned_full_run() {
        let m = generate_points::<f64>(PointKind::Uniform, 200, 2, 5).unwrap();
        let full = greedy_spanner(&m, &all(200), 1.2, None, 4096).unwrap();
        let tau = 0.12;
        let pruned = greedy_spanner(&m, &all(200), 1.2, Some(tau), 4096).unwrap();
        let mut expect = SpannerGraph::new(200);
        for e in full.edges().iter().filter(|e| e.w <= tau) {
            expect.add_edge(e.u, e.v, e.w);
        }
        assert_eq!(pruned.to_edge_list(), expect.to_edge_list());
    }

    #[test]
    fn greedy_size_cap() {
        let m = generate_points::<f64>(PointKind::Uniform, 20, 2, 5).unwrap();
        assert!(matches!(greedy_spanner(&m, &all(20), 1.5, None, 10), Err(Error::SizeLimitExceeded { .. })));
    }
}
