//! Independent re-checks of a finished run.
//!
//! Every check reads only the bundle (and the metric) and recomputes what it
//! asserts from first principles, so a corrupted bundle is caught no matter
//! how it was produced. Structural checks hold in every mode and are always
//! hard; quantitative checks are hard in strict mode and informational in
//! exploratory mode.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attach::check_star_forest;
use crate::graph::{hop_diameter, stretch, BoundedDijkstra, OracleCaps, SpannerGraph};
use crate::hierarchy::Bag;
use crate::lightsp::SpannerBundle;
use crate::metric::{MetricSpace, PointId};
use crate::scalar::{le_rel, Scalar};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Any,
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub tag: Tag,
    pub status: Status,
    /// Whether a failure counts against the run.
    pub hard: bool,
    pub measured: Option<f64>,
    pub bound: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: Option<String>,
}

impl CheckResult {
    fn new(name: &'static str, tag: Tag) -> Self {
        Self { name, tag, status: Status::Pass, hard: true, measured: None, bound: None, tolerance: None, detail: None }
    }

    fn fail(mut self, witness: impl Into<String>) -> Self {
        self.status = Status::Fail;
        self.detail = Some(witness.into());
        self
    }

    fn skip(mut self, why: impl Into<String>) -> Self {
        self.status = Status::Skipped;
        self.detail = Some(why.into());
        self
    }

    fn with_witness(self, w: Option<String>) -> Self {
        match w {
            Some(w) => self.fail(w),
            None => self,
        }
    }

    fn value(mut self, measured: f64, bound: f64) -> Self {
        self.measured = Some(measured);
        self.bound = Some(bound);
        self
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Calibration constants and oracle limits for one suite run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub caps: OracleCaps,
    pub seed: u64,
    pub degree_c: f64,
    pub hop_c: f64,
    /// Bag-level lemma checks visit every bag up to this many points.
    pub full_sample_n: usize,
    pub sample_frac: f64,
    pub rel_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            caps: OracleCaps::default(),
            seed: 0,
            degree_c: 6.0,
            hop_c: 12.0,
            full_sample_n: 512,
            sample_frac: 0.05,
            rel_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub mode: String,
    pub options: VerifyOptions,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        !self.checks.iter().any(|c| c.hard && c.failed())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.hard && c.failed())
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ =
            writeln!(out, "{:<26} {:<6} {:<8} {:>14} {:>14}  detail", "check", "tag", "status", "measured", "bound");
        for c in &self.checks {
            let status = match (c.status, c.hard) {
                (Status::Pass, _) => "pass",
                (Status::Fail, true) => "FAIL",
                (Status::Fail, false) => "over",
                (Status::Skipped, _) => "skipped",
            };
            let num = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
            let tag = match c.tag {
                Tag::Any => "any",
                Tag::Strict => "strict",
            };
            let _ = writeln!(
                out,
                "{:<26} {:<6} {:<8} {:>14} {:>14}  {}",
                c.name,
                tag,
                status,
                num(c.measured),
                num(c.bound),
                c.detail.as_deref().unwrap_or("")
            );
        }
        out
    }
}

/// Names of the structural checks, in report order.
pub const ANY_CHECKS: &[&str] = &[
    "q_partition",
    "n_partition",
    "set_containment",
    "empty_iff_base_empty",
    "rep_in_kernel",
    "kernel_lemma",
    "labels_exclusive",
    "disappearing_zombie",
    "zombie_children",
    "adopter_keeps_survivor",
    "zombie_chain_identity",
    "base_path_lemma",
    "base_degree",
    "base_weight",
    "level_max_weight",
    "level_degree",
    "edge_weights",
    "component_union",
    "level_reps",
    "attach_records",
    "counters_reps_only",
    "lightness",
];

/// Names of the quantitative checks, in report order.
pub const STRICT_CHECKS: &[&str] = &[
    "ctr_large",
    "ctr_single",
    "ctr_plain",
    "ctr_load",
    "lemma_key",
    "bag_diameter",
    "stretch",
    "degree",
    "hop_diameter",
];

/// Runs every check.
pub fn verify_all<S: Scalar>(b: &SpannerBundle<S>, m: &MetricSpace<S>, opts: &VerifyOptions) -> VerificationReport {
    let checks =
        ANY_CHECKS.iter().chain(STRICT_CHECKS).map(|name| run_check(name, b, m, opts).expect("known check")).collect();
    VerificationReport { mode: b.config.mode.label(), options: opts.clone(), checks }
}

/// Runs one check by name; `None` for an unknown name.
pub fn run_check<S: Scalar>(
    name: &str,
    b: &SpannerBundle<S>,
    m: &MetricSpace<S>,
    opts: &VerifyOptions,
) -> Option<CheckResult> {
    let r = match name {
        "q_partition" => q_partition(b),
        "n_partition" => n_partition(b),
        "set_containment" => set_containment(b),
        "empty_iff_base_empty" => empty_iff_base_empty(b),
        "rep_in_kernel" => rep_in_kernel(b),
        "kernel_lemma" => kernel_lemma(b),
        "labels_exclusive" => labels_exclusive(b),
        "disappearing_zombie" => disappearing_zombie(b),
        "zombie_children" => zombie_children(b),
        "adopter_keeps_survivor" => adopter_keeps_survivor(b),
        "zombie_chain_identity" => zombie_chain_identity(b),
        "base_path_lemma" => base_path_lemma(b),
        "base_degree" => base_degree(b),
        "base_weight" => base_weight(b, m, opts),
        "level_max_weight" => level_max_weight(b, opts),
        "level_degree" => level_degree(b),
        "edge_weights" => edge_weights(b, m),
        "component_union" => component_union(b),
        "level_reps" => level_reps(b),
        "attach_records" => attach_records(b),
        "counters_reps_only" => counters_reps_only(b),
        "ctr_large" => counter_bound(b, "ctr_large", |c, p| c.large[p], 1),
        "ctr_single" => counter_bound(b, "ctr_single", |c, p| c.single[p], b.params.counter_cap() as u32),
        "ctr_plain" => counter_bound(b, "ctr_plain", |c, p| c.plain[p], b.params.counter_cap() as u32),
        "ctr_load" => counter_bound(b, "ctr_load", |c, p| c.load(p), 2 * b.params.counter_cap() as u32 + 1),
        "lemma_key" => lemma_key(b, opts),
        "bag_diameter" => bag_diameter(b, opts),
        "stretch" => check_stretch(b, m, opts),
        "degree" => check_degree(b, opts),
        "hop_diameter" => check_hop_diameter(b, m, opts),
        "lightness" => check_lightness(b),
        _ => return None,
    };
    Some(if r.tag == Tag::Strict && !b.config.mode.is_strict() { CheckResult { hard: false, ..r } } else { r })
}

fn bags<S: Scalar>(b: &SpannerBundle<S>) -> impl Iterator<Item = (usize, usize, &Bag)> {
    b.forest
        .levels
        .iter()
        .enumerate()
        .flat_map(|(li, lvl)| lvl.iter().enumerate().map(move |(i, bag)| (li + 1, i, bag)))
}

fn first_witness<S: Scalar>(b: &SpannerBundle<S>, f: impl Fn(usize, usize, &Bag) -> Option<String>) -> Option<String> {
    bags(b).find_map(|(j, i, bag)| f(j, i, bag).map(|w| format!("level {j} bag {i}: {w}")))
}

fn q_partition<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let n = b.n();
    let mut w = None;
    'levels: for (li, lvl) in b.forest.levels.iter().enumerate() {
        let mut owner = vec![usize::MAX; n];
        for (i, bag) in lvl.iter().enumerate() {
            for &p in &bag.points {
                if p >= n {
                    w = Some(format!("level {} bag {i}: point {p} out of range", li + 1));
                    break 'levels;
                }
                if owner[p] != usize::MAX {
                    w = Some(format!("level {}: point {p} in bags {} and {i}", li + 1, owner[p]));
                    break 'levels;
                }
                owner[p] = i;
            }
        }
        if let Some(p) = owner.iter().position(|&o| o == usize::MAX) {
            w = Some(format!("level {}: point {p} in no bag", li + 1));
            break;
        }
    }
    CheckResult::new("q_partition", Tag::Any).with_witness(w)
}

fn n_partition<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let n = b.n();
    let mut w = None;
    for (li, lvl) in b.forest.levels.iter().enumerate() {
        let j = li + 1;
        let mut at = 0;
        for (i, bag) in lvl.iter().enumerate() {
            if bag.native.0 != at || bag.native.1 < bag.native.0 {
                w = w.or(Some(format!("level {j} bag {i}: native range {:?} does not continue at {at}", bag.native)));
            }
            at = bag.native.1;
            if j > 1 {
                let (c0, c1) = bag.children;
                let lower = b.forest.level(j - 1);
                if c0 >= c1
                    || c1 > lower.len()
                    || lower[c0].native.0 != bag.native.0
                    || lower[c1 - 1].native.1 != bag.native.1
                {
                    w = w.or(Some(format!("level {j} bag {i}: native range is not the union of its children")));
                }
            }
        }
        if at != n {
            w = w.or(Some(format!("level {j}: native ranges cover {at} of {n} points")));
        }
    }
    CheckResult::new("n_partition", Tag::Any).with_witness(w)
}

fn subset(a: &[PointId], b: &HashSet<PointId>) -> Option<PointId> {
    a.iter().copied().find(|p| !b.contains(p))
}

fn set_containment<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let rank = &b.forest.rank;
    let w = first_witness(b, |_, _, bag| {
        if let Some(p) = bag.base.iter().find(|&&p| !(bag.native.0..bag.native.1).contains(&rank[p])) {
            return Some(format!("base point {p} outside N"));
        }
        let k: HashSet<PointId> = bag.kernel.iter().copied().collect();
        let q: HashSet<PointId> = bag.points.iter().copied().collect();
        if let Some(p) = subset(&bag.base, &k) {
            return Some(format!("base point {p} not in K"));
        }
        subset(&bag.kernel, &q).map(|p| format!("kernel point {p} not in Q"))
    });
    CheckResult::new("set_containment", Tag::Any).with_witness(w)
}

fn empty_iff_base_empty<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let w = first_witness(b, |_, _, bag| {
        (bag.points.is_empty() != bag.base.is_empty())
            .then(|| format!("|Q| = {}, |B| = {}", bag.points.len(), bag.base.len()))
    });
    CheckResult::new("empty_iff_base_empty", Tag::Any).with_witness(w)
}

fn rep_in_kernel<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let w = first_witness(b, |_, _, bag| match (bag.is_empty(), bag.rep) {
        (true, Some(r)) => Some(format!("empty bag has representative {r}")),
        (false, None) => Some("non-empty bag has no representative".into()),
        (false, Some(r)) if !bag.kernel.contains(&r) => Some(format!("representative {r} not in K")),
        _ => None,
    });
    CheckResult::new("rep_in_kernel", Tag::Any).with_witness(w)
}

fn kernel_lemma<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let ell = b.params.ell;
    let w = first_witness(b, |_, _, bag| {
        if bag.points.len() < ell {
            let mut k = bag.kernel.clone();
            let mut q = bag.points.clone();
            k.sort_unstable();
            q.sort_unstable();
            (k != q).then(|| format!("small bag with |K| = {} != |Q| = {}", k.len(), q.len()))
        } else {
            (bag.kernel.len() < ell).then(|| format!("large bag with |K| = {} < ℓ = {ell}", bag.kernel.len()))
        }
    });
    CheckResult::new("kernel_lemma", Tag::Any).with_witness(w)
}

fn labels_exclusive<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let w = first_witness(b, |_, _, bag| (bag.zombie && bag.incubator).then(|| "both zombie and incubator".into()));
    CheckResult::new("labels_exclusive", Tag::Any).with_witness(w)
}

fn disappearing_zombie<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let f = &b.forest;
    let w = first_witness(b, |j, i, bag| {
        if !bag.disappearing {
            return None;
        }
        if !bag.zombie {
            return Some("disappearing bag is not a zombie".into());
        }
        let Some(sp) = bag.step_parent else {
            return (j < f.ell()).then(|| "disappearing zombie never joined".into());
        };
        if Some(sp) == bag.parent {
            return Some(format!("step-parent {sp} equals F-parent"));
        }
        let parent = f.bag(j + 1, bag.parent?);
        if !parent.is_empty() {
            return Some(format!("F-parent {} is not empty", bag.parent?));
        }
        (!f.bag(j + 1, sp).step_children.contains(&i)).then(|| format!("step-parent {sp} does not list it"))
    });
    CheckResult::new("disappearing_zombie", Tag::Any).with_witness(w)
}

fn zombie_children<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let f = &b.forest;
    let w = first_witness(b, |j, _, bag| {
        if j == 1 {
            return None;
        }
        let (c0, c1) = bag.children;
        let lower = f.level(j - 1);
        let z = (c0..c1).find(|&c| lower[c].zombie && !lower[c].is_empty())?;
        if let Some(o) = (c0..c1).find(|&c| c != z && !lower[c].is_empty()) {
            return Some(format!("zombie child {z} has non-empty sibling {o}"));
        }
        (!bag.step_children.is_empty()).then(|| format!("zombie child {z} but step-children {:?}", bag.step_children))
    });
    CheckResult::new("zombie_children", Tag::Any).with_witness(w)
}

fn adopter_keeps_survivor<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let w = first_witness(b, |_, _, bag| {
        (!bag.step_children.is_empty() && bag.surviving.is_empty()).then(|| "J(v) non-empty but S(v) empty".into())
    });
    CheckResult::new("adopter_keeps_survivor", Tag::Any).with_witness(w)
}

fn sorted(v: &[PointId]) -> Vec<PointId> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

fn zombie_chain_identity<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let f = &b.forest;
    let gamma = b.params.gamma;
    let w = first_witness(b, |j, i, bag| {
        if !bag.disappearing {
            return None;
        }
        let q = sorted(&bag.points);
        let (mut lj, mut li) = (j, i);
        for _ in 1..gamma {
            if lj == 1 {
                return Some("zombie chain shorter than γ".into());
            }
            let (c0, c1) = f.bag(lj, li).children;
            let nonempty: Vec<usize> = (c0..c1).filter(|&c| !f.bag(lj - 1, c).is_empty()).collect();
            let [only] = nonempty[..] else {
                return Some(format!("chain bag at level {lj} has {} non-empty children", nonempty.len()));
            };
            lj -= 1;
            li = only;
            if sorted(&f.bag(lj, li).points) != q {
                return Some(format!("Q differs at level {lj} bag {li}"));
            }
        }
        None
    });
    let chains = bags(b).filter(|(_, _, bag)| bag.disappearing).count();
    let mut r = CheckResult::new("zombie_chain_identity", Tag::Any).with_witness(w);
    r.measured = Some(chains as f64);
    r
}

/// Recomputes each bag's recursive base edge set from the per-level edge
/// lists and compares it with the consecutive pairs of its base set.
fn base_path_lemma<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let f = &b.forest;
    let n = b.n();
    let mut prev: Vec<Vec<(PointId, PointId)>> = Vec::new();
    for j in 1..=f.ell() {
        let lvl = f.level(j);
        let mut owner = vec![usize::MAX; n];
        for (i, bag) in lvl.iter().enumerate() {
            for &p in &bag.points {
                owner[p] = i;
            }
        }
        let mut rec: Vec<Vec<(PointId, PointId)>> = vec![Vec::new(); lvl.len()];
        for &(u, v) in &f.base_levels[j - 1] {
            let (bu, bv) = (owner[u], owner[v]);
            if bu != bv || bu == usize::MAX {
                let w = format!("level {j} base edge ({u}, {v}) spans bags {bu} and {bv}");
                return CheckResult::new("base_path_lemma", Tag::Any).fail(w);
            }
            rec[bu].push((u, v));
        }
        if j > 1 {
            for (i, bag) in lvl.iter().enumerate() {
                for &c in &bag.surviving {
                    rec[i].extend(prev[c].iter().copied());
                }
            }
        }
        for (i, bag) in lvl.iter().enumerate() {
            let mut got: Vec<(PointId, PointId)> = rec[i].iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
            let mut want: Vec<(PointId, PointId)> =
                bag.base.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
            got.sort_unstable();
            want.sort_unstable();
            if got != want {
                let w = format!(
                    "level {j} bag {i}: recursive base edges ({}) differ from the base path ({})",
                    got.len(),
                    want.len()
                );
                return CheckResult::new("base_path_lemma", Tag::Any).fail(w);
            }
        }
        prev = rec;
    }
    CheckResult::new("base_path_lemma", Tag::Any)
}

fn base_degree<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let n = b.n();
    let rank = &b.forest.rank;
    let (mut left, mut right) = (vec![0u32; n], vec![0u32; n]);
    let mut seen = HashSet::new();
    for &(u, v) in b.forest.base_levels.iter().flatten() {
        if !seen.insert((u.min(v), u.max(v))) {
            continue;
        }
        let (l, r) = if rank[u] < rank[v] { (u, v) } else { (v, u) };
        right[l] += 1;
        left[r] += 1;
    }
    let r = CheckResult::new("base_degree", Tag::Any);
    let count = seen.len();
    let w = (0..n)
        .find(|&p| left[p] > 1 || right[p] > 1)
        .map(|p| format!("point {p} has {} left and {} right base neighbours", left[p], right[p]))
        .or_else(|| (count > n).then(|| format!("|B| = {count} > n = {n}")));
    let mut r = r.with_witness(w);
    r.measured = Some(count as f64);
    r.bound = Some(n as f64);
    r
}

fn base_weight<S: Scalar>(b: &SpannerBundle<S>, m: &MetricSpace<S>, opts: &VerifyOptions) -> CheckResult {
    let big_l = b.path.total();
    let mut worst = S::zero();
    let mut total = S::zero();
    let mut w = None;
    for (li, lvl) in b.forest.base_levels.iter().enumerate() {
        let wj = lvl.iter().fold(S::zero(), |acc, &(u, v)| acc + m.dist(u, v));
        worst = worst.max(wj);
        total = total + wj;
        if !le_rel(wj, big_l, opts.rel_tol) && w.is_none() {
            w = Some(format!("ω(B_{}) = {wj} > L = {big_l}", li + 1));
        }
    }
    let ell = S::lit(b.params.ell as f64);
    if w.is_none() && !le_rel(total, ell * big_l, opts.rel_tol) {
        w = Some(format!("Σ ω(B_j) = {total} > ℓ·L"));
    }
    let mut r = CheckResult::new("base_weight", Tag::Any).with_witness(w).value(worst.as_f64(), big_l.as_f64());
    r.tolerance = Some(opts.rel_tol);
    r
}

fn level_max_weight<S: Scalar>(b: &SpannerBundle<S>, opts: &VerifyOptions) -> CheckResult {
    let mut w = None;
    let mut worst = 0.0f64;
    for (j, g) in b.levels.iter().enumerate() {
        let tau = b.params.tau(j);
        let mw = g.max_edge_weight();
        if tau > S::zero() {
            worst = worst.max((mw / tau).as_f64());
        }
        if !le_rel(mw, tau, opts.rel_tol) && w.is_none() {
            w = Some(format!("level {j}: max edge weight {mw} > τ = {tau}"));
        }
    }
    let mut r = CheckResult::new("level_max_weight", Tag::Any).with_witness(w).value(worst, 1.0);
    r.tolerance = Some(opts.rel_tol);
    r
}

fn level_degree<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let mut w = None;
    for (j, g) in b.levels.iter().enumerate() {
        let Some(t) = b.trace.get(j) else {
            w = Some(format!("level {j} has no trace"));
            break;
        };
        let per = t.basic.delta.max(t.basic_hat.map_or(0, |h| h.delta));
        if g.max_degree() > 2 * per {
            w = Some(format!("level {j}: Δ(G̃_j) = {} > 2·{per}", g.max_degree()));
            break;
        }
    }
    CheckResult::new("level_degree", Tag::Any).with_witness(w)
}

fn edge_weights<S: Scalar>(b: &SpannerBundle<S>, m: &MetricSpace<S>) -> CheckResult {
    let w = b
        .graph
        .edges()
        .iter()
        .find(|e| e.w != m.dist(e.u, e.v))
        .map(|e| format!("edge ({}, {}) has weight {} but δ = {}", e.u, e.v, e.w, m.dist(e.u, e.v)));
    CheckResult::new("edge_weights", Tag::Any).with_witness(w)
}

fn component_union<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let key = |u: PointId, v: PointId| (u.min(v), u.max(v));
    let mut parts: HashSet<(PointId, PointId)> = HashSet::new();
    for g in std::iter::once(&b.h).chain(std::iter::once(&b.base)).chain(&b.levels) {
        parts.extend(g.edges().iter().map(|e| key(e.u, e.v)));
    }
    let whole: HashSet<(PointId, PointId)> = b.graph.edges().iter().map(|e| key(e.u, e.v)).collect();
    let bound = b.h.edge_count() + b.n() + b.levels.iter().map(SpannerGraph::edge_count).sum::<usize>();
    let w = whole
        .difference(&parts)
        .next()
        .map(|e| format!("edge {e:?} is in no component"))
        .or_else(|| parts.difference(&whole).next().map(|e| format!("component edge {e:?} missing from the output")))
        .or_else(|| (whole.len() > bound).then(|| format!("|Ẽ| = {} exceeds the union bound {bound}", whole.len())));
    CheckResult::new("component_union", Tag::Any).with_witness(w).value(whole.len() as f64, bound as f64)
}

fn level_reps<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let n = b.n();
    let mut w = None;
    for j in 1..b.reps.len() {
        let mut want: Vec<PointId> = b.forest.level(j).iter().filter_map(|bag| bag.rep).collect();
        let mut got = b.reps[j].clone();
        want.sort_unstable();
        got.sort_unstable();
        let cap = n.min(b.params.n_j(j));
        if got != want {
            w = Some(format!("level {j}: Q_j is not the set of bag representatives"));
        } else if got.len() > cap {
            w = Some(format!("level {j}: |Q_j| = {} > min(n, n_j) = {cap}", got.len()));
        } else if let Some(e) =
            b.star[j].edges().iter().find(|e| got.binary_search(&e.u).is_err() || got.binary_search(&e.v).is_err())
        {
            w = Some(format!("level {j}: G*_j edge ({}, {}) leaves Q_j", e.u, e.v));
        }
        if w.is_some() {
            break;
        }
    }
    CheckResult::new("level_reps", Tag::Any).with_witness(w)
}

fn attach_records<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let mut w = None;
    for rec in &b.attachments {
        if let Err(e) = check_star_forest(&rec.graph, &rec.stars) {
            w = Some(format!("level {}: {e}", rec.level));
            break;
        }
        let g = &b.levels[rec.level];
        let missing = rec
            .stars
            .stars
            .iter()
            .flat_map(|s| s.leaves.iter().map(move |&q| (s.center, q)))
            .find(|&(s, q)| !g.has_edge(rec.vertices[s], rec.vertices[q]));
        if let Some((s, q)) = missing {
            w = Some(format!(
                "level {}: representing edge ({}, {}) not in G̃_j",
                rec.level, rec.vertices[s], rec.vertices[q]
            ));
            break;
        }
    }
    let mut r = CheckResult::new("attach_records", Tag::Any).with_witness(w);
    r.measured = Some(b.attachments.iter().map(|a| a.stars.stars.len()).sum::<usize>() as f64);
    r
}

fn counters_reps_only<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let ever: HashSet<PointId> = b.reps.iter().flatten().copied().collect();
    let c = &b.counters;
    let w = (0..b.n())
        .find(|p| !ever.contains(p) && c.load(*p) > 0)
        .map(|p| format!("point {p} was never a representative but has load {}", c.load(p)));
    CheckResult::new("counters_reps_only", Tag::Any).with_witness(w)
}

fn counter_bound<S: Scalar>(
    b: &SpannerBundle<S>,
    name: &'static str,
    get: impl Fn(&crate::lightsp::CounterState, PointId) -> u32,
    bound: u32,
) -> CheckResult {
    let (arg, max) =
        (0..b.n()).map(|p| (p, get(&b.counters, p))).max_by_key(|&(p, v)| (v, std::cmp::Reverse(p))).unwrap_or((0, 0));
    let r = CheckResult::new(name, Tag::Strict).value(f64::from(max), f64::from(bound));
    if max > bound {
        r.fail(format!("point {arg} has {max}"))
    } else {
        r
    }
}

/// Bags checked by the per-bag lemmas: all of them for small inputs, a seeded
/// sample of the non-empty ones otherwise.
fn sampled_bags<S: Scalar>(b: &SpannerBundle<S>, opts: &VerifyOptions) -> Vec<(usize, usize)> {
    let all: Vec<(usize, usize)> = bags(b).filter(|(_, _, bag)| !bag.is_empty()).map(|(j, i, _)| (j, i)).collect();
    if b.n() <= opts.full_sample_n {
        return all;
    }
    let k = ((all.len() as f64 * opts.sample_frac).ceil() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pick = all.into_iter().choose_multiple(&mut rng, k);
    pick.sort_unstable();
    pick
}

/// Hop-bounded multi-source distances from `B(v)` inside `G̃[Q(v)]`, after
/// `h1` and `h2 ≥ h1` rounds.
fn hop_bounded_from_base<S: Scalar>(
    g: &SpannerGraph<S>,
    bag: &Bag,
    h1: usize,
    h2: usize,
) -> (HashMap<PointId, S>, HashMap<PointId, S>) {
    let inside: HashSet<PointId> = bag.points.iter().copied().collect();
    let mut dist: HashMap<PointId, S> = bag.points.iter().map(|&p| (p, S::infinity())).collect();
    for &p in &bag.base {
        dist.insert(p, S::zero());
    }
    let mut at_h1 = dist.clone();
    for round in 1..=h2 {
        let mut next = dist.clone();
        let mut changed = false;
        for &u in &bag.points {
            for &(v, w) in g.neighbors(u) {
                if !inside.contains(&v) {
                    continue;
                }
                let cand = dist[&v] + w;
                if cand < next[&u] {
                    next.insert(u, cand);
                    changed = true;
                }
            }
        }
        dist = next;
        if round == h1 {
            at_h1 = dist.clone();
        }
        if !changed {
            if round < h1 {
                at_h1 = dist.clone();
            }
            break;
        }
    }
    (at_h1, dist)
}

fn lemma_key<S: Scalar>(b: &SpannerBundle<S>, opts: &VerifyOptions) -> CheckResult {
    let ell = b.params.ell;
    let mut worst = 0.0f64;
    let mut w = None;
    let sample = sampled_bags(b, opts);
    for &(j, i) in &sample {
        let bag = b.forest.bag(j, i);
        if bag.points.len() == bag.base.len() {
            continue;
        }
        let half = b.params.mu(j) / S::lit(2.0);
        let kernel: HashSet<PointId> = bag.kernel.iter().copied().collect();
        let (d2, d3) = hop_bounded_from_base(&b.graph, bag, 2 * ell, 3 * ell);
        for &p in &bag.points {
            let d = if kernel.contains(&p) { d2[&p] } else { d3[&p] };
            worst = worst.max((d / half).as_f64());
            if !le_rel(d, half, opts.rel_tol) && w.is_none() {
                w = Some(format!(
                    "level {j} bag {i}: point {p} is {d} from B(v) within the hop budget, μ_j/2 = {half}"
                ));
            }
        }
    }
    let mut r = CheckResult::new("lemma_key", Tag::Strict).with_witness(w).value(worst, 1.0);
    r.tolerance = Some(opts.rel_tol);
    r.detail.get_or_insert_with(|| format!("{} bags", sample.len()));
    r
}

fn bag_diameter<S: Scalar>(b: &SpannerBundle<S>, opts: &VerifyOptions) -> CheckResult {
    let mut search = BoundedDijkstra::new(b.n());
    let mut w = None;
    let mut worst = 0.0f64;
    let sample = sampled_bags(b, opts);
    for &(j, i) in &sample {
        let bag = b.forest.bag(j, i);
        if bag.points.len() < 2 {
            continue;
        }
        let bound = S::lit(2.0) * b.params.mu(j);
        let reach = bound * S::lit(1.0 + opts.rel_tol);
        for &p in &bag.points {
            let ball: HashMap<PointId, S> = search.ball(&b.graph, p, reach).into_iter().collect();
            for &q in &bag.points {
                match ball.get(&q) {
                    Some(&d) => worst = worst.max((d / bound).as_f64()),
                    None => {
                        worst = f64::INFINITY;
                        w = w.or(Some(format!("level {j} bag {i}: {p} and {q} are farther than 2μ_j = {bound} in G̃")));
                    }
                }
            }
            if w.is_some() {
                break;
            }
        }
        if w.is_some() {
            break;
        }
    }
    let mut r = CheckResult::new("bag_diameter", Tag::Strict).with_witness(w).value(worst, 1.0);
    r.tolerance = Some(opts.rel_tol);
    r.detail.get_or_insert_with(|| format!("{} bags", sample.len()));
    r
}

fn check_stretch<S: Scalar>(b: &SpannerBundle<S>, m: &MetricSpace<S>, opts: &VerifyOptions) -> CheckResult {
    let target = b.config.target_stretch();
    let all: Vec<PointId> = (0..b.n()).collect();
    let r = CheckResult::new("stretch", Tag::Strict);
    match stretch(&b.graph, &all, |p, q| m.dist(p, q), opts.caps.apsp) {
        Err(Error::SizeLimitExceeded { n, cap, .. }) => r.skip(format!("n = {n} above the APSP cap {cap}")),
        Err(e) => r.fail(e.to_string()),
        Ok(s) => {
            let s = s.as_f64();
            let mut r = r.value(s, target);
            r.tolerance = Some(opts.rel_tol);
            if le_rel(s, target, opts.rel_tol) {
                r
            } else {
                r.fail(format!("stretch {s} > {target}"))
            }
        }
    }
}

fn measured_basic_degree<S: Scalar>(b: &SpannerBundle<S>) -> usize {
    b.trace.iter().map(|t| t.basic.delta.max(t.basic_hat.map_or(0, |h| h.delta))).max().unwrap_or(0)
}

fn check_degree<S: Scalar>(b: &SpannerBundle<S>, opts: &VerifyOptions) -> CheckResult {
    let delta = measured_basic_degree(b) as f64;
    let bound = opts.degree_c * (delta * b.params.gamma as f64 + b.params.rho as f64) + 2.0;
    let d = b.graph.max_degree() as f64;
    let r = CheckResult::new("degree", Tag::Strict).value(d, bound);
    if d <= bound {
        r
    } else {
        r.fail(format!("Δ(G̃) = {d} with measured back-end degree {delta}"))
    }
}

/// Hop diameter of the back-end's own spanner on the whole metric, at its
/// declared stretch.
pub fn basic_hop_diameter<S: Scalar>(
    b: &SpannerBundle<S>,
    m: &MetricSpace<S>,
    caps: &OracleCaps,
) -> crate::Result<Option<usize>> {
    let all: Vec<PointId> = (0..m.n()).collect();
    let (g, _) = b.config.basic.build(m, &all, None, caps)?;
    let s = S::lit(b.config.basic.declared_stretch());
    hop_diameter(&g, &all, |p, q| m.dist(p, q), s, caps.minplus)
}

fn check_hop_diameter<S: Scalar>(b: &SpannerBundle<S>, m: &MetricSpace<S>, opts: &VerifyOptions) -> CheckResult {
    let r = CheckResult::new("hop_diameter", Tag::Strict);
    let n = b.n();
    if n > opts.caps.minplus {
        return r.skip(format!("n = {n} above the min-plus cap {}", opts.caps.minplus));
    }
    let lambda = match basic_hop_diameter(b, m, &opts.caps) {
        Ok(Some(l)) => l,
        Ok(None) => return r.skip("back-end output misses its declared stretch"),
        Err(e) => return r.skip(format!("back-end hop diameter unavailable: {e}")),
    };
    let all: Vec<PointId> = (0..n).collect();
    let rho = b.params.rho as f64;
    let log = if n > 1 { (n as f64).ln() / rho.ln() } else { 0.0 };
    let bound = opts.hop_c * (lambda as f64 + log + rho);
    let s = S::lit(b.config.target_stretch());
    match hop_diameter(&b.graph, &all, |p, q| m.dist(p, q), s, opts.caps.minplus) {
        Err(e) => r.skip(e.to_string()),
        Ok(None) => r.fail("no hop budget reaches the target stretch"),
        Ok(Some(h)) => {
            let mut r = r.value(h as f64, bound);
            r.detail = Some(format!("Λ_meas = {lambda}"));
            if (h as f64) <= bound {
                r
            } else {
                r.fail(format!("h = {h}, Λ_meas = {lambda}"))
            }
        }
    }
}

/// Lightness divided by `ρ · log_ρ n · t²/ε · L/ω(MST)`; reported, not bounded.
pub fn lightness_constant<S: Scalar>(b: &SpannerBundle<S>) -> f64 {
    let n = b.n() as f64;
    let p = &b.params;
    let rho = p.rho as f64;
    let log = (n.ln() / rho.ln()).max(1.0);
    let mst = b.mst_weight.as_f64();
    if mst <= 0.0 {
        return 0.0;
    }
    let l_ratio = b.path.total().as_f64() / mst;
    b.lightness() / (rho * log * p.t * p.t / p.eps * l_ratio)
}

/// A connected spanning graph weighs at least the MST, so `Ψ ≥ 1` whenever
/// the MST is exact; the normalized constant is reported alongside.
fn check_lightness<S: Scalar>(b: &SpannerBundle<S>) -> CheckResult {
    let psi = b.lightness();
    let mut r = CheckResult::new("lightness", Tag::Any);
    r.measured = Some(psi);
    r.detail = Some(format!("Ψ ≥ 1; normalized constant {:.4}", lightness_constant(b)));
    if b.mst_exact && b.n() > 1 && psi < 1.0 - 1e-9 {
        r = r.fail(format!("Ψ = {psi} is below the MST weight"));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basicsp::BasicSpKind;
    use crate::lightsp::{run, RunConfig};
    use crate::metric::{generate_points, PointKind};

    #[test]
    fn fresh_strict_run_passes() {
        let m = generate_points::<f64>(PointKind::Uniform, 120, 2, 9).unwrap();
        let b = run(&m, &RunConfig::new(2, 0.5, 1.05, BasicSpKind::Greedy { t: 1.05 })).unwrap();
        let rep = verify_all(&b, &m, &VerifyOptions::default());
        assert!(rep.passed(), "{}", rep.table());
        assert_eq!(rep.checks.len(), ANY_CHECKS.len() + STRICT_CHECKS.len());
        assert_eq!(rep.get("stretch").unwrap().status, Status::Pass);
    }

    #[test]
    fn removing_components_breaks_stretch() {
        let m = generate_points::<f64>(PointKind::Uniform, 80, 2, 4).unwrap();
        let mut b = run(&m, &RunConfig::new(2, 0.5, 1.05, BasicSpKind::Greedy { t: 1.05 })).unwrap();
        b.graph = b.h.clone();
        assert!(run_check("stretch", &b, &m, &VerifyOptions::default()).unwrap().failed());
    }
}
