//! The LightSp orchestrator: MST path, interval hierarchy, per-level
//! processing (Parts I to III), counters, representatives, and assembly.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::attach::{attach, LabeledGraph, StarForest};
use crate::basicsp::{BasicSpKind, BasicStats};
use crate::graph::{preorder_path, prim_mst, HamiltonianPath, OracleCaps, SpannerGraph};
use crate::hierarchy::{base_edge_set, build_interval_forest, merge_level, BagForest, LevelParams, Mode};
use crate::metric::{MetricSpace, PointId};
use crate::path1d::{build_path_spanner, reweight_to_metric, PathSpanner};
use crate::scalar::Scalar;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub rho: usize,
    pub eps: f64,
    pub t: f64,
    pub mode: Mode,
    pub c0: usize,
    pub basic: BasicSpKind,
    pub seed: u64,
    pub caps: OracleCaps,
}

impl RunConfig {
    /// Strict mode, `c0 = 8`, seed 0 and default caps.
    pub fn new(rho: usize, eps: f64, t: f64, basic: BasicSpKind) -> Self {
        Self { rho, eps, t, mode: Mode::Strict, c0: 8, basic, seed: 0, caps: OracleCaps::default() }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho < 2 {
            return Err(Error::InvalidSpec(format!("rho must be at least 2, got {}", self.rho)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidSpec(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.t >= 1.0 && self.t.is_finite()) {
            return Err(Error::InvalidSpec(format!("t must be at least 1, got {}", self.t)));
        }
        if self.c0 == 0 {
            return Err(Error::InvalidSpec("c0 must be positive".into()));
        }
        if let BasicSpKind::Greedy { t } = self.basic {
            if t < 1.0 {
                return Err(Error::InvalidSpec(format!("greedy stretch must be at least 1, got {t}")));
            }
        }
        Ok(())
    }

    /// The stretch the output is meant to achieve: back-end stretch plus ε.
    pub fn target_stretch(&self) -> f64 {
        self.basic.declared_stretch() + self.eps
    }

    /// The `t` the analysis runs with: the back-end's own guarantee.
    fn analysis_t(&self) -> f64 {
        self.basic.declared_stretch().max(self.t)
    }
}

/// Per-point counters.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CounterState {
    /// Large counter `CTR`.
    pub large: Vec<u32>,
    pub single: Vec<u32>,
    pub plain: Vec<u32>,
}

impl CounterState {
    pub fn new(n: usize) -> Self {
        Self { large: vec![0; n], single: vec![0; n], plain: vec![0; n] }
    }

    /// Small counter `ctr = single + plain`.
    pub fn ctr(&self, p: PointId) -> u32 {
        self.single[p] + self.plain[p]
    }

    pub fn load(&self, p: PointId) -> u32 {
        self.ctr(p) + self.large[p]
    }

    pub fn maxima(&self) -> CounterMaxima {
        let max = |v: &[u32]| v.iter().copied().max().unwrap_or(0);
        CounterMaxima {
            large: max(&self.large),
            single: max(&self.single),
            plain: max(&self.plain),
            load: (0..self.large.len()).map(|p| self.load(p)).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CounterMaxima {
    pub large: u32,
    pub single: u32,
    pub plain: u32,
    pub load: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LevelTrace {
    pub level: usize,
    pub tau: f64,
    pub q_size: usize,
    pub e_star: usize,
    pub e_hat: usize,
    pub e_tilde: usize,
    pub delta_star: usize,
    pub delta_hat: usize,
    pub delta_tilde: usize,
    pub max_weight: f64,
    pub part2: bool,
    pub q_hat_size: usize,
    pub risky: usize,
    pub attachments: usize,
    pub attached_leaves: usize,
    pub zombies_labeled: usize,
    pub incubators_labeled: usize,
    pub joins: usize,
    /// Level-`j` representatives that were not representatives at level `j − 1`.
    pub rep_churn: usize,
    /// Representatives active through `Ĝ_j` only.
    pub activity_divergence: usize,
    pub basic: BasicStats,
    pub basic_hat: Option<BasicStats>,
}

/// The input to one Attach call, in local indices, and its result.
#[derive(Clone, Debug)]
pub struct AttachRecord {
    pub level: usize,
    /// Point id of each local vertex.
    pub vertices: Vec<PointId>,
    pub graph: LabeledGraph,
    pub stars: StarForest,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PhaseTimes {
    pub mst_ms: f64,
    pub path_ms: f64,
    pub level0_ms: f64,
    pub levels_ms: f64,
    pub total_ms: f64,
}

/// The output spanner with its components and the state that produced it.
#[derive(Clone, Debug)]
pub struct SpannerBundle<S> {
    pub config: RunConfig,
    pub params: LevelParams<S>,
    pub graph: SpannerGraph<S>,
    /// The path spanner `H`, reweighted to the metric.
    pub h: SpannerGraph<S>,
    pub path_spanner: PathSpanner<S>,
    pub base: SpannerGraph<S>,
    /// `G̃_j` for `j = 0..=ℓ`.
    pub levels: Vec<SpannerGraph<S>>,
    /// `G*_j` for `j = 0..=ℓ`.
    pub star: Vec<SpannerGraph<S>>,
    /// Representatives `Q_j` per level, index 0 unused.
    pub reps: Vec<Vec<PointId>>,
    pub forest: BagForest<S>,
    pub path: HamiltonianPath<S>,
    pub mst_weight: S,
    pub mst_exact: bool,
    pub attachments: Vec<AttachRecord>,
    pub trace: Vec<LevelTrace>,
    pub counters: CounterState,
    pub times: PhaseTimes,
}

/// Summary written next to the edge list.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetrics {
    pub n: usize,
    pub rho: usize,
    pub eps: f64,
    pub t: f64,
    pub mode: String,
    pub basic: String,
    pub c: usize,
    pub gamma: usize,
    pub ell: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub weight: f64,
    pub mst_weight: f64,
    pub mst_exact: bool,
    pub lightness: f64,
    pub stretch: Option<f64>,
    pub hop_diameter: Option<usize>,
    pub component_edges: ComponentEdges,
    pub counters: CounterMaxima,
    pub trace: Vec<LevelTrace>,
    pub times: PhaseTimes,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentEdges {
    pub h: usize,
    pub base: usize,
    pub levels: Vec<usize>,
}

impl<S: Scalar> SpannerBundle<S> {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn lightness(&self) -> f64 {
        let w = self.mst_weight.as_f64();
        if w > 0.0 {
            self.graph.weight().as_f64() / w
        } else {
            0.0
        }
    }

    pub fn metrics(&self) -> RunMetrics {
        RunMetrics {
            n: self.n(),
            rho: self.config.rho,
            eps: self.config.eps,
            t: self.config.t,
            mode: self.config.mode.label(),
            basic: self.config.basic.label(),
            c: self.params.c,
            gamma: self.params.gamma,
            ell: self.params.ell,
            edges: self.graph.edge_count(),
            max_degree: self.graph.max_degree(),
            weight: self.graph.weight().as_f64(),
            mst_weight: self.mst_weight.as_f64(),
            mst_exact: self.mst_exact,
            lightness: self.lightness(),
            stretch: None,
            hop_diameter: None,
            component_edges: ComponentEdges {
                h: self.h.edge_count(),
                base: self.base.edge_count(),
                levels: self.levels.iter().map(SpannerGraph::edge_count).collect(),
            },
            counters: self.counters.maxima(),
            trace: self.trace.clone(),
            times: self.times,
        }
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs the algorithm on the whole metric.
pub fn run<S: Scalar>(m: &MetricSpace<S>, cfg: &RunConfig) -> Result<SpannerBundle<S>> {
    let t_total = Instant::now();
    cfg.validate()?;
    let n = m.n();
    if n == 0 {
        return Err(Error::InvalidSpec("empty point set".into()));
    }
    let all: Vec<PointId> = (0..n).collect();

    let t_mst = Instant::now();
    let mst_exact = n <= cfg.caps.exact_mst;
    let mst = if mst_exact {
        prim_mst(m, None)?
    } else {
        let (sp, _) = cfg.basic.build(m, &all, None, &cfg.caps)?;
        prim_mst(m, Some(&sp))?
    };
    let mst_ms = ms(t_mst);

    let t_path = Instant::now();
    let path = preorder_path(&mst, m, 0)?;
    let path_spanner = build_path_spanner(&path, cfg.rho);
    let h = reweight_to_metric(&path_spanner, m);
    let params = LevelParams::new(n, cfg.rho, cfg.eps, cfg.analysis_t(), path.total(), cfg.mode, cfg.c0);
    let mut forest = build_interval_forest(&path, &params);
    let path_ms = ms(t_path);

    let t_level0 = Instant::now();
    let (g0, stats0) = cfg.basic.build(m, &all, Some(params.tau(0)), &cfg.caps)?;
    let level0_ms = ms(t_level0);
    let mut trace = vec![LevelTrace {
        level: 0,
        tau: params.tau(0).as_f64(),
        q_size: n,
        e_star: g0.edge_count(),
        e_tilde: g0.edge_count(),
        delta_star: g0.max_degree(),
        delta_tilde: g0.max_degree(),
        max_weight: g0.max_edge_weight().as_f64(),
        basic: stats0,
        ..LevelTrace::default()
    }];
    let mut levels = vec![g0.clone()];
    let mut star = vec![g0];
    let mut reps: Vec<Vec<PointId>> = vec![Vec::new()];
    let mut attachments = Vec::new();
    let mut counters = CounterState::new(n);

    let t_levels = Instant::now();
    let ell = params.ell;
    if ell >= 1 {
        for bag in forest.level_mut(1) {
            bag.rep = bag.points.first().copied();
        }
    }
    let mut bag_of = vec![usize::MAX; n];
    for j in 1..=ell {
        let mut lt = LevelTrace { level: j, tau: params.tau(j).as_f64(), ..LevelTrace::default() };
        let q_j: Vec<PointId> = forest.level(j).iter().filter_map(|b| b.rep).collect();
        for (i, b) in forest.level(j).iter().enumerate() {
            if let Some(r) = b.rep {
                bag_of[r] = i;
            }
        }
        let tau = params.tau(j);

        // Part I.
        let (g_star, stats) = cfg.basic.build(m, &q_j, Some(tau), &cfg.caps)?;
        lt.q_size = q_j.len();
        lt.e_star = g_star.edge_count();
        lt.delta_star = g_star.max_degree();
        lt.basic = stats;

        // Part II.
        let mut g_tilde = g_star.clone();
        if params.part2_runs(j) {
            lt.part2 = true;
            let (g_hat, rec) = part2(m, cfg, &params, &mut forest, j, &q_j, &bag_of, &g_star, &mut lt)?;
            lt.e_hat = g_hat.edge_count();
            lt.delta_hat = g_hat.max_degree();
            g_tilde.union_with(&g_hat);
            attachments.push(rec);
        }
        lt.e_tilde = g_tilde.edge_count();
        lt.delta_tilde = g_tilde.max_degree();
        lt.max_weight = g_tilde.max_edge_weight().as_f64();

        // Counters: activity in G̃_j.
        for &r in &q_j {
            if g_tilde.degree(r) == 0 {
                continue;
            }
            if g_star.degree(r) == 0 {
                lt.activity_divergence += 1;
            }
            let size = forest.bag(j, bag_of[r]).points.len();
            if size >= ell {
                counters.large[r] += 1;
            } else if size == 1 {
                counters.single[r] += 1;
            } else {
                counters.plain[r] += 1;
            }
        }

        // Part III.
        if j < ell {
            let joins: Vec<(usize, usize)> = forest
                .level(j)
                .iter()
                .enumerate()
                .filter(|(_, b)| b.disappearing)
                .map(|(i, b)| (i, b.join_target.expect("disappearing zombie has a target")))
                .collect();
            lt.joins = joins.len();
            merge_level(&mut forest, j, &joins)?;
            for &(_, a) in &joins {
                forest.bag_mut(j + 1, a).adopter = true;
            }
            choose_representatives(&mut forest, j + 1, &counters)?;
            let prev: std::collections::HashSet<PointId> = q_j.iter().copied().collect();
            lt.rep_churn = forest.level(j + 1).iter().filter_map(|b| b.rep).filter(|r| !prev.contains(r)).count();
        }
        for &r in &q_j {
            bag_of[r] = usize::MAX;
        }
        reps.push(q_j);
        levels.push(g_tilde);
        star.push(g_star);
        trace.push(lt);
    }
    let levels_ms = ms(t_levels);

    let base = base_edge_set(&forest, m);
    let mut graph = h.clone();
    graph.union_with(&base);
    for g in &levels {
        graph.union_with(g);
    }
    Ok(SpannerBundle {
        config: cfg.clone(),
        params,
        graph,
        h,
        path_spanner,
        base,
        levels,
        star,
        reps,
        forest,
        mst_weight: mst.weight(),
        mst_exact,
        path,
        attachments,
        trace,
        counters,
        times: PhaseTimes { mst_ms, path_ms, level0_ms, levels_ms, total_ms: ms(t_total) },
    })
}

/// Runs on the sub-metric induced by `q` and maps the edges back to the
/// original ids.
pub fn run_subset<S: Scalar>(m: &MetricSpace<S>, q: &[PointId], cfg: &RunConfig) -> Result<SpannerGraph<S>> {
    let sub = m.subspace(q)?;
    let bundle = run(&sub, cfg)?;
    let mut g = SpannerGraph::new(m.n());
    for e in bundle.graph.edges() {
        g.add_edge(q[e.u], q[e.v], e.w);
    }
    Ok(g)
}

/// Part II of level `j`: classify bags, build `Ĝ_j`, attach risky bags and
/// label the bags on both sides of each attachment.
#[allow(clippy::too_many_arguments)]
fn part2<S: Scalar>(
    m: &MetricSpace<S>,
    cfg: &RunConfig,
    params: &LevelParams<S>,
    forest: &mut BagForest<S>,
    j: usize,
    q_j: &[PointId],
    bag_of: &[usize],
    g_star: &SpannerGraph<S>,
    lt: &mut LevelTrace,
) -> Result<(SpannerGraph<S>, AttachRecord)> {
    let gamma = params.gamma;
    let ell = params.ell;
    let top = j + gamma;
    let useful = |b: &crate::hierarchy::Bag| !b.is_empty() && !b.zombie;

    // Cage occupancy: useful level-j bags per (j+γ)-level ancestor.
    let mut per_cage = std::collections::HashMap::<usize, usize>::new();
    for (i, b) in forest.level(j).iter().enumerate() {
        if useful(b) {
            *per_cage.entry(forest.ancestor(j, i, top)).or_default() += 1;
        }
    }
    let mut q_hat: Vec<PointId> =
        q_j.iter().copied().filter(|&r| useful(forest.bag(j, bag_of[r])) && g_star.degree(r) > 0).collect();
    q_hat.sort_unstable();
    lt.q_hat_size = q_hat.len();
    let (g_hat, hat_stats) = cfg.basic.build(m, &q_hat, Some(params.tau(j)), &cfg.caps)?;
    lt.basic_hat = Some(hat_stats);

    let safe: Vec<bool> = q_hat
        .iter()
        .map(|&r| {
            let i = bag_of[r];
            let b = forest.bag(j, i);
            b.points.len() >= ell || per_cage[&forest.ancestor(j, i, top)] >= 2 || b.incubator || b.zombie
        })
        .collect();
    lt.risky = safe.iter().filter(|s| !**s).count();
    let mut local = std::collections::HashMap::with_capacity(q_hat.len());
    for (k, &r) in q_hat.iter().enumerate() {
        local.insert(r, k);
    }
    let mut lg = LabeledGraph::new(safe);
    for g in [g_star, &g_hat] {
        for e in g.edges() {
            if let (Some(&a), Some(&b)) = (local.get(&e.u), local.get(&e.v)) {
                lg.add_edge(a, b);
            }
        }
    }
    let stars = attach(&lg);
    lt.attachments = stars.stars.len();
    for s in &stars.stars {
        let vs = bag_of[q_hat[s.center]];
        let target = forest.ancestor(j, vs, top);
        for &leaf in &s.leaves {
            let vq = bag_of[q_hat[leaf]];
            forest.bag_mut(j, vq).attached = true;
            lt.attached_leaves += 1;
            for k in j + 1..top {
                let a = forest.ancestor(j, vq, k);
                let bag = forest.bag_mut(k, a);
                if bag.incubator {
                    return Err(Error::LabelConflict { level: k, bag: a });
                }
                if !bag.zombie {
                    lt.zombies_labeled += 1;
                }
                bag.zombie = true;
                if k == top - 1 {
                    bag.disappearing = true;
                    bag.join_target = Some(target);
                }
            }
        }
        for k in j + 1..top {
            let a = forest.ancestor(j, vs, k);
            let bag = forest.bag_mut(k, a);
            if bag.zombie {
                return Err(Error::LabelConflict { level: k, bag: a });
            }
            if !bag.incubator {
                lt.incubators_labeled += 1;
            }
            bag.incubator = true;
        }
    }
    let record = AttachRecord { level: j, vertices: q_hat, graph: lg, stars };
    Ok((g_hat, record))
}

/// Representatives of the non-empty bags at level `j ≥ 2`.
fn choose_representatives<S: Scalar>(forest: &mut BagForest<S>, j: usize, counters: &CounterState) -> Result<()> {
    let ell = forest.params.ell;
    for i in 0..forest.level(j).len() {
        let bag = forest.bag(j, i);
        if bag.is_empty() {
            continue;
        }
        if bag.kernel.is_empty() {
            return Err(Error::EmptyKernel { level: j, bag: i });
        }
        let children: Vec<usize> = bag.extended_children().collect();
        let rep = if bag.points.len() >= ell {
            bag.kernel.iter().copied().min_by_key(|&p| (counters.large[p], p))
        } else if children.len() == 1 {
            forest.bag(j - 1, children[0]).rep
        } else {
            bag.kernel.iter().copied().min_by_key(|&p| (counters.plain[p], p))
        };
        forest.bag_mut(j, i).rep = rep;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::stretch;
    use crate::metric::{generate_points, PointKind};

    fn cfg() -> RunConfig {
        RunConfig::new(2, 0.5, 1.05, BasicSpKind::Greedy { t: 1.05 })
    }

    #[test]
    fn one_and_two_points() {
        let m = generate_points::<f64>(PointKind::Uniform, 1, 2, 0).unwrap();
        assert_eq!(run(&m, &cfg()).unwrap().graph.edge_count(), 0);
        let m = generate_points::<f64>(PointKind::Uniform, 2, 2, 0).unwrap();
        let b = run(&m, &cfg()).unwrap();
        assert_eq!(b.graph.edge_count(), 1);
        assert_eq!(b.metrics().edges, 1);
    }

    #[test]
    fn strict_run_meets_stretch() {
        let m = generate_points::<f64>(PointKind::Uniform, 200, 2, 3).unwrap();
        let b = run(&m, &cfg()).unwrap();
        let all: Vec<PointId> = (0..200).collect();
        let s = stretch(&b.graph, &all, |p, q| m.dist(p, q), 2048).unwrap();
        assert!(s <= 1.55 * (1.0 + 1e-9), "stretch {s}");
        assert!(b.attachments.is_empty(), "strict mode on 200 points never reaches Part II");
    }

    #[test]
    fn explore_mode_attaches() {
        let m = generate_points::<f64>(PointKind::Clustered { k: 6 }, 400, 2, 5).unwrap();
        let c = cfg().with_mode(Mode::Explore { gamma: 2 });
        let b = run(&m, &c).unwrap();
        assert!(b.trace.iter().any(|t| t.part2));
        let mut total = SpannerGraph::new(m.n());
        total.union_with(&b.h);
        total.union_with(&b.base);
        for g in &b.levels {
            total.union_with(g);
        }
        assert_eq!(total.edge_count(), b.graph.edge_count());
    }

    #[test]
    fn run_subset_maps_ids_back() {
        let m = generate_points::<f64>(PointKind::Uniform, 30, 2, 1).unwrap();
        let q = vec![3, 7, 11, 20, 29];
        let g = run_subset(&m, &q, &cfg()).unwrap();
        assert!(g.edges().iter().all(|e| q.contains(&e.u) && q.contains(&e.v)));
        assert!(g.edge_count() >= 4);
    }

    #[test]
    fn rejects_bad_config() {
        let m = generate_points::<f64>(PointKind::Uniform, 4, 2, 1).unwrap();
        let mut c = cfg();
        c.rho = 1;
        assert!(matches!(run(&m, &c), Err(Error::InvalidSpec(_))));
    }
}
