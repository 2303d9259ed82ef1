#![allow(dead_code)]

use lightsp::metric::{generate_points, PointKind};
use lightsp::{run, BasicSpKind, MetricSpace, Mode, PointId, RunConfig, SpannerBundle, SpannerGraph};

pub type Bundle = SpannerBundle<f64>;
pub type Metric = MetricSpace<f64>;

/// A strict greedy run small enough for every oracle.
pub fn strict_bundle() -> (Bundle, Metric) {
    let m = generate_points::<f64>(PointKind::Uniform, 300, 2, 11).unwrap();
    let b = run(&m, &RunConfig::new(2, 0.5, 1.05, BasicSpKind::Greedy { t: 1.05 })).unwrap();
    (b, m)
}

/// An exploratory run in which attachments and zombie chains occur.
pub fn explore_bundle() -> (Bundle, Metric) {
    let m = generate_points::<f64>(PointKind::Uniform, 600, 2, 3).unwrap();
    let cfg = RunConfig::new(2, 0.5, 1.05, BasicSpKind::Greedy { t: 1.05 }).with_mode(Mode::Explore { gamma: 3 });
    let b = run(&m, &cfg).unwrap();
    assert!(b.forest.levels.iter().flatten().any(|bag| bag.disappearing && bag.step_parent.is_some()));
    (b, m)
}

pub type Injection = fn(&mut Bundle, &Metric);

/// One corruption per check, keyed by the check it must trip, and whether it
/// needs the exploratory bundle.
pub fn injections() -> Vec<(&'static str, bool, Injection)> {
    vec![
        ("q_partition", false, dup_point_across_bags),
        ("n_partition", false, shrink_native_range),
        ("set_containment", false, kernel_outside_q),
        ("empty_iff_base_empty", false, clear_base),
        ("rep_in_kernel", false, foreign_rep),
        ("kernel_lemma", false, drop_kernel_point),
        ("labels_exclusive", false, double_label),
        ("disappearing_zombie", true, adopt_by_parent),
        ("zombie_children", false, zombie_with_siblings),
        ("adopter_keeps_survivor", false, orphan_adopter),
        ("zombie_chain_identity", true, break_chain),
        ("base_path_lemma", false, drop_base_edge),
        ("base_degree", false, fork_base_path),
        ("base_weight", false, heavy_base_level),
        ("level_max_weight", false, long_level_edge),
        ("level_degree", false, level_hub),
        ("edge_weights", false, wrong_weight),
        ("component_union", false, stray_edge),
        ("level_reps", false, extra_rep),
        ("attach_records", true, drop_star),
        ("counters_reps_only", false, count_non_rep),
        ("lightness", false, thin_graph),
        ("ctr_large", false, |b, _| b.counters.large[0] = 2),
        ("ctr_single", false, |b, _| b.counters.single[0] = b.params.counter_cap() as u32 + 1),
        ("ctr_plain", false, |b, _| b.counters.plain[0] = b.params.counter_cap() as u32 + 1),
        ("ctr_load", false, overload),
        ("lemma_key", false, far_point_in_bag),
        ("bag_diameter", false, far_point_in_bag),
        ("stretch", false, |b, _| b.graph = b.h.clone()),
        ("degree", false, understate_basic_degree),
        ("hop_diameter", false, |b, _| b.graph = b.h.clone()),
    ]
}

fn nonempty(b: &Bundle, j: usize) -> Vec<usize> {
    (0..b.forest.level(j).len()).filter(|&i| !b.forest.bag(j, i).is_empty()).collect()
}

fn dup_point_across_bags(b: &mut Bundle, _: &Metric) {
    let ne = nonempty(b, 2);
    let p = b.forest.bag(2, ne[0]).points[0];
    b.forest.bag_mut(2, ne[1]).points.push(p);
}

fn shrink_native_range(b: &mut Bundle, _: &Metric) {
    let ne = nonempty(b, 2);
    b.forest.bag_mut(2, ne[0]).native.1 -= 1;
}

fn kernel_outside_q(b: &mut Bundle, _: &Metric) {
    let ne = nonempty(b, 2);
    let p = b.forest.bag(2, ne[1]).points[0];
    b.forest.bag_mut(2, ne[0]).kernel.push(p);
}

fn clear_base(b: &mut Bundle, _: &Metric) {
    let ne = nonempty(b, 3);
    b.forest.bag_mut(3, ne[0]).base.clear();
}

fn foreign_rep(b: &mut Bundle, _: &Metric) {
    let ne = nonempty(b, 2);
    let p = b.forest.bag(2, ne[1]).points[0];
    b.forest.bag_mut(2, ne[0]).rep = Some(p);
}

fn drop_kernel_point(b: &mut Bundle, _: &Metric) {
    let ell = b.params.ell;
    let (j, i) = (1..=b.forest.ell())
        .flat_map(|j| (0..b.forest.level(j).len()).map(move |i| (j, i)))
        .find(|&(j, i)| {
            let bag = b.forest.bag(j, i);
            bag.points.len() >= 2 && bag.points.len() < ell
        })
        .expect("a small bag with two points");
    b.forest.bag_mut(j, i).kernel.pop();
}

fn double_label(b: &mut Bundle, _: &Metric) {
    let bag = b.forest.bag_mut(2, 0);
    bag.zombie = true;
    bag.incubator = true;
}

fn disappearing(b: &Bundle) -> (usize, usize) {
    (1..=b.forest.ell())
        .flat_map(|j| (0..b.forest.level(j).len()).map(move |i| (j, i)))
        .find(|&(j, i)| b.forest.bag(j, i).disappearing && b.forest.bag(j, i).step_parent.is_some())
        .expect("a disappearing zombie")
}

fn adopt_by_parent(b: &mut Bundle, _: &Metric) {
    let (j, i) = disappearing(b);
    let bag = b.forest.bag_mut(j, i);
    bag.step_parent = bag.parent;
}

fn zombie_with_siblings(b: &mut Bundle, _: &Metric) {
    let (j, i) = (2..=b.forest.ell())
        .flat_map(|j| (0..b.forest.level(j).len()).map(move |i| (j, i)))
        .find(|&(j, i)| {
            let (c0, c1) = b.forest.bag(j, i).children;
            (c0..c1).filter(|&c| !b.forest.bag(j - 1, c).is_empty()).count() >= 2
        })
        .expect("a bag with two non-empty children");
    let c0 = b.forest.bag(j, i).children.0;
    let c = (c0..).find(|&c| !b.forest.bag(j - 1, c).is_empty()).unwrap();
    b.forest.bag_mut(j - 1, c).zombie = true;
}

fn orphan_adopter(b: &mut Bundle, _: &Metric) {
    let ne = nonempty(b, 2);
    let bag = b.forest.bag_mut(2, ne[0]);
    bag.step_children.push(bag.surviving[0]);
    bag.surviving.clear();
}

fn break_chain(b: &mut Bundle, _: &Metric) {
    let (j, i) = disappearing(b);
    b.forest.bag_mut(j, i).points.pop();
}

fn drop_base_edge(b: &mut Bundle, _: &Metric) {
    let lvl = b.forest.base_levels.iter().position(|l| !l.is_empty() && l.len() > 1).unwrap();
    b.forest.base_levels[lvl].remove(0);
}

fn fork_base_path(b: &mut Bundle, _: &Metric) {
    let order = b.forest.order.clone();
    let (u, v) = b.forest.base_levels[0][0];
    let (l, r) = if b.forest.rank[u] < b.forest.rank[v] { (u, v) } else { (v, u) };
    let beyond = order[b.forest.rank[r] + 1];
    b.forest.base_levels[0].push((l, beyond));
}

fn heavy_base_level(b: &mut Bundle, _: &Metric) {
    let o = b.forest.order.clone();
    let last = b.forest.base_levels.len() - 1;
    b.forest.base_levels[last].extend(o[1..].iter().map(|&p| (o[0], p)));
}

fn farthest_pair(m: &Metric) -> (PointId, PointId) {
    let mut best = (0, 1, 0.0);
    for p in 0..m.n() {
        for q in p + 1..m.n() {
            if m.dist(p, q) > best.2 {
                best = (p, q, m.dist(p, q));
            }
        }
    }
    (best.0, best.1)
}

fn long_level_edge(b: &mut Bundle, m: &Metric) {
    let (p, q) = farthest_pair(m);
    b.levels[1].add_edge(p, q, m.dist(p, q));
}

fn level_hub(b: &mut Bundle, m: &Metric) {
    for q in 1..m.n() {
        b.levels[1].add_edge(0, q, m.dist(0, q));
    }
}

fn wrong_weight(b: &mut Bundle, _: &Metric) {
    let mut g = SpannerGraph::new(b.graph.n());
    for (k, e) in b.graph.edges().iter().enumerate() {
        g.add_edge(e.u, e.v, if k == 0 { e.w * 1.5 } else { e.w });
    }
    b.graph = g;
}

fn stray_edge(b: &mut Bundle, m: &Metric) {
    let (p, q) = farthest_pair(m);
    b.graph.add_edge(p, q, m.dist(p, q));
}

fn extra_rep(b: &mut Bundle, _: &Metric) {
    let reps = &b.reps[1];
    let p = (0..b.n()).find(|p| !reps.contains(p)).expect("a non-representative");
    b.reps[1].push(p);
}

fn drop_star(b: &mut Bundle, _: &Metric) {
    let rec = b.attachments.iter_mut().find(|r| !r.stars.stars.is_empty()).expect("an attachment");
    rec.stars.stars.remove(0);
}

/// Every point usually represents at level 1, so the corruption erases a
/// counted point from the representative history instead.
fn count_non_rep(b: &mut Bundle, _: &Metric) {
    let p = (0..b.n()).find(|&p| b.counters.load(p) > 0).expect("a counted point");
    for reps in &mut b.reps {
        reps.retain(|&r| r != p);
    }
}

/// Keeps only the lightest tenth of the edges, which cannot span.
fn thin_graph(b: &mut Bundle, _: &Metric) {
    let mut edges = b.graph.edges().to_vec();
    edges.sort_by(|x, y| x.w.total_cmp(&y.w));
    let mut g = SpannerGraph::new(b.graph.n());
    for e in edges.iter().take(b.n() / 10) {
        g.add_edge(e.u, e.v, e.w);
    }
    b.graph = g;
}

fn overload(b: &mut Bundle, _: &Metric) {
    let cap = b.params.counter_cap() as u32;
    b.counters.large[0] = 2;
    b.counters.single[0] = cap;
    b.counters.plain[0] = cap;
}

fn far_point_in_bag(b: &mut Bundle, m: &Metric) {
    let ne = nonempty(b, 2);
    let i = ne[0];
    let anchor = b.forest.bag(2, i).points[0];
    let far = (0..m.n()).max_by(|&x, &y| m.dist(anchor, x).total_cmp(&m.dist(anchor, y))).unwrap();
    b.forest.bag_mut(2, i).points.push(far);
}

/// At desk scale the degree bound exceeds `n − 1`, so the corruption goes
/// into the measured back-end degree the bound is computed from.
fn understate_basic_degree(b: &mut Bundle, _: &Metric) {
    for t in &mut b.trace {
        t.basic.delta = 0;
        t.basic_hat = None;
    }
}
