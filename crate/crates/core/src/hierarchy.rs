//! The interval hierarchy over the Hamiltonian path: level parameters, the
//! bag forest, per-bag native/base/kernel/point sets, and base edges.

use serde::{Deserialize, Serialize};

use crate::graph::{HamiltonianPath, SpannerGraph};
use crate::metric::{MetricSpace, PointId};
use crate::path1d::log_ceil;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Strict mode takes γ from the analysis constants; exploratory mode uses a
/// small user-chosen γ so that attachments actually happen at desk scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Explore { gamma: usize },
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "strict" => Ok(Self::Strict),
            "explore" => Ok(Self::Explore { gamma: 3 }),
            other => {
                let g = other
                    .strip_prefix("explore:")
                    .and_then(|g| g.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidSpec(format!("unknown mode {other:?}")))?;
                if g < 2 {
                    return Err(Error::InvalidSpec("exploratory gamma must be at least 2".into()));
                }
                Ok(Self::Explore { gamma: g })
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Strict => "strict".into(),
            Self::Explore { gamma } => format!("explore:{gamma}"),
        }
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, Self::Strict)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelParams<S> {
    pub n: usize,
    pub rho: usize,
    pub t: f64,
    pub eps: f64,
    pub c: usize,
    /// Number of levels, `⌈log_ρ n⌉`.
    pub ell: usize,
    /// Path length `L`.
    #[serde(skip)]
    pub big_l: S,
    pub c0: usize,
    pub gamma: usize,
    pub kappa: usize,
    pub eta: usize,
    pub mode: Mode,
}

/// Smallest `k` with `ρ^k ≥ x`, for real `x ≥ 1`.
fn log_ceil_real(x: f64, rho: usize) -> usize {
    let mut k = 0;
    let mut p = 1.0;
    while p < x {
        p *= rho as f64;
        k += 1;
    }
    k
}

impl<S: Scalar> LevelParams<S> {
    pub fn new(n: usize, rho: usize, eps: f64, t: f64, big_l: S, mode: Mode, c0: usize) -> Self {
        assert!(rho >= 2 && eps > 0.0 && t >= 1.0, "invalid parameters");
        let c = (4.0 * (t + 1.0) / eps).ceil() as usize;
        let ell = log_ceil(n, rho).max(usize::from(n > 1));
        let kappa = log_ceil_real(t, rho);
        let gamma = match mode {
            Mode::Strict => c0 * (kappa + log_ceil(c, rho) + 1),
            Mode::Explore { gamma } => gamma,
        };
        Self { n, rho, t, eps, c, ell, big_l, c0, gamma, kappa, eta: 2 * kappa + 3, mode }
    }

    fn rho_pow(&self, e: usize) -> usize {
        self.rho.pow(e as u32)
    }

    /// ξ_j = ρ^{j−1}·L/n.
    pub fn xi(&self, j: usize) -> S {
        S::lit(self.rho_pow(j - 1) as f64) * self.big_l / S::lit(self.n as f64)
    }

    /// μ_j = ξ_j / c, the level-j interval length.
    pub fn mu(&self, j: usize) -> S {
        self.xi(j) / S::lit(self.c as f64)
    }

    /// n_j = ⌈c·n / ρ^{j−1}⌉ intervals at level j.
    pub fn n_j(&self, j: usize) -> usize {
        (self.c * self.n).div_ceil(self.rho_pow(j - 1))
    }

    /// τ_0 = 2·(L/n)·t·(1 + 1/c) and τ_j = ρ^j·τ_0.
    pub fn tau(&self, j: usize) -> S {
        let c = self.c as f64;
        let base = S::lit(2.0 * self.t * (1.0 + 1.0 / c)) * self.big_l / S::lit(self.n as f64);
        base * S::lit(self.rho_pow(j) as f64)
    }

    /// Whether level `j` runs the attachment stage.
    pub fn part2_runs(&self, j: usize) -> bool {
        j >= 1 && j + self.gamma <= self.ell
    }

    /// `min(ℓ, γ + η)`, the strict cap on single and plain counters.
    pub fn counter_cap(&self) -> usize {
        self.ell.min(self.gamma + self.eta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Unlabeled,
    Zombie,
    Incubator,
    /// Never produced by a correct run; kept representable so the checker can see it.
    Conflict,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bag {
    pub level: usize,
    pub index: usize,
    /// Native points as a half-open range of path ranks.
    pub native: (usize, usize),
    /// Base points in ≺_L order.
    pub base: Vec<PointId>,
    /// Kernel points in ≺_L order.
    pub kernel: Vec<PointId>,
    /// Point set `Q(v)` in ≺_L order.
    pub points: Vec<PointId>,
    pub zombie: bool,
    pub incubator: bool,
    /// Top bag of a zombie chain; joins `join_target` at the next level.
    pub disappearing: bool,
    pub attached: bool,
    pub adopter: bool,
    pub join_target: Option<usize>,
    pub rep: Option<PointId>,
    pub parent: Option<usize>,
    pub step_parent: Option<usize>,
    /// F-children as an index range at the level below.
    pub children: (usize, usize),
    pub surviving: Vec<usize>,
    pub step_children: Vec<usize>,
}

impl Bag {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self) -> Label {
        match (self.zombie, self.incubator) {
            (false, false) => Label::Unlabeled,
            (true, false) => Label::Zombie,
            (false, true) => Label::Incubator,
            (true, true) => Label::Conflict,
        }
    }

    pub fn native_len(&self) -> usize {
        self.native.1 - self.native.0
    }

    /// Surviving children followed by step-children.
    pub fn extended_children(&self) -> impl Iterator<Item = usize> + '_ {
        self.surviving.iter().chain(&self.step_children).copied()
    }
}

/// Bags per level (index 0 holds level 1) plus the base edges `B_j`.
#[derive(Clone, Debug)]
pub struct BagForest<S> {
    pub params: LevelParams<S>,
    pub levels: Vec<Vec<Bag>>,
    pub base_levels: Vec<Vec<(PointId, PointId)>>,
    /// Path rank of each point, for ≺_L comparisons.
    pub rank: Vec<usize>,
    pub order: Vec<PointId>,
}

impl<S: Scalar> BagForest<S> {
    pub fn level(&self, j: usize) -> &[Bag] {
        &self.levels[j - 1]
    }

    pub fn level_mut(&mut self, j: usize) -> &mut Vec<Bag> {
        &mut self.levels[j - 1]
    }

    pub fn bag(&self, j: usize, i: usize) -> &Bag {
        &self.levels[j - 1][i]
    }

    pub fn bag_mut(&mut self, j: usize, i: usize) -> &mut Bag {
        &mut self.levels[j - 1][i]
    }

    pub fn ell(&self) -> usize {
        self.levels.len()
    }

    /// Index of the level-`to` F-ancestor of bag `i` at level `from`.
    pub fn ancestor(&self, from: usize, i: usize, to: usize) -> usize {
        debug_assert!(to >= from);
        i / self.params.rho.pow((to - from) as u32)
    }

    /// Level-`j` index of the bag whose native interval holds `p`.
    pub fn native_bag(&self, j: usize, p: PointId) -> usize {
        let r = self.rank[p];
        let lvl = self.level(j);
        lvl.partition_point(|b| b.native.1 <= r).min(lvl.len() - 1)
    }

    fn sort_by_rank(&self, v: &mut [PointId]) {
        v.sort_unstable_by_key(|&p| self.rank[p]);
    }

    pub fn dump(&self) -> ForestDump {
        let mut levels = Vec::new();
        for (li, lvl) in self.levels.iter().enumerate() {
            let mut bags = Vec::new();
            for b in lvl.iter().filter(|b| !b.is_empty() || b.zombie || b.incubator) {
                bags.push(BagDump {
                    level: li + 1,
                    interval: b.index,
                    n: b.native_len(),
                    b: b.base.len(),
                    k: b.kernel.len(),
                    q: b.points.len(),
                    label: b.label(),
                    rep: b.rep,
                });
            }
            let empty = lvl.iter().filter(|b| b.is_empty()).count();
            levels.push(LevelDump { level: li + 1, bag_count: lvl.len(), empty, bags });
        }
        ForestDump { levels }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BagDump {
    pub level: usize,
    pub interval: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    pub label: Label,
    pub rep: Option<PointId>,
}

/// Debug dump: non-empty or labeled bags per level, plus empty-bag counts.
#[derive(Clone, Debug, Serialize)]
pub struct LevelDump {
    pub level: usize,
    pub bag_count: usize,
    pub empty: usize,
    pub bags: Vec<BagDump>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ForestDump {
    pub levels: Vec<LevelDump>,
}

/// Level-1 interval index of each path rank. Intervals are half-open except
/// the last, which also takes the right end of the path.
fn level1_index<S: Scalar>(path: &HamiltonianPath<S>, params: &LevelParams<S>) -> Vec<usize> {
    let n1 = params.n_j(1);
    let total = params.big_l.as_f64();
    let scale = (params.c * params.n) as f64;
    path.prefix()
        .iter()
        .map(|x| {
            if total == 0.0 {
                return 0;
            }
            ((x.as_f64() / total * scale).floor() as usize).min(n1 - 1)
        })
        .collect()
}

/// Materializes every bag of every level. Level-1 bags get `B = K = Q = N`;
/// higher levels are filled by [`merge_level`].
pub fn build_interval_forest<S: Scalar>(path: &HamiltonianPath<S>, params: &LevelParams<S>) -> BagForest<S> {
    let n = path.len();
    let ell = params.ell;
    let idx1 = level1_index(path, params);
    let mut levels = Vec::with_capacity(ell);
    for j in 1..=ell {
        let nj = params.n_j(j);
        let div = params.rho.pow((j - 1) as u32);
        let mut bags: Vec<Bag> = (0..nj)
            .map(|i| Bag {
                level: j,
                index: i,
                native: (0, 0),
                parent: (j < ell).then_some(i / params.rho),
                children: if j == 1 { (0, 0) } else { (i * params.rho, ((i + 1) * params.rho).min(params.n_j(j - 1))) },
                ..Bag::default()
            })
            .collect();
        // Native ranges: ranks are sorted by interval, so each bag's ranks are contiguous.
        let mut start = 0;
        while start < n {
            let b = idx1[start] / div;
            let mut end = start;
            while end < n && idx1[end] / div == b {
                end += 1;
            }
            bags[b].native = (start, end);
            start = end;
        }
        let mut fill = 0;
        for bag in &mut bags {
            if bag.native == (0, 0) {
                bag.native = (fill, fill);
            }
            fill = bag.native.1;
        }
        if j == 1 {
            for bag in &mut bags {
                let pts: Vec<PointId> = path.order()[bag.native.0..bag.native.1].to_vec();
                bag.base = pts.clone();
                bag.kernel = pts.clone();
                bag.points = pts;
            }
        }
        levels.push(bags);
    }
    let mut rank = vec![0; path.order().iter().copied().max().map_or(0, |m| m + 1)];
    for (k, &p) in path.order().iter().enumerate() {
        rank[p] = k;
    }
    let mut forest = BagForest {
        params: params.clone(),
        levels,
        base_levels: vec![Vec::new(); ell],
        rank,
        order: path.order().to_vec(),
    };
    if ell >= 1 {
        forest.base_levels[0] = build_base_edges(&forest, 1);
    }
    forest
}

/// Computes the level-`j+1` sets from level `j` and the zombies that
/// disappear at level `j`, given as `(zombie index at j, adopter index at j+1)`.
pub fn merge_level<S: Scalar>(forest: &mut BagForest<S>, j: usize, joins: &[(usize, usize)]) -> Result<()> {
    let ell = forest.params.ell;
    let up = j + 1;
    let mut joined_into: Vec<Vec<usize>> = vec![Vec::new(); forest.level(up).len()];
    let mut leaving = vec![false; forest.level(j).len()];
    for &(z, a) in joins {
        let zb = forest.bag(j, z);
        if zb.parent == Some(a) {
            return Err(Error::AdoptionByParent { level: j, bag: z });
        }
        if zb.is_empty() {
            return Err(Error::InvariantViolation(format!("empty bag {z} at level {j} scheduled to join")));
        }
        leaving[z] = true;
        joined_into[a].push(z);
        let zb = forest.bag_mut(j, z);
        zb.step_parent = Some(a);
        zb.disappearing = true;
    }
    for (i, mut step) in std::mem::take(&mut joined_into).into_iter().enumerate() {
        let (c0, c1) = forest.bag(up, i).children;
        let surviving: Vec<usize> = (c0..c1).filter(|&c| !leaving[c] && !forest.bag(j, c).is_empty()).collect();
        step.sort_unstable();
        let lower = forest.level(j);
        let base: Vec<PointId> = surviving.iter().flat_map(|&c| lower[c].base.iter().copied()).collect();
        let mut points: Vec<PointId> =
            surviving.iter().chain(&step).flat_map(|&c| lower[c].points.iter().copied()).collect();
        let mut kernel: Vec<PointId> = surviving.iter().flat_map(|&c| lower[c].kernel.iter().copied()).collect();
        if kernel.len() < ell {
            kernel.extend(step.iter().flat_map(|&c| lower[c].kernel.iter().copied()));
        }
        forest.sort_by_rank(&mut points);
        forest.sort_by_rank(&mut kernel);
        let bag = forest.bag_mut(up, i);
        bag.base = base;
        bag.points = points;
        bag.kernel = kernel;
        bag.surviving = surviving;
        bag.step_children = step;
    }
    forest.base_levels[up - 1] = build_base_edges(forest, up);
    Ok(())
}

/// `B_j`: consecutive pairs inside each level-1 bag, or at higher levels the
/// rightmost base point of each surviving child joined to the leftmost base
/// point of the next surviving child.
pub fn build_base_edges<S: Scalar>(forest: &BagForest<S>, j: usize) -> Vec<(PointId, PointId)> {
    let mut out = Vec::new();
    if j == 1 {
        for bag in forest.level(1) {
            out.extend(bag.base.windows(2).map(|w| (w[0], w[1])));
        }
        return out;
    }
    let lower = forest.level(j - 1);
    for bag in forest.level(j) {
        for w in bag.surviving.windows(2) {
            let y = *lower[w[0]].base.last().expect("surviving child has base points");
            let x = lower[w[1]].base[0];
            out.push((y, x));
        }
    }
    out
}

/// `B = ∪_j B_j` as a graph weighted by the metric.
pub fn base_edge_set<S: Scalar>(forest: &BagForest<S>, m: &MetricSpace<S>) -> SpannerGraph<S> {
    let mut g = SpannerGraph::new(m.n());
    for lvl in &forest.base_levels {
        for &(u, v) in lvl {
            g.add_edge(u, v, m.dist(u, v));
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{generate_points, PointKind};

    #[test]
    fn parameter_formulas() {
        let p = LevelParams::<f64>::new(1024, 2, 0.5, 1.0, 100.0, Mode::Strict, 8);
        assert_eq!(p.c, 16);
        assert_eq!(p.gamma, 40);
        assert_eq!((p.ell, p.kappa, p.eta), (10, 0, 3));
        for j in 2..=p.ell {
            assert!((p.tau(j) / p.tau(j - 1) - 2.0).abs() < 1e-12);
            assert!((p.mu(j) / p.mu(j - 1) - 2.0).abs() < 1e-12);
        }
        let closed = 2.0 * (100.0 / 1024.0) * 1.0 * (1.0 + 1.0 / 16.0) * 8.0;
        assert!((p.tau(3) - closed).abs() < 1e-12);
        let alt = 2.0 * p.mu(3) * 2.0 * 1.0 * 17.0;
        assert!((p.tau(3) - alt).abs() < 1e-12);
        assert_eq!(p.n_j(1), 16 * 1024);
        assert_eq!(p.n_j(2), p.n_j(1).div_ceil(2));
        let e = LevelParams::<f64>::new(1024, 2, 0.5, 1.05, 1.0, Mode::Explore { gamma: 3 }, 8);
        assert_eq!((e.c, e.gamma, e.kappa, e.eta), (17, 3, 1, 5));
        assert!(e.part2_runs(7) && !e.part2_runs(8));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(Mode::parse("strict").unwrap(), Mode::Strict);
        assert_eq!(Mode::parse("explore:4").unwrap(), Mode::Explore { gamma: 4 });
        assert!(Mode::parse("explore:1").is_err());
    }

    #[test]
    fn intervals_partition_each_level() {
        let m = generate_points::<f64>(PointKind::Uniform, 300, 2, 2).unwrap();
        let path = HamiltonianPath::from_order((0..300).collect(), &m);
        let params = LevelParams::new(300, 3, 0.5, 1.1, path.total(), Mode::Strict, 8);
        let f = build_interval_forest(&path, &params);
        assert_eq!(f.ell(), params.ell);
        for j in 1..=f.ell() {
            let lvl = f.level(j);
            assert_eq!(lvl.len(), params.n_j(j));
            let covered: usize = lvl.iter().map(Bag::native_len).sum();
            assert_eq!(covered, 300);
            for w in lvl.windows(2) {
                assert_eq!(w[0].native.1, w[1].native.0);
            }
            if j > 1 {
                for b in lvl {
                    let (c0, c1) = b.children;
                    assert!(c1 - c0 <= 3 && c1 > c0);
                    assert_eq!(f.bag(j - 1, c0).native.0, b.native.0);
                    assert_eq!(f.bag(j - 1, c1 - 1).native.1, b.native.1);
                }
            }
        }
    }

    #[test]
    fn single_point_forest() {
        let m = generate_points::<f64>(PointKind::Uniform, 1, 2, 2).unwrap();
        let path = HamiltonianPath::from_order(vec![0], &m);
        let params = LevelParams::new(1, 2, 0.5, 1.0, path.total(), Mode::Strict, 8);
        assert_eq!(params.ell, 0);
        assert_eq!(build_interval_forest(&path, &params).ell(), 0);
    }
    /// Six level-1 pairs under three level-2 parents; v4 joins u1 and v3 joins u3.
    fn fig9() -> BagForest<f64> {
        let m = generate_points::<f64>(PointKind::Line, 12, 1, 0).unwrap();
        let path = HamiltonianPath::from_order((0..12).collect(), &m);
        let mut params = LevelParams::new(12, 2, 0.5, 1.0, path.total(), Mode::Explore { gamma: 2 }, 8);
        params.ell = 2;
        let level1 = (0..6)
            .map(|i| {
                let pts = vec![2 * i, 2 * i + 1];
                Bag {
                    level: 1,
                    index: i,
                    native: (2 * i, 2 * i + 2),
                    base: pts.clone(),
                    kernel: pts.clone(),
                    points: pts,
                    parent: Some(i / 2),
                    ..Bag::default()
                }
            })
            .collect::<Vec<_>>();
        let level2 = (0..3)
            .map(|i| Bag {
                level: 2,
                index: i,
                native: (4 * i, 4 * i + 4),
                children: (2 * i, 2 * i + 2),
                ..Bag::default()
            })
            .collect();
        let mut f = BagForest {
            params,
            levels: vec![level1, level2],
            base_levels: vec![Vec::new(); 2],
            rank: (0..12).collect(),
            order: (0..12).collect(),
        };
        f.base_levels[0] = build_base_edges(&f, 1);
        f
    }

    #[test]
    fn figure_nine_merge_and_base_edges() {
        let mut f = fig9();
        assert_eq!(f.base_levels[0].len(), 6);
        merge_level(&mut f, 1, &[(3, 0), (2, 2)]).unwrap();
        assert_eq!(f.base_levels[1], vec![(1, 2), (9, 10)]);
        assert!(f.bag(2, 1).is_empty());
        assert_eq!(f.bag(2, 0).step_children, vec![3]);
        assert_eq!(f.bag(2, 2).step_children, vec![2]);
        assert_eq!(f.bag(2, 0).points, vec![0, 1, 2, 3, 6, 7]);
        assert_eq!(f.bag(2, 0).base, vec![0, 1, 2, 3]);
        let m = generate_points::<f64>(PointKind::Line, 12, 1, 0).unwrap();
        let b = base_edge_set(&f, &m);
        assert_eq!(b.edge_count(), 8);
        assert!(b.max_degree() <= 2);
    }

    #[test]
    fn adoption_by_parent_is_rejected() {
        let mut f = fig9();
        assert!(matches!(merge_level(&mut f, 1, &[(3, 1)]), Err(Error::AdoptionByParent { level: 1, bag: 3 })));
    }

    #[test]
    fn small_bags_keep_full_kernel() {
        let mut f = fig9();
        f.params.ell = 5;
        merge_level(&mut f, 1, &[]).unwrap();
        for b in f.level(2) {
            assert_eq!(b.kernel, b.points);
        }
    }
}
