//! Finite metric spaces: Euclidean point sets and explicit distance matrices.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::scalar::{total_cmp, Scalar};

/// Dense index of a point, in `[0, n)`.
pub type PointId = usize;

const TRIANGLE_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum MetricKind<S> {
    /// Row-major coordinates, `dim` values per point.
    Euclidean { dim: usize, coords: Vec<S> },
    /// Row-major `n × n` matrix.
    Matrix { d: Vec<S> },
}

/// An immutable, validated finite metric.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace<S> {
    n: usize,
    kind: MetricKind<S>,
}

impl<S: Scalar> MetricSpace<S> {
    /// Builds a Euclidean space from row-major coordinates.
    pub fn euclidean(dim: usize, coords: Vec<S>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidSpec(format!("{} coordinates do not split into rows of {dim}", coords.len())));
        }
        if let Some(i) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::Parse { line: i / dim + 1, msg: "non-finite coordinate".into() });
        }
        let n = coords.len() / dim;
        let space = Self { n, kind: MetricKind::Euclidean { dim, coords } };
        space.reject_duplicate_rows()?;
        Ok(space)
    }

    pub fn from_points(points: &[Vec<S>]) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {dim} coordinates, found {}", p.len()),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::euclidean(dim, coords)
    }

    /// Builds an explicit-matrix space, validating symmetry, positivity and
    /// the triangle inequality.
    pub fn from_matrix(n: usize, d: Vec<S>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::InvalidSpec(format!("matrix has {} entries, expected {}", d.len(), n * n)));
        }
        for i in 0..n {
            if d[i * n + i] != S::zero() {
                return Err(Error::Parse { line: i + 2, msg: "non-zero diagonal entry".into() });
            }
            for j in 0..n {
                let x = d[i * n + j];
                if !x.is_finite() || x < S::zero() {
                    return Err(Error::Parse { line: i + 2, msg: format!("invalid entry {x}") });
                }
                if x != d[j * n + i] {
                    return Err(Error::SymmetryViolation { i, j });
                }
                if i < j && x == S::zero() {
                    return Err(Error::DuplicatePoint { first: i, second: j });
                }
            }
        }
        let tol = S::one() + S::lit(TRIANGLE_REL_TOL);
        for a in 0..n {
            for b in 0..n {
                let ab = d[a * n + b];
                for c in 0..n {
                    if d[a * n + c] > (ab + d[b * n + c]) * tol {
                        return Err(Error::TriangleViolation { a, b, c });
                    }
                }
            }
        }
        Ok(Self { n, kind: MetricKind::Matrix { d } })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn kind(&self) -> &MetricKind<S> {
        &self.kind
    }

    /// Euclidean dimension, or `None` for matrix metrics.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            MetricKind::Euclidean { dim, .. } => Some(*dim),
            MetricKind::Matrix { .. } => None,
        }
    }

    pub fn coords(&self, p: PointId) -> Option<&[S]> {
        match &self.kind {
            MetricKind::Euclidean { dim, coords } => Some(&coords[p * dim..(p + 1) * dim]),
            MetricKind::Matrix { .. } => None,
        }
    }

    /// δ(p, q) without bounds checking beyond the slice index.
    #[inline]
    pub fn dist(&self, p: PointId, q: PointId) -> S {
        match &self.kind {
            MetricKind::Euclidean { dim, coords } => {
                if p == q {
                    return S::zero();
                }
                let a = &coords[p * dim..(p + 1) * dim];
                let b = &coords[q * dim..(q + 1) * dim];
                let mut s = S::zero();
                for k in 0..*dim {
                    let t = a[k] - b[k];
                    s = s + t * t;
                }
                s.sqrt()
            }
            MetricKind::Matrix { d } => d[p * self.n + q],
        }
    }

    /// Checked δ(p, q).
    pub fn distance(&self, p: PointId, q: PointId) -> Result<S> {
        for id in [p, q] {
            if id >= self.n {
                return Err(Error::OutOfRange { id, n: self.n });
            }
        }
        Ok(self.dist(p, q))
    }

    /// The sub-metric induced by `ids`; point `i` of the result is `ids[i]`.
    pub fn subspace(&self, ids: &[PointId]) -> Result<Self> {
        if let Some(&id) = ids.iter().find(|&&id| id >= self.n) {
            return Err(Error::OutOfRange { id, n: self.n });
        }
        match &self.kind {
            MetricKind::Euclidean { dim, coords } => {
                let mut sub = Vec::with_capacity(ids.len() * dim);
                for &p in ids {
                    sub.extend_from_slice(&coords[p * dim..(p + 1) * dim]);
                }
                Self::euclidean(*dim, sub)
            }
            MetricKind::Matrix { .. } => {
                let k = ids.len();
                let mut d = vec![S::zero(); k * k];
                for (i, &p) in ids.iter().enumerate() {
                    for (j, &q) in ids.iter().enumerate() {
                        d[i * k + j] = self.dist(p, q);
                    }
                }
                Self::from_matrix(k, d)
            }
        }
    }

    fn reject_duplicate_rows(&self) -> Result<()> {
        let MetricKind::Euclidean { dim, coords } = &self.kind else {
            return Ok(());
        };
        let row = |p: usize| &coords[p * dim..(p + 1) * dim];
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| {
            row(a)
                .iter()
                .zip(row(b))
                .map(|(x, y)| total_cmp(x, y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        for w in order.windows(2) {
            if row(w[0]) == row(w[1]) {
                return Err(Error::DuplicatePoint { first: w[0].min(w[1]), second: w[0].max(w[1]) });
            }
        }
        Ok(())
    }

    /// Serializes to the format matching the kind: CSV rows or a matrix file.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.kind {
            MetricKind::Euclidean { dim, coords } => {
                for row in coords.chunks(*dim) {
                    for (k, x) in row.iter().enumerate() {
                        if k > 0 {
                            out.push(',');
                        }
                        let _ = write!(out, "{x}");
                    }
                    out.push('\n');
                }
            }
            MetricKind::Matrix { d } => {
                let _ = writeln!(out, "{}", self.n);
                for row in d.chunks(self.n.max(1)) {
                    let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(out, "{}", line.join(" "));
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_scalar<S: Scalar>(tok: &str, line: usize) -> Result<S> {
    tok.trim().parse::<S>().map_err(|_| Error::Parse { line, msg: format!("cannot parse {tok:?} as a number") })
}

/// Parses the Euclidean CSV format: one point per line, no header.
pub fn parse_csv<S: Scalar>(text: &str) -> Result<MetricSpace<S>> {
    let mut rows: Vec<Vec<S>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line.split(',').map(|t| parse_scalar(t, i + 1)).collect::<Result<Vec<S>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {} coordinates, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 1, msg: "no points".into() });
    }
    MetricSpace::from_points(&rows)
}

/// Parses the matrix format: first line `n`, then `n` rows of `n` reals.
pub fn parse_matrix<S: Scalar>(text: &str) -> Result<MetricSpace<S>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let n: usize =
        first.trim().parse().map_err(|_| Error::Parse { line: 1, msg: "first line must be the point count".into() })?;
    let mut d = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (i, line) in lines {
        let row = line.split_whitespace().map(|t| parse_scalar(t, i + 1)).collect::<Result<Vec<S>>>()?;
        if row.len() != n {
            return Err(Error::Parse { line: i + 1, msg: format!("expected {n} entries, found {}", row.len()) });
        }
        d.extend(row);
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse { line: rows + 2, msg: format!("expected {n} rows, found {rows}") });
    }
    MetricSpace::from_matrix(n, d)
}

fn looks_like_matrix(text: &str) -> bool {
    if text.contains(',') {
        return false;
    }
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let Some(Ok(n)) = lines.next().map(|l| l.trim().parse::<usize>()) else {
        return false;
    };
    let rest: Vec<&str> = lines.collect();
    rest.len() == n && rest.iter().all(|l| l.split_whitespace().count() == n)
}

/// Point-set generators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointKind {
    Uniform,
    Clustered { k: usize },
    Grid,
    Line,
}

/// A parsed generator specification such as `uniform:n=256,dim=2,seed=7`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: PointKind,
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
}

impl GenSpec {
    /// Accepts both `kind:key=val,...` and `kind,key=val,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidSpec(format!("{spec:?}: {m}"));
        let (kind, rest) = match spec.find([':', ',']) {
            Some(i) => (&spec[..i], &spec[i + 1..]),
            None => (spec, ""),
        };
        let mut kv = HashMap::new();
        for part in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let v: u64 = v.trim().parse().map_err(|_| bad("values must be non-negative integers"))?;
            kv.insert(k.trim().to_string(), v);
        }
        let n = *kv.get("n").ok_or_else(|| bad("missing n"))? as usize;
        let dim = kv.get("dim").copied().unwrap_or(2) as usize;
        let seed = kv.get("seed").copied().unwrap_or(0);
        let kind = match kind.trim() {
            "uniform" => PointKind::Uniform,
            "clustered" => PointKind::Clustered { k: kv.get("k").copied().unwrap_or(8) as usize },
            "grid" => PointKind::Grid,
            "line" => PointKind::Line,
            other => return Err(bad(&format!("unknown generator {other:?}"))),
        };
        Ok(Self { kind, n, dim, seed })
    }
}

/// Deterministic point generation. Uniform and clustered points lie in the
/// unit cube; grid points use unit spacing; line points sit on axis 0.
pub fn generate_points<S: Scalar>(kind: PointKind, n: usize, dim: usize, seed: u64) -> Result<MetricSpace<S>> {
    if n == 0 || dim == 0 {
        return Err(Error::InvalidSpec("n and dim must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords: Vec<f64> = Vec::with_capacity(n * dim);
    match kind {
        PointKind::Uniform => {
            coords.extend((0..n * dim).map(|_| rng.random::<f64>()));
        }
        PointKind::Clustered { k } => {
            let k = k.max(1);
            let centers: Vec<f64> = (0..k * dim).map(|_| rng.random::<f64>()).collect();
            let noise = Normal::new(0.0, 0.03).expect("valid normal");
            for _ in 0..n {
                let c = rng.random_range(0..k);
                coords.extend((0..dim).map(|a| centers[c * dim + a] + noise.sample(&mut rng)));
            }
        }
        PointKind::Grid => {
            let mut side = 1usize;
            while side.pow(dim as u32) < n {
                side += 1;
            }
            for i in 0..n {
                let mut rest = i;
                let mut row = vec![0.0; dim];
                for slot in row.iter_mut().rev() {
                    *slot = (rest % side) as f64;
                    rest /= side;
                }
                coords.extend(row);
            }
        }
        PointKind::Line => {
            for i in 0..n {
                coords.push(i as f64);
                coords.extend(std::iter::repeat_n(0.0, dim - 1));
            }
        }
    }
    let mut coords: Vec<S> = coords.into_iter().map(S::lit).collect();
    if matches!(kind, PointKind::Uniform | PointKind::Clustered { .. }) {
        resample_duplicates(&mut coords, dim, &mut rng);
    }
    MetricSpace::euclidean(dim, coords)
}

/// Random coordinates may collide after rounding to `S`; later copies are
/// redrawn until every row is distinct.
fn resample_duplicates<S: Scalar>(coords: &mut [S], dim: usize, rng: &mut ChaCha8Rng) {
    let key = |row: &[S]| row.iter().map(|x| x.as_f64().to_bits()).collect::<Vec<u64>>();
    let mut seen = std::collections::HashSet::new();
    for i in 0..coords.len() / dim {
        while !seen.insert(key(&coords[i * dim..(i + 1) * dim])) {
            for x in &mut coords[i * dim..(i + 1) * dim] {
                *x = S::lit(rng.random::<f64>());
            }
        }
    }
}

/// Loads a metric from a generator spec (`gen:kind,...` or `kind:...`) or a file path.
pub fn load_metric<S: Scalar>(source: &str) -> Result<MetricSpace<S>> {
    let spec = source.strip_prefix("gen:");
    let is_gen = spec.is_some()
        || (!Path::new(source).exists()
            && ["uniform", "clustered", "grid", "line"].iter().any(|k| source.starts_with(k)));
    if is_gen {
        let g = GenSpec::parse(spec.unwrap_or(source))?;
        return generate_points(g.kind, g.n, g.dim, g.seed);
    }
    let text = std::fs::read_to_string(source)?;
    let ext = Path::new(source).extension().and_then(|e| e.to_str()).unwrap_or("");
    if matches!(ext, "mat" | "matrix") || looks_like_matrix(&text) {
        parse_matrix(&text)
    } else {
        parse_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pythagorean_distance() {
        let m = MetricSpace::<f64>::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.dist(0, 1), 5.0);
        assert_eq!(m.dist(1, 1), 0.0);
        assert!(matches!(m.distance(0, 2), Err(Error::OutOfRange { id: 2, n: 2 })));
    }

    #[test]
    fn matrix_symmetry_and_lookup() {
        let d = vec![0.0, 5.0, 6.0, 5.0, 0.0, 7.0, 6.0, 7.0, 0.0];
        let m = MetricSpace::<f64>::from_matrix(3, d).unwrap();
        assert_eq!(m.dist(1, 2), 7.0);
        assert_eq!(m.dist(2, 1), 7.0);
    }

    #[test]
    fn matrix_validation_errors() {
        let asym = "3\n0 1 1\n2 0 1\n1 1 0\n";
        assert!(matches!(parse_matrix::<f64>(asym), Err(Error::SymmetryViolation { .. })));
        let tri = "3\n0 1 5\n1 0 1\n5 1 0\n";
        assert!(matches!(parse_matrix::<f64>(tri), Err(Error::TriangleViolation { .. })));
        let dup = "2\n0 0\n0 0\n";
        assert!(matches!(parse_matrix::<f64>(dup), Err(Error::DuplicatePoint { .. })));
    }

    #[test]
    fn csv_parsing() {
        let m = parse_csv::<f64>("0,0\n1,0\n0,1").unwrap();
        assert_eq!((m.n(), m.dim()), (3, Some(2)));
        assert!(matches!(parse_csv::<f64>("0,0\n1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_csv::<f64>("0,0\n0,0\n"), Err(Error::DuplicatePoint { first: 0, second: 1 })));
        assert!(matches!(parse_csv::<f64>("0,x\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn generators() {
        let line = generate_points::<f64>(PointKind::Line, 4, 2, 0).unwrap();
        for i in 0..4 {
            assert_eq!(line.coords(i).unwrap(), &[i as f64, 0.0]);
        }
        let grid = generate_points::<f64>(PointKind::Grid, 9, 2, 0).unwrap();
        assert_eq!(grid.coords(8).unwrap(), &[2.0, 2.0]);
        assert_eq!(grid.coords(3).unwrap(), &[1.0, 0.0]);
        let a = load_metric::<f64>("uniform:n=256,dim=2,seed=7").unwrap();
        let b = load_metric::<f64>("gen:uniform,n=256,dim=2,seed=7").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n(), 256);
        for p in 0..a.n() {
            assert!(a.coords(p).unwrap().iter().all(|&x| (0.0..1.0).contains(&x)));
        }
        let c = generate_points::<f32>(PointKind::Clustered { k: 3 }, 500, 3, 1).unwrap();
        assert_eq!(c.n(), 500);
        assert!(GenSpec::parse("blob:n=3").is_err());
    }

    #[test]
    fn round_trip_both_formats() {
        let m = generate_points::<f64>(PointKind::Uniform, 40, 3, 11).unwrap();
        assert_eq!(parse_csv::<f64>(&m.to_text()).unwrap(), m);
        let ids: Vec<usize> = (0..10).collect();
        let sub = m.subspace(&ids).unwrap();
        let mut d = Vec::new();
        for p in 0..10 {
            for q in 0..10 {
                d.push(sub.dist(p, q));
            }
        }
        let mat = MetricSpace::from_matrix(10, d).unwrap();
        assert_eq!(parse_matrix::<f64>(&mat.to_text()).unwrap(), mat);
        assert!(looks_like_matrix(&mat.to_text()));
    }
}
