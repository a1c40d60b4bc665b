//! Connected segment networks: the admissible Dirichlet sets.

use std::collections::HashMap;

use super::domain::Domain;
use super::primitives::{closest_points, BoundingBox, Point, Segment, INCIDENCE_TOL};
use crate::error::{Error, Result};

/// Collinearity tolerance used when merging overlapping segments.
pub const COLLINEAR_TOL: f64 = 1e-9;

/// A planar segment graph. Vertices are points, edges are index pairs.
///
/// Geometric crossings between edges count as shared points, so the network
/// is connected whenever its union as a point set is.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaNetwork {
    vertices: Vec<Point>,
    edges: Vec<(usize, usize)>,
}

impl SigmaNetwork {
    pub fn new(vertices: Vec<Point>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidGeometry("network has no vertices".into()));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite vertex".into()));
        }
        for &(i, j) in &edges {
            if i >= vertices.len() || j >= vertices.len() {
                return Err(Error::InvalidGeometry(format!(
                    "edge ({i}, {j}) references a missing vertex"
                )));
            }
            if i == j {
                return Err(Error::InvalidGeometry(format!("edge ({i}, {j}) is a loop")));
            }
        }
        Ok(SigmaNetwork { vertices, edges })
    }

    /// The degenerate one-point continuum.
    pub fn point(p: Point) -> Self {
        SigmaNetwork {
            vertices: vec![p],
            edges: Vec::new(),
        }
    }

    /// Builds a network from raw segments, merging collinear overlaps so that
    /// every geometric piece is represented once. Zero-length segments become
    /// isolated vertices unless they lie on another segment.
    pub fn from_segments(segments: &[Segment]) -> Result<Self> {
        let (merged, points) = merge_segments(segments);
        let mut builder = VertexPool::default();
        let mut edges = Vec::with_capacity(merged.len());
        for s in &merged {
            let i = builder.insert(s.a);
            let j = builder.insert(s.b);
            if i != j {
                edges.push((i, j));
            }
        }
        for p in points {
            if !merged.iter().any(|s| s.distance_to(p) <= INCIDENCE_TOL) {
                builder.insert(p);
            }
        }
        SigmaNetwork::new(builder.points, edges)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.edges
            .iter()
            .map(|&(i, j)| Segment::new(self.vertices[i], self.vertices[j]))
            .collect()
    }

    /// Segments plus degenerate segments for isolated vertices; this is the
    /// full point set of the network.
    pub fn point_set(&self) -> Vec<Segment> {
        let mut out = self.segments();
        let mut used = vec![false; self.vertices.len()];
        for &(i, j) in &self.edges {
            used[i] = true;
            used[j] = true;
        }
        for (k, p) in self.vertices.iter().enumerate() {
            if !used[k] {
                out.push(Segment::new(*p, *p));
            }
        }
        out
    }

    /// One-dimensional Hausdorff measure: total edge length.
    pub fn length(&self) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j)| self.vertices[i].dist(self.vertices[j]))
            .sum()
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::from_points(self.vertices.iter().copied())
    }

    /// Connected-component label for every item of [`Self::point_set`].
    pub fn component_labels(&self) -> Vec<usize> {
        let items = self.point_set();
        let mut uf = UnionFind::new(items.len());
        // Shared vertex indices.
        let mut first_edge_at: HashMap<usize, usize> = HashMap::new();
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            for v in [i, j] {
                match first_edge_at.get(&v) {
                    Some(&e) => uf.union(e, k),
                    None => {
                        first_edge_at.insert(v, k);
                    }
                }
            }
        }
        // Geometric contacts, found through a uniform bucket grid.
        for (a, b) in candidate_pairs(&items, INCIDENCE_TOL) {
            if uf.find(a) != uf.find(b) && items[a].intersects(&items[b], INCIDENCE_TOL) {
                uf.union(a, b);
            }
        }
        let mut relabel = HashMap::new();
        (0..items.len())
            .map(|k| {
                let root = uf.find(k);
                let next = relabel.len();
                *relabel.entry(root).or_insert(next)
            })
            .collect()
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    pub fn lies_within(&self, domain: &Domain) -> bool {
        self.vertices.iter().all(|p| domain.contains(*p))
            && self.segments().iter().all(|s| {
                let clipped: f64 = domain.clip_segment(s).iter().map(|c| c.length()).sum();
                (clipped - s.length()).abs() <= 1e-9 * s.length().max(1.0)
            })
    }

    /// Checks membership in the admissible class for budget `budget`.
    pub fn check_admissible(&self, domain: &Domain, budget: f64) -> Result<()> {
        if !self.is_connected() {
            return Err(Error::InvalidGeometry("network is not connected".into()));
        }
        if !self.lies_within(domain) {
            return Err(Error::InvalidGeometry(
                "network leaves the closed domain".into(),
            ));
        }
        let len = self.length();
        if len > budget * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "network length {len} exceeds the budget {budget}"
            )));
        }
        Ok(())
    }

    /// Distance from `p` to the network.
    pub fn distance(&self, p: Point) -> f64 {
        self.point_set()
            .iter()
            .map(|s| s.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Length of the union of the network with additional segments (for
    /// instance the domain boundary); overlapping pieces count once.
    pub fn union_length_with(&self, extra: &[Segment]) -> f64 {
        let mut all = self.segments();
        all.extend_from_slice(extra);
        let (merged, _) = merge_segments(&all);
        merged.iter().map(|s| s.length()).sum()
    }

    /// Applies `f` to every vertex.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> SigmaNetwork {
        SigmaNetwork {
            vertices: self.vertices.iter().map(|p| f(*p)).collect(),
            edges: self.edges.clone(),
        }
    }

    /// Joins the connected components with the shortest links that stay in
    /// the closed domain (Kruskal on inter-item distances).
    pub fn connect_components(&self, domain: &Domain) -> Result<SigmaNetwork> {
        let items = self.point_set();
        let labels = self.component_labels();
        let ncomp = labels.iter().max().map_or(0, |m| m + 1);
        if ncomp <= 1 {
            return Ok(self.clone());
        }
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..items.len() {
            for b in (a + 1)..items.len() {
                if labels[a] != labels[b] {
                    let (p, q) = closest_points(&items[a], &items[b]);
                    candidates.push((p.dist(q), a, b));
                }
            }
        }
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut uf = UnionFind::new(ncomp);
        let mut links = Vec::new();
        let mut joined = 1;
        for (_, a, b) in candidates {
            let (ca, cb) = (labels[a], labels[b]);
            if uf.find(ca) == uf.find(cb) {
                continue;
            }
            let (p, q) = closest_points(&items[a], &items[b]);
            let link = Segment::new(p, q);
            let inside: f64 = domain.clip_segment(&link).iter().map(|s| s.length()).sum();
            if (inside - link.length()).abs() > 1e-9 {
                continue;
            }
            uf.union(ca, cb);
            links.push(link);
            joined += 1;
            if joined == ncomp {
                break;
            }
        }
        if joined < ncomp {
            return Err(Error::Infeasible(
                "components cannot be linked inside the domain".into(),
            ));
        }
        let mut all = items;
        all.extend(links);
        SigmaNetwork::from_segments(&all)
    }
}

/// Deduplicates vertices that coincide up to rounding.
#[derive(Default)]
struct VertexPool {
    points: Vec<Point>,
    index: HashMap<(i64, i64), usize>,
}

impl VertexPool {
    const SCALE: f64 = 1e10;

    fn key(p: Point) -> (i64, i64) {
        ((p.x * Self::SCALE).round() as i64, (p.y * Self::SCALE).round() as i64)
    }

    fn insert(&mut self, p: Point) -> usize {
        let (kx, ky) = Self::key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(&i) = self.index.get(&(kx + dx, ky + dy)) {
                    if self.points[i].dist(p) <= 1e-10 {
                        return i;
                    }
                }
            }
        }
        let i = self.points.len();
        self.points.push(p);
        self.index.insert((kx, ky), i);
        i
    }
}

/// Merges collinear overlapping segments. Returns the merged segments and
/// the zero-length inputs (points).
pub fn merge_segments(segments: &[Segment]) -> (Vec<Segment>, Vec<Point>) {
    struct Keyed {
        theta: f64,
        offset: f64,
        dir: Point,
        seg: Segment,
    }
    let mut points = Vec::new();
    let mut keyed = Vec::with_capacity(segments.len());
    for s in segments {
        let len = s.length();
        if len <= INCIDENCE_TOL {
            points.push(s.a);
            continue;
        }
        let mut dir = s.direction() * (1.0 / len);
        if dir.x < 0.0 || (dir.x == 0.0 && dir.y < 0.0) {
            dir = -dir;
        }
        let mut theta = dir.y.atan2(dir.x);
        // Fold nearly-vertical lines onto the upward direction.
        if theta < -std::f64::consts::FRAC_PI_2 + COLLINEAR_TOL {
            dir = -dir;
            theta = dir.y.atan2(dir.x);
        }
        let offset = dir.perp().dot(s.a);
        keyed.push(Keyed {
            theta,
            offset,
            dir,
            seg: *s,
        });
    }
    keyed.sort_by(|a, b| a.theta.total_cmp(&b.theta));

    let mut merged = Vec::new();
    let mut start = 0;
    while start < keyed.len() {
        let mut end = start + 1;
        while end < keyed.len() && keyed[end].theta - keyed[end - 1].theta <= COLLINEAR_TOL {
            end += 1;
        }
        let group = &mut keyed[start..end];
        group.sort_by(|a, b| a.offset.total_cmp(&b.offset));
        let mut s0 = 0;
        while s0 < group.len() {
            let mut s1 = s0 + 1;
            while s1 < group.len() && group[s1].offset - group[s1 - 1].offset <= COLLINEAR_TOL {
                s1 += 1;
            }
            let line = &group[s0..s1];
            let dir = line[0].dir;
            let mut intervals: Vec<(f64, Point, f64, Point)> = line
                .iter()
                .map(|k| {
                    let (ta, tb) = (dir.dot(k.seg.a), dir.dot(k.seg.b));
                    if ta <= tb {
                        (ta, k.seg.a, tb, k.seg.b)
                    } else {
                        (tb, k.seg.b, ta, k.seg.a)
                    }
                })
                .collect();
            intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut cur = intervals[0];
            for iv in &intervals[1..] {
                if iv.0 <= cur.2 + INCIDENCE_TOL {
                    if iv.2 > cur.2 {
                        cur.2 = iv.2;
                        cur.3 = iv.3;
                    }
                } else {
                    merged.push(Segment::new(cur.1, cur.3));
                    cur = *iv;
                }
            }
            merged.push(Segment::new(cur.1, cur.3));
            s0 = s1;
        }
        start = end;
    }
    (merged, points)
}

/// Pairs of items whose expanded bounding boxes share a bucket.
fn candidate_pairs(items: &[Segment], tol: f64) -> Vec<(usize, usize)> {
    let n = items.len();
    if n < 2 {
        return Vec::new();
    }
    if n <= 32 {
        return (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
            .collect();
    }
    let bbox = BoundingBox::from_points(items.iter().flat_map(|s| [s.a, s.b])).expand(tol);
    let side = (n as f64).sqrt().ceil();
    let cell = (bbox.width().max(bbox.height()) / side).max(1e-9);
    let nx = ((bbox.width() / cell).ceil() as usize).max(1);
    let ny = ((bbox.height() / cell).ceil() as usize).max(1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
    let idx = |v: f64, lo: f64, m: usize| (((v - lo) / cell).floor().max(0.0) as usize).min(m - 1);
    for (k, s) in items.iter().enumerate() {
        let b = s.bbox().expand(tol);
        for ix in idx(b.min.x, bbox.min.x, nx)..=idx(b.max.x, bbox.min.x, nx) {
            for iy in idx(b.min.y, bbox.min.y, ny)..=idx(b.max.y, bbox.min.y, ny) {
                buckets[iy * nx + ix].push(k);
            }
        }
    }
    let mut pairs = Vec::new();
    for bucket in &buckets {
        for (i, &a) in bucket.iter().enumerate() {
            for &b in &bucket[i + 1..] {
                pairs.push((a.min(b), a.max(b)));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
