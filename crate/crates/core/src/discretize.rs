//! Uniform-grid discretization of a domain minus a network.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{segment_distance, Domain, Location, Point, Segment, SigmaNetwork};

/// Default width of the Dirichlet band, in units of `h`.
pub const DEFAULT_BAND_FACTOR: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum NodeClass {
    Interior = 0,
    Dirichlet = 1,
    Exterior = 2,
}

/// Node grid covering the domain with one extra layer on every side.
/// Node `(i, j)` sits at `origin + (i h, j h)` and has id `j * nx + i`.
#[derive(Clone, Debug)]
pub struct GridDiscretization {
    origin: Point,
    h: f64,
    nx: usize,
    ny: usize,
    classes: Vec<NodeClass>,
    unknown_of: Vec<usize>,
    nodes: Vec<usize>,
    warnings: Vec<String>,
}

/// Marker in [`GridDiscretization::unknown_index`] for non-interior nodes.
pub const NOT_UNKNOWN: usize = usize::MAX;

impl GridDiscretization {
    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    pub fn class(&self, i: usize, j: usize) -> NodeClass {
        self.classes[j * self.nx + i]
    }

    pub fn position(&self, id: usize) -> Point {
        let (i, j) = (id % self.nx, id / self.nx);
        Point::new(
            self.origin.x + i as f64 * self.h,
            self.origin.y + j as f64 * self.h,
        )
    }

    /// Unknown index of every node, [`NOT_UNKNOWN`] unless interior.
    pub fn unknown_index(&self) -> &[usize] {
        &self.unknown_of
    }

    /// Node ids of the unknowns, in unknown order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn unknown_count(&self) -> usize {
        self.nodes.len()
    }

    /// Resolution warnings collected during classification.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// The four neighbours of an interior node, as node ids. Interior nodes
    /// never touch the outer layer, so all four exist.
    pub fn neighbors(&self, id: usize) -> [usize; 4] {
        [id - 1, id + 1, id - self.nx, id + self.nx]
    }

    /// Spreads unknown values to a full node array, zero elsewhere.
    pub fn to_node_values(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.classes.len()];
        for (k, &id) in self.nodes.iter().enumerate() {
            out[id] = u[k];
        }
        out
    }

    /// 4-neighbour connected components of the interior nodes, each a list
    /// of node ids in increasing order; components are ordered by their
    /// smallest node.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.classes.len()];
        let mut comps = Vec::new();
        for &start in &self.nodes {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            while let Some(id) = queue.pop_front() {
                comp.push(id);
                for nb in self.neighbors(id) {
                    if !seen[nb] && self.classes[nb] == NodeClass::Interior {
                        seen[nb] = true;
                        queue.push_back(nb);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Raster dump of per-node values, bottom row first.
    pub fn format_raster(&self, values: &[f64]) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            self.ny, self.nx, self.h, self.origin.x, self.origin.y
        );
        for j in 0..self.ny {
            let row: Vec<String> = (0..self.nx)
                .map(|i| values[j * self.nx + i].to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Raster dump of the class codes (0 interior, 1 Dirichlet, 2 exterior).
    pub fn format_classes(&self) -> String {
        let codes: Vec<f64> = self.classes.iter().map(|c| *c as u8 as f64).collect();
        self.format_raster(&codes)
    }
}

/// Classifies the nodes of a grid with spacing `h` using the default band.
pub fn discretize(domain: &Domain, sigma: &SigmaNetwork, h: f64) -> Result<GridDiscretization> {
    discretize_with_band(domain, sigma, h, DEFAULT_BAND_FACTOR)
}

/// Nodes outside the closed domain are exterior; nodes within
/// `band_factor * h` of the network or the boundary are Dirichlet.
pub fn discretize_with_band(
    domain: &Domain,
    sigma: &SigmaNetwork,
    h: f64,
    band_factor: f64,
) -> Result<GridDiscretization> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("grid spacing must be positive, got {h}")));
    }
    if !(band_factor >= 0.0) {
        return Err(Error::InvalidInput("band factor must be non-negative".into()));
    }
    let bbox = domain.bbox();
    let origin = Point::new(bbox.min.x - h, bbox.min.y - h);
    let nx = (bbox.width() / h - 1e-9).ceil() as usize + 3;
    let ny = (bbox.height() / h - 1e-9).ceil() as usize + 3;
    if nx.saturating_mul(ny) > 50_000_000 {
        return Err(Error::InvalidInput(format!("grid of {nx}x{ny} nodes is too large")));
    }
    let mut classes = vec![NodeClass::Exterior; nx * ny];
    let pos = |i: usize, j: usize| Point::new(origin.x + i as f64 * h, origin.y + j as f64 * h);
    for j in 0..ny {
        for i in 0..nx {
            classes[j * nx + i] = match domain.locate(pos(i, j)) {
                Location::Inside => NodeClass::Interior,
                Location::OnBoundary => NodeClass::Dirichlet,
                Location::Outside => NodeClass::Exterior,
            };
        }
    }
    let band = band_factor * h;
    let reach = band * (1.0 + 1e-12);
    let mut marked = sigma.point_set();
    marked.extend(domain.boundary_segments());
    for s in &marked {
        let b = s.bbox().expand(reach);
        let i0 = ((b.min.x - origin.x) / h).floor().max(0.0) as usize;
        let j0 = ((b.min.y - origin.y) / h).floor().max(0.0) as usize;
        let i1 = (((b.max.x - origin.x) / h).ceil() as usize).min(nx - 1);
        let j1 = (((b.max.y - origin.y) / h).ceil() as usize).min(ny - 1);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let id = j * nx + i;
                if classes[id] == NodeClass::Interior && s.distance_to(pos(i, j)) <= reach {
                    classes[id] = NodeClass::Dirichlet;
                }
            }
        }
    }
    let mut unknown_of = vec![NOT_UNKNOWN; nx * ny];
    let mut nodes = Vec::new();
    for (id, c) in classes.iter().enumerate() {
        if *c == NodeClass::Interior {
            unknown_of[id] = nodes.len();
            nodes.push(id);
        }
    }
    if nodes.is_empty() {
        return Err(Error::ResolutionTooCoarse(format!(
            "no interior node survives at h = {h}"
        )));
    }
    Ok(GridDiscretization {
        origin,
        h,
        nx,
        ny,
        classes,
        unknown_of,
        nodes,
        warnings: proximity_warnings(&sigma.segments(), h),
    })
}

/// Warns about disjoint parallel network segments closer than `4h`.
fn proximity_warnings(segs: &[Segment], h: f64) -> Vec<String> {
    let mut out = Vec::new();
    let limit = 4.0 * h;
    for a in 0..segs.len() {
        let ba = segs[a].bbox().expand(limit);
        for b in (a + 1)..segs.len() {
            if !ba.overlaps(&segs[b].bbox()) {
                continue;
            }
            let (da, db) = (segs[a].direction(), segs[b].direction());
            let parallel = da.cross(db).abs() <= 1e-9 * da.norm() * db.norm();
            if !parallel {
                continue;
            }
            let d = segment_distance(&segs[a], &segs[b]);
            if d > 1e-12 && d < limit {
                out.push(format!(
                    "parallel segments {a} and {b} are {d:.3e} apart, closer than 4h = {limit:.3e}"
                ));
            }
        }
    }
    out
}

/// Grid estimate of `|{x in domain : d(x, sigma ∪ ∂domain) < t}|`: cell
/// centers inside the domain with distance below `t`, times `h^2`.
pub fn sublevel_area(domain: &Domain, sigma: &SigmaNetwork, t: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("grid spacing must be positive, got {h}")));
    }
    if !(t > 0.0) {
        return Ok(0.0);
    }
    let bbox = domain.bbox();
    if t >= bbox.diameter() {
        return Ok(domain.area());
    }
    let nx = (bbox.width() / h - 1e-9).ceil() as usize;
    let ny = (bbox.height() / h - 1e-9).ceil() as usize;
    let center = |i: usize, j: usize| {
        Point::new(bbox.min.x + (i as f64 + 0.5) * h, bbox.min.y + (j as f64 + 0.5) * h)
    };
    let mut near = vec![false; nx * ny];
    let mut marked = sigma.point_set();
    marked.extend(domain.boundary_segments());
    for s in &marked {
        let b = s.bbox().expand(t);
        let i0 = ((b.min.x - bbox.min.x) / h - 0.5).floor().max(0.0) as usize;
        let j0 = ((b.min.y - bbox.min.y) / h - 0.5).floor().max(0.0) as usize;
        let i1 = (((b.max.x - bbox.min.x) / h).ceil() as usize).min(nx.saturating_sub(1));
        let j1 = (((b.max.y - bbox.min.y) / h).ceil() as usize).min(ny.saturating_sub(1));
        for j in j0..=j1 {
            for i in i0..=i1 {
                let id = j * nx + i;
                if !near[id] && s.distance_to(center(i, j)) < t {
                    near[id] = true;
                }
            }
        }
    }
    let mut count = 0usize;
    for j in 0..ny {
        for i in 0..nx {
            if near[j * nx + i] && domain.locate(center(i, j)) == Location::Inside {
                count += 1;
            }
        }
    }
    Ok(count as f64 * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_comb;
    use approx::assert_relative_eq;

    #[test]
    fn center_point_removes_one_node() {
        let d = Domain::unit_square();
        let s = SigmaNetwork::point(Point::new(0.5, 0.5));
        let g = discretize(&d, &s, 0.125).unwrap();
        assert_eq!(g.unknown_count(), 48);
        assert_eq!(g.nx(), 11);
        assert_eq!(g.class(0, 0), NodeClass::Exterior);
        assert_eq!(g.class(1, 1), NodeClass::Dirichlet);
        assert_eq!(g.class(5, 5), NodeClass::Dirichlet);
    }

    #[test]
    fn comb_splits_into_channels() {
        let d = Domain::unit_square();
        let g = discretize(&d, &build_comb(2), 1.0 / 16.0).unwrap();
        let comps = g.connected_components();
        assert_eq!(comps.len(), 2);
        // Oracle: 7 columns of 15 interior nodes each side of x = 1/2.
        assert!(comps.iter().all(|c| c.len() == 7 * 15));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let d = Domain::unit_square();
        let s = SigmaNetwork::point(Point::new(0.5, 0.5));
        assert!(matches!(
            discretize(&d, &s, 0.5),
            Err(Error::ResolutionTooCoarse(_))
        ));
    }

    #[test]
    fn neck_cut_gives_two_components() {
        let outer = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 0.4),
            Point::new(1.2, 0.4),
            Point::new(1.2, 0.0),
            Point::new(2.2, 0.0),
            Point::new(2.2, 1.0),
            Point::new(1.2, 1.0),
            Point::new(1.2, 0.6),
            Point::new(1.0, 0.6),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let d = Domain::new(outer, vec![]).unwrap();
        let s = SigmaNetwork::from_segments(&[Segment::new(
            Point::new(1.1, 0.4),
            Point::new(1.1, 0.6),
        )])
        .unwrap();
        let h = 1.0 / 40.0;
        assert_eq!(discretize(&d, &SigmaNetwork::point(Point::new(0.5, 0.5)), h)
            .unwrap()
            .connected_components()
            .len(), 1);
        assert_eq!(discretize(&d, &s, h).unwrap().connected_components().len(), 2);
    }

    #[test]
    fn close_parallel_segments_warn() {
        let d = Domain::unit_square();
        let s = SigmaNetwork::from_segments(&[
            Segment::new(Point::new(0.5, 0.1), Point::new(0.5, 0.9)),
            Segment::new(Point::new(0.52, 0.1), Point::new(0.52, 0.9)),
            Segment::new(Point::new(0.5, 0.1), Point::new(0.52, 0.1)),
        ])
        .unwrap();
        assert_eq!(discretize(&d, &s, 0.01).unwrap().warnings().len(), 1);
        assert!(discretize(&d, &s, 0.001).unwrap().warnings().is_empty());
    }

    #[test]
    fn sublevel_area_examples() {
        let d = Domain::unit_square();
        let s = SigmaNetwork::point(Point::new(0.5, 0.5));
        assert_eq!(sublevel_area(&d, &s, 0.0, 0.01).unwrap(), 0.0);
        assert_eq!(sublevel_area(&d, &s, 2.0, 0.01).unwrap(), 1.0);
        // Boundary band plus a disjoint disc.
        let exact = 1.0 - 0.8f64 * 0.8 + std::f64::consts::PI * 0.01;
        let h = 1.0 / 1024.0;
        assert_relative_eq!(sublevel_area(&d, &s, 0.1, h).unwrap(), exact, epsilon = 4.0 * h);
    }

    #[test]
    fn raster_has_header_and_rows() {
        let d = Domain::unit_square();
        let g = discretize(&d, &SigmaNetwork::point(Point::new(0.5, 0.5)), 0.25).unwrap();
        let text = g.format_classes();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "7 7 0.25 -0.25 -0.25");
        assert_eq!(lines.count(), 7);
    }
}
