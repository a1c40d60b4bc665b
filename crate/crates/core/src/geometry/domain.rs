use super::polygon::{self, edges};
use super::primitives::{BoundingBox, Point, Segment, INCIDENCE_TOL};
use crate::error::{Error, Result};

/// Position of a point relative to a domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside,
    OnBoundary,
    Outside,
}

/// A polygonal domain: one outer boundary and optional polygonal holes.
///
/// The outer polygon is stored counter-clockwise and holes clockwise,
/// whatever order they were given in.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    outer: Vec<Point>,
    holes: Vec<Vec<Point>>,
}

impl Domain {
    pub fn new(mut outer: Vec<Point>, mut holes: Vec<Vec<Point>>) -> Result<Self> {
        if outer.iter().chain(holes.iter().flatten()).any(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite coordinate".into()));
        }
        if !polygon::is_simple(&outer) {
            return Err(Error::InvalidGeometry(
                "outer boundary is not a simple polygon".into(),
            ));
        }
        if polygon::signed_area(&outer) < 0.0 {
            outer.reverse();
        }
        for (k, hole) in holes.iter_mut().enumerate() {
            if !polygon::is_simple(hole) {
                return Err(Error::InvalidGeometry(format!(
                    "hole {k} is not a simple polygon"
                )));
            }
            if polygon::signed_area(hole) > 0.0 {
                hole.reverse();
            }
            for &v in hole.iter() {
                if polygon::winding_number(v, &outer) == 0
                    || polygon::on_boundary(v, &outer, INCIDENCE_TOL)
                {
                    return Err(Error::InvalidGeometry(format!(
                        "hole {k} is not strictly inside the outer boundary"
                    )));
                }
            }
            for e in edges(hole) {
                if edges(&outer).any(|o| o.intersects(&e, INCIDENCE_TOL)) {
                    return Err(Error::InvalidGeometry(format!(
                        "hole {k} touches the outer boundary"
                    )));
                }
            }
        }
        for i in 0..holes.len() {
            for j in (i + 1)..holes.len() {
                let touching = edges(&holes[i])
                    .any(|a| edges(&holes[j]).any(|b| a.intersects(&b, INCIDENCE_TOL)));
                let nested = polygon::winding_number(holes[i][0], &holes[j]) != 0
                    || polygon::winding_number(holes[j][0], &holes[i]) != 0;
                if touching || nested {
                    return Err(Error::InvalidGeometry(format!(
                        "holes {i} and {j} are not disjoint"
                    )));
                }
            }
        }
        let d = Domain { outer, holes };
        if d.area() <= 0.0 {
            return Err(Error::InvalidGeometry("domain has no area".into()));
        }
        Ok(d)
    }

    pub fn unit_square() -> Self {
        Self::rectangle(Point::new(0.0, 0.0), 1.0, 1.0)
    }

    /// Axis-aligned rectangle with lower-left corner `origin`.
    pub fn rectangle(origin: Point, width: f64, height: f64) -> Self {
        assert!(width > 0.0 && height > 0.0, "rectangle sides must be positive");
        Domain {
            outer: vec![
                origin,
                Point::new(origin.x + width, origin.y),
                Point::new(origin.x + width, origin.y + height),
                Point::new(origin.x, origin.y + height),
            ],
            holes: Vec::new(),
        }
    }

    pub fn outer(&self) -> &[Point] {
        &self.outer
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.holes
    }

    pub fn area(&self) -> f64 {
        polygon::signed_area(&self.outer)
            + self.holes.iter().map(|h| polygon::signed_area(h)).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        polygon::perimeter(&self.outer) + self.holes.iter().map(|h| polygon::perimeter(h)).sum::<f64>()
    }

    /// Number of connected components of the boundary.
    pub fn boundary_components(&self) -> usize {
        1 + self.holes.len()
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::from_points(self.outer.iter().copied())
    }

    pub fn boundary_segments(&self) -> Vec<Segment> {
        let mut out: Vec<Segment> = edges(&self.outer).collect();
        for h in &self.holes {
            out.extend(edges(h));
        }
        out
    }

    pub fn locate(&self, p: Point) -> Location {
        self.locate_with_tol(p, INCIDENCE_TOL)
    }

    pub fn locate_with_tol(&self, p: Point, tol: f64) -> Location {
        if polygon::on_boundary(p, &self.outer, tol)
            || self.holes.iter().any(|h| polygon::on_boundary(p, h, tol))
        {
            return Location::OnBoundary;
        }
        if polygon::winding_number(p, &self.outer) == 0 {
            return Location::Outside;
        }
        if self.holes.iter().any(|h| polygon::winding_number(p, h) != 0) {
            return Location::Outside;
        }
        Location::Inside
    }

    /// Membership in the closed domain.
    pub fn contains(&self, p: Point) -> bool {
        self.locate(p) != Location::Outside
    }

    /// Distance from `p` to the boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        edges(&self.outer)
            .chain(self.holes.iter().flat_map(|h| edges(h)))
            .map(|e| e.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Pieces of `seg` that lie in the closed domain.
    pub fn clip_segment(&self, seg: &Segment) -> Vec<Segment> {
        if seg.length() == 0.0 {
            return if self.contains(seg.a) { vec![*seg] } else { Vec::new() };
        }
        let mut params = vec![0.0, 1.0];
        for e in self.boundary_segments() {
            if let Some((t, _)) = seg.crossing_params(&e) {
                params.push(t);
            }
            // Boundary vertices lying on the segment split it as well.
            for v in [e.a, e.b] {
                if seg.distance_to(v) <= INCIDENCE_TOL {
                    params.push(seg.project(v));
                }
            }
        }
        params.sort_by(f64::total_cmp);
        params.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        for w in params.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 <= 1e-14 {
                continue;
            }
            if self.contains(seg.point_at(0.5 * (t0 + t1))) {
                match pieces.last_mut() {
                    Some(last) if (last.1 - t0).abs() <= 1e-14 => last.1 = t1,
                    _ => pieces.push((t0, t1)),
                }
            }
        }
        pieces
            .into_iter()
            .map(|(t0, t1)| {
                let a = if t0 == 0.0 { seg.a } else { seg.point_at(t0) };
                let b = if t1 == 1.0 { seg.b } else { seg.point_at(t1) };
                Segment::new(a, b)
            })
            .collect()
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> Domain {
        let f = |p: &Point| *p * factor;
        Domain {
            outer: self.outer.iter().map(f).collect(),
            holes: self.holes.iter().map(|h| h.iter().map(f).collect()).collect(),
        }
    }
}
