//! Points, segments and the handful of exact planar predicates everything
//! else is built on.

use std::ops::{Add, Mul, Neg, Sub};

/// Tolerance used for incidence tests (touching segments, points on edges).
pub const INCIDENCE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }

    /// Counter-clockwise rotation by 90 degrees.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// A closed straight segment. `a == b` is allowed and represents a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn midpoint(&self) -> Point {
        self.a.lerp(self.b, 0.5)
    }

    pub fn direction(&self) -> Point {
        self.b - self.a
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.a.lerp(self.b, t)
    }

    /// Parameter of the closest point on the segment to `p`, in `[0, 1]`.
    pub fn project(&self, p: Point) -> f64 {
        let d = self.direction();
        let len2 = d.norm_sq();
        if len2 == 0.0 {
            return 0.0;
        }
        ((p - self.a).dot(d) / len2).clamp(0.0, 1.0)
    }

    pub fn closest_point(&self, p: Point) -> Point {
        self.point_at(self.project(p))
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        self.closest_point(p).dist(p)
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::from_points([self.a, self.b])
    }

    /// True when the two closed segments share at least one point (within `tol`).
    pub fn intersects(&self, other: &Segment, tol: f64) -> bool {
        segment_distance(self, other) <= tol
    }

    /// Parameters `(t, u)` of the proper crossing point of two non-parallel
    /// segments, if they cross within their closed extents.
    pub fn crossing_params(&self, other: &Segment) -> Option<(f64, f64)> {
        let r = self.direction();
        let s = other.direction();
        let denom = r.cross(s);
        let scale = r.norm() * s.norm();
        if denom.abs() <= 1e-14 * scale || scale == 0.0 {
            return None;
        }
        let w = other.a - self.a;
        let t = w.cross(s) / denom;
        let u = w.cross(r) / denom;
        let eps = 1e-12;
        if (-eps..=1.0 + eps).contains(&t) && (-eps..=1.0 + eps).contains(&u) {
            Some((t.clamp(0.0, 1.0), u.clamp(0.0, 1.0)))
        } else {
            None
        }
    }
}

/// Minimum Euclidean distance between two closed segments.
pub fn segment_distance(s1: &Segment, s2: &Segment) -> f64 {
    if s1.crossing_params(s2).is_some() {
        return 0.0;
    }
    s1.distance_to(s2.a)
        .min(s1.distance_to(s2.b))
        .min(s2.distance_to(s1.a))
        .min(s2.distance_to(s1.b))
}

/// Closest pair of points `(on s1, on s2)` between two segments. Ties are
/// resolved in a fixed order so results are deterministic.
pub fn closest_points(s1: &Segment, s2: &Segment) -> (Point, Point) {
    if let Some((t, _)) = s1.crossing_params(s2) {
        let p = s1.point_at(t);
        return (p, p);
    }
    let candidates = [
        (s1.a, s2.closest_point(s1.a)),
        (s1.b, s2.closest_point(s1.b)),
        (s1.closest_point(s2.a), s2.a),
        (s1.closest_point(s2.b), s2.b),
    ];
    let mut best = candidates[0];
    let mut best_d = best.0.dist(best.1);
    for c in &candidates[1..] {
        let d = c.0.dist(c.1);
        if d < best_d - 1e-15 {
            best = *c;
            best_d = d;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn from_points<I: IntoIterator<Item = Point>>(points: I) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BoundingBox { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        self.min.lerp(self.max, 0.5)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ]
    }

    pub fn expand(&self, by: f64) -> Self {
        BoundingBox {
            min: Point::new(self.min.x - by, self.min.y - by),
            max: Point::new(self.max.x + by, self.max.y + by),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn overlaps(&self, other: &BoundingBox) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    /// Nearest point of the (closed) box to `p`.
    pub fn clamp(&self, p: Point) -> Point {
        Point::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
        )
    }
}
