//! Closed polygons given as vertex lists (the closing edge is implicit).

use super::primitives::{BoundingBox, Point, Segment, INCIDENCE_TOL};

/// Edges of a closed polygon, including the closing edge.
pub fn edges(poly: &[Point]) -> impl Iterator<Item = Segment> + '_ {
    let n = poly.len();
    (0..n).map(move |i| Segment::new(poly[i], poly[(i + 1) % n]))
}

/// Shoelace area; positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn perimeter(poly: &[Point]) -> f64 {
    edges(poly).map(|e| e.length()).sum()
}

/// Winding number of `poly` around `p` (Sunday's crossing rule). Points on
/// the boundary give an arbitrary answer; test with [`on_boundary`] first.
pub fn winding_number(p: Point, poly: &[Point]) -> i32 {
    let mut wn = 0;
    for e in edges(poly) {
        let is_left = (e.b - e.a).cross(p - e.a);
        if e.a.y <= p.y {
            if e.b.y > p.y && is_left > 0.0 {
                wn += 1;
            }
        } else if e.b.y <= p.y && is_left < 0.0 {
            wn -= 1;
        }
    }
    wn
}

pub fn on_boundary(p: Point, poly: &[Point], tol: f64) -> bool {
    edges(poly).any(|e| e.distance_to(p) <= tol)
}

/// Non-adjacent edges never touch and no edge is degenerate.
pub fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let es: Vec<Segment> = edges(poly).collect();
    if es.iter().any(|e| e.length() <= INCIDENCE_TOL) {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Adjacent edges may only share their common vertex: reject
                // fold-backs where they overlap along a line.
                let (e1, e2) = (&es[i], &es[j]);
                let d1 = e1.direction();
                let d2 = e2.direction();
                let parallel = d1.cross(d2).abs() <= 1e-12 * d1.norm() * d2.norm();
                if parallel && d1.dot(d2) < 0.0 {
                    return false;
                }
                continue;
            }
            if es[i].intersects(&es[j], INCIDENCE_TOL) {
                return false;
            }
        }
    }
    true
}

/// Sutherland-Hodgman clip of an arbitrary polygon against an axis-aligned
/// box. The result may contain degenerate slivers along the box edges; its
/// signed area is nonetheless exact.
pub fn clip_to_box(poly: &[Point], bbox: &BoundingBox) -> Vec<Point> {
    let mut out: Vec<Point> = poly.to_vec();
    // (axis, bound, keep_greater)
    let planes = [
        (0, bbox.min.x, true),
        (0, bbox.max.x, false),
        (1, bbox.min.y, true),
        (1, bbox.max.y, false),
    ];
    for (axis, bound, keep_greater) in planes {
        if out.is_empty() {
            break;
        }
        let coord = |p: &Point| if axis == 0 { p.x } else { p.y };
        let inside = |p: &Point| {
            if keep_greater {
                coord(p) >= bound
            } else {
                coord(p) <= bound
            }
        };
        let input = std::mem::take(&mut out);
        let n = input.len();
        for i in 0..n {
            let cur = input[i];
            let prev = input[(i + n - 1) % n];
            let cur_in = inside(&cur);
            let prev_in = inside(&prev);
            if cur_in {
                if !prev_in {
                    out.push(intersect_axis(prev, cur, axis, bound));
                }
                out.push(cur);
            } else if prev_in {
                out.push(intersect_axis(prev, cur, axis, bound));
            }
        }
    }
    out
}

fn intersect_axis(p: Point, q: Point, axis: usize, bound: f64) -> Point {
    let (pc, qc) = if axis == 0 { (p.x, q.x) } else { (p.y, q.y) };
    let t = (bound - pc) / (qc - pc);
    let mut r = p.lerp(q, t);
    if axis == 0 {
        r.x = bound;
    } else {
        r.y = bound;
    }
    r
}

/// Vertex-average centroid; only used to nudge sample points inward.
pub fn vertex_centroid(poly: &[Point]) -> Point {
    let n = poly.len() as f64;
    let s = poly.iter().fold(Point::default(), |acc, p| acc + *p);
    s * (1.0 / n)
}

pub fn regular_polygon(center: Point, radius: f64, sides: usize) -> Vec<Point> {
    (0..sides)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / sides as f64;
            Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn area_and_orientation() {
        let s = square();
        assert_relative_eq!(signed_area(&s), 1.0);
        let mut r = s.clone();
        r.reverse();
        assert_relative_eq!(signed_area(&r), -1.0);
        assert_relative_eq!(perimeter(&s), 4.0);
    }

    #[test]
    fn winding() {
        let s = square();
        assert_eq!(winding_number(Point::new(0.5, 0.5), &s), 1);
        assert_eq!(winding_number(Point::new(1.5, 0.5), &s), 0);
        let mut r = s.clone();
        r.reverse();
        assert_eq!(winding_number(Point::new(0.5, 0.5), &r), -1);
        assert!(on_boundary(Point::new(1.0, 0.3), &s, 1e-12));
    }

    #[test]
    fn simplicity() {
        assert!(is_simple(&square()));
        let bowtie = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(!is_simple(&bowtie));
    }

    #[test]
    fn clip_nonconvex_area_is_exact() {
        // L-shaped polygon clipped against a box straddling the notch.
        let l = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        let b = BoundingBox {
            min: Point::new(0.5, 0.5),
            max: Point::new(1.5, 1.5),
        };
        let c = clip_to_box(&l, &b);
        assert_relative_eq!(signed_area(&c), 0.75, epsilon = 1e-14);
    }
}
