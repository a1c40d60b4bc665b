//! Explicit configurations in the unit square and line families on general
//! domains.

use super::domain::Domain;
use super::measure::{DensityField, Quadrature};
use super::network::SigmaNetwork;
use super::primitives::{Point, Segment};
use crate::error::{Error, Result};

fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
    Segment::new(Point::new(ax, ay), Point::new(bx, by))
}

/// The four sides of the unit square.
pub fn unit_square_boundary() -> Vec<Segment> {
    vec![
        seg(0.0, 0.0, 1.0, 0.0),
        seg(1.0, 0.0, 1.0, 1.0),
        seg(1.0, 1.0, 0.0, 1.0),
        seg(0.0, 1.0, 0.0, 0.0),
    ]
}

/// `n + 1` equispaced unit verticals together with the lower base.
pub fn build_comb(n: usize) -> SigmaNetwork {
    assert!(n >= 1, "comb needs n >= 1");
    let mut vertices = Vec::with_capacity(2 * (n + 1));
    let mut edges = Vec::with_capacity(2 * n + 1);
    for k in 0..=n {
        let x = k as f64 / n as f64;
        vertices.push(Point::new(x, 0.0));
        vertices.push(Point::new(x, 1.0));
        edges.push((2 * k, 2 * k + 1));
        if k > 0 {
            edges.push((2 * (k - 1), 2 * k));
        }
    }
    SigmaNetwork::new(vertices, edges).expect("comb is well formed")
}

/// `n + 1` horizontal and `n + 1` vertical unit lines.
pub fn build_grid_structure(n: usize) -> SigmaNetwork {
    assert!(n >= 1, "grid needs n >= 1");
    let mut segs = Vec::with_capacity(2 * (n + 1));
    for k in 0..=n {
        let t = k as f64 / n as f64;
        segs.push(seg(t, 0.0, t, 1.0));
        segs.push(seg(0.0, t, 1.0, t));
    }
    SigmaNetwork::from_segments(&segs).expect("grid is well formed")
}

/// Chords of `domain` cut by the lines `nu . x = offset + k * spacing`,
/// `nu = (-sin angle, cos angle)`, for every integer `k` that meets it.
pub fn parallel_chords(domain: &Domain, angle: f64, spacing: f64, offset: f64) -> Vec<Segment> {
    assert!(spacing > 0.0);
    let dir = Point::new(angle.cos(), angle.sin());
    let nu = dir.perp();
    let bbox = domain.bbox();
    let corners = bbox.corners();
    let (lo, hi) = corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
        (lo.min(nu.dot(*c)), hi.max(nu.dot(*c)))
    });
    let reach = bbox.diameter() + 1.0;
    let center = bbox.center();
    let k0 = ((lo - offset) / spacing - 1e-9).ceil() as i64;
    let k1 = ((hi - offset) / spacing + 1e-9).floor() as i64;
    let mut chords = Vec::new();
    for k in k0..=k1 {
        let level = offset + k as f64 * spacing;
        // Foot of the line closest to the box center.
        let foot = center + nu * (level - nu.dot(center));
        let line = Segment::new(foot - dir * reach, foot + dir * reach);
        for c in domain.clip_segment(&line) {
            if c.length() > 1e-12 {
                chords.push(c);
            }
        }
    }
    chords
}

/// Chords of the unit square at spacing `1/n` in the normal direction of
/// `angle`, together with the square boundary.
pub fn build_oblique_comb(n: usize, angle: f64) -> SigmaNetwork {
    assert!(n >= 1, "oblique comb needs n >= 1");
    let mut segs = parallel_chords(&Domain::unit_square(), angle, 1.0 / n as f64, 0.0);
    segs.extend(unit_square_boundary());
    SigmaNetwork::from_segments(&segs).expect("oblique comb is well formed")
}

/// Teeth along the lines `nu . x = level` for the given levels, joined by the
/// shortest links inside the domain.
pub fn linked_teeth(domain: &Domain, angle: f64, levels: &[f64]) -> Result<SigmaNetwork> {
    let dir = Point::new(angle.cos(), angle.sin());
    let nu = dir.perp();
    let bbox = domain.bbox();
    let reach = bbox.diameter() + 1.0;
    let center = bbox.center();
    let mut segs = Vec::new();
    for &level in levels {
        let foot = center + nu * (level - nu.dot(center));
        let line = Segment::new(foot - dir * reach, foot + dir * reach);
        segs.extend(domain.clip_segment(&line).into_iter().filter(|c| c.length() > 1e-12));
    }
    if segs.is_empty() {
        return Err(Error::InvalidGeometry("no tooth meets the domain".into()));
    }
    SigmaNetwork::from_segments(&segs)?.connect_components(domain)
}

/// Range of `nu . x` over the domain, `nu` the normal of `angle`.
pub fn normal_extent(domain: &Domain, angle: f64) -> (f64, f64) {
    let nu = Point::new(-angle.sin(), angle.cos());
    domain
        .outer()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(nu.dot(*c)), hi.max(nu.dot(*c)))
        })
}

/// `teeth` equispaced interior teeth, none on the extreme supporting lines.
pub fn uniform_levels(domain: &Domain, angle: f64, teeth: usize) -> Vec<f64> {
    let (lo, hi) = normal_extent(domain, angle);
    (1..=teeth)
        .map(|j| lo + (hi - lo) * j as f64 / (teeth + 1) as f64)
        .collect()
}

/// Tooth levels at the quantiles `j/(teeth+1)` of the marginal of `density`
/// in the normal direction, so local tooth spacing is inversely
/// proportional to the density.
pub fn graded_levels(
    domain: &Domain,
    density: &DensityField,
    quad: &Quadrature,
    angle: f64,
    teeth: usize,
) -> Vec<f64> {
    let nu = Point::new(-angle.sin(), angle.cos());
    let mut mass: Vec<(f64, f64)> = quad
        .points()
        .iter()
        .zip(quad.weights())
        .map(|(q, w)| (nu.dot(*q), w * density.eval(*q)))
        .collect();
    mass.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = mass.iter().map(|m| m.1).sum();
    let (lo, hi) = normal_extent(domain, angle);
    let mut levels = Vec::with_capacity(teeth);
    let mut acc = 0.0;
    let mut idx = 0;
    for j in 1..=teeth {
        let target = total * j as f64 / (teeth + 1) as f64;
        while idx < mass.len() && acc + mass[idx].1 < target {
            acc += mass[idx].1;
            idx += 1;
        }
        let level = if idx < mass.len() { mass[idx].0 } else { hi };
        levels.push(level.clamp(lo, hi));
    }
    levels
}

/// A graded comb: `teeth` teeth placed by [`graded_levels`], linked.
pub fn build_graded_comb(
    domain: &Domain,
    density: &DensityField,
    quad: &Quadrature,
    angle: f64,
    teeth: usize,
) -> Result<SigmaNetwork> {
    let levels = graded_levels(domain, density, quad, angle, teeth);
    linked_teeth(domain, angle, &levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn comb_lengths() {
        assert_relative_eq!(build_comb(1).length(), 3.0);
        assert_relative_eq!(build_comb(2).length(), 4.0);
        assert_relative_eq!(build_comb(4).length(), 6.0, epsilon = 1e-14);
        assert_relative_eq!(build_comb(16).length(), 18.0, epsilon = 1e-13);
        assert!(build_comb(16).is_connected());
    }

    #[test]
    fn grid_lengths() {
        assert_relative_eq!(build_grid_structure(1).length(), 4.0);
        assert_relative_eq!(build_grid_structure(2).length(), 6.0);
        assert_relative_eq!(build_grid_structure(8).length(), 18.0, epsilon = 1e-13);
        assert!(build_grid_structure(8).is_connected());
    }

    #[test]
    fn vertical_oblique_comb_contains_comb() {
        let o = build_oblique_comb(4, FRAC_PI_2);
        // Interior verticals plus the full square boundary.
        assert_relative_eq!(o.length(), 3.0 + 4.0, epsilon = 1e-12);
        for k in 1..4 {
            assert!(o.distance(Point::new(k as f64 / 4.0, 0.37)) < 1e-12);
        }
    }

    #[test]
    fn diagonal_oblique_comb_length() {
        // Oracle: chords of nu.x = k/4 with nu = (-1,1)/sqrt2 meet the square
        // along y - x = c, c = k sqrt2 / 4, with length sqrt2 (1 - |c|).
        let mut chords = 0.0;
        for k in -5i32..=5 {
            let c = k as f64 * std::f64::consts::SQRT_2 / 4.0;
            if c.abs() < 1.0 {
                chords += std::f64::consts::SQRT_2 * (1.0 - c.abs());
            }
        }
        let o = build_oblique_comb(4, FRAC_PI_4);
        assert_relative_eq!(o.length(), chords + 4.0, epsilon = 1e-12);
        assert!(o.is_connected());
    }

    #[test]
    fn horizontal_oblique_comb() {
        let o = build_oblique_comb(2, 0.0);
        assert_relative_eq!(o.length(), 5.0, epsilon = 1e-12);
        assert!(o.distance(Point::new(0.3, 0.5)) < 1e-12);
    }

    #[test]
    fn interior_teeth_are_linked() {
        let d = Domain::unit_square();
        let s = linked_teeth(&d, FRAC_PI_2, &uniform_levels(&d, FRAC_PI_2, 3)).unwrap();
        assert!(s.is_connected());
        assert_relative_eq!(s.length(), 3.0 + 0.5, epsilon = 1e-12);
    }
}
