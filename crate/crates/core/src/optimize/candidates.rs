//! Structured candidate networks: linked teeth at uniform or density-graded
//! spacing, the tiling construction, and budget filling.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;

use crate::geometry::structures::{graded_levels, linked_teeth, normal_extent, unit_square_boundary};
use crate::geometry::{
    build_tiled_sigma, fit_measure_to_grid, DensityField, Domain, Point, Quadrature, Segment, SigmaNetwork,
};
use crate::maxdist::max_distance;

/// A named candidate.
pub(crate) struct Candidate {
    pub label: String,
    pub sigma: SigmaNetwork,
}

/// Fixed orientations and `sampled` random ones in `[0, pi)`.
pub(crate) fn orientations(rng: &mut impl Rng, sampled: usize) -> Vec<f64> {
    let mut out = vec![FRAC_PI_2, 0.0, FRAC_PI_4];
    out.extend((0..sampled).map(|_| rng.random_range(0.0..std::f64::consts::PI)));
    out
}

/// Largest `m` in `1..` with `build(m)` no longer than `budget`, assuming
/// the length grows with `m`.
fn largest_fitting(budget: f64, mut build: impl FnMut(usize) -> Option<SigmaNetwork>) -> Option<(usize, SigmaNetwork)> {
    let fits = |s: &SigmaNetwork| s.length() <= budget * (1.0 - 1e-12);
    let first = build(1).filter(fits)?;
    let mut good = (1usize, first);
    let mut hi = 2usize;
    // Doubling, then bisection between the last fit and the first miss.
    while let Some(s) = build(hi).filter(fits) {
        good = (hi, s);
        hi *= 2;
        if hi > 1 << 16 {
            return Some(good);
        }
    }
    let mut lo = good.0;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match build(mid).filter(fits) {
            Some(s) => {
                lo = mid;
                good = (mid, s);
            }
            None => hi = mid,
        }
    }
    Some(good)
}

/// `m` equispaced levels strictly inside `(lo, hi)`, shifted by `shift`
/// spacings.
fn shifted_levels(lo: f64, hi: f64, m: usize, shift: f64) -> Vec<f64> {
    let d = (hi - lo) / (m + 1) as f64;
    (1..=m)
        .map(|j| (lo + d * (j as f64 + shift)).clamp(lo, hi))
        .collect()
}

/// Deepest point of the domain (farthest from the boundary).
fn deepest_point(domain: &Domain) -> Point {
    let anchor = SigmaNetwork::point(domain.outer()[0]);
    max_distance(domain, &anchor, 1e-6 * domain.bbox().diameter()).argmax
}

/// A single segment of length `budget` through the deepest point, clipped
/// to the domain.
fn centered_segment(domain: &Domain, angle: f64, budget: f64) -> Option<SigmaNetwork> {
    let c = deepest_point(domain);
    let dir = Point::new(angle.cos(), angle.sin());
    let seg = Segment::new(c - dir * (0.5 * budget), c + dir * (0.5 * budget));
    let piece = domain
        .clip_segment(&seg)
        .into_iter()
        .find(|s| s.distance_to(c) <= 1e-12)?;
    SigmaNetwork::from_segments(&[piece]).ok()
}

/// Uniformly spaced linked teeth for every orientation: interior teeth with
/// a few offsets, and teeth anchored on the two extreme lines.
pub(crate) fn comb_family(domain: &Domain, budget: f64, angles: &[f64]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for &angle in angles {
        let (lo, hi) = normal_extent(domain, angle);
        for shift in [0.0, 0.25, -0.25] {
            let found = largest_fitting(budget, |m| {
                linked_teeth(domain, angle, &shifted_levels(lo, hi, m, shift)).ok()
            });
            if let Some((m, sigma)) = found {
                out.push(Candidate {
                    label: format!("teeth angle={angle:.4} m={m} shift={shift}"),
                    sigma,
                });
            }
        }
        let anchored = largest_fitting(budget, |n| {
            let levels: Vec<f64> = (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect();
            linked_teeth(domain, angle, &levels).ok()
        });
        if let Some((n, sigma)) = anchored {
            out.push(Candidate {
                label: format!("anchored angle={angle:.4} n={n}"),
                sigma,
            });
        }
        if let Some(sigma) = centered_segment(domain, angle, budget) {
            out.push(Candidate {
                label: format!("segment angle={angle:.4}"),
                sigma,
            });
        }
    }
    out
}

/// The unit tile: square boundary plus the middle vertical.
pub fn default_tile() -> SigmaNetwork {
    let mut segs = unit_square_boundary();
    segs.push(Segment::new(Point::new(0.5, 0.0), Point::new(0.5, 1.0)));
    SigmaNetwork::from_segments(&segs).expect("tile is well formed")
}

/// Networks distributed according to `density`: the tiling construction on
/// cells of side `tile_side` and graded linked teeth for every orientation.
pub(crate) fn adapted_family(
    domain: &Domain,
    budget: f64,
    density: &DensityField,
    tile_side: f64,
    angles: &[f64],
) -> Vec<Candidate> {
    let mut out = Vec::new();
    if let Ok(fitted) = fit_measure_to_grid(density, tile_side, domain) {
        if let Ok(sigma) = build_tiled_sigma(budget, &fitted, &default_tile(), domain) {
            out.push(Candidate {
                label: format!("tiling s={tile_side}"),
                sigma,
            });
        }
    }
    let quad = Quadrature::with_resolution(domain, 256);
    for &angle in angles {
        let found = largest_fitting(budget, |m| {
            linked_teeth(domain, angle, &graded_levels(domain, density, &quad, angle, m)).ok()
        });
        if let Some((m, sigma)) = found {
            out.push(Candidate {
                label: format!("graded angle={angle:.4} m={m}"),
                sigma,
            });
        }
    }
    out
}

/// Appends hair segments from the network toward the point of maximum
/// distance until the length reaches `fill * budget` (or nothing more can
/// be added).
pub fn fill_budget(sigma: &SigmaNetwork, domain: &Domain, budget: f64, fill: f64) -> SigmaNetwork {
    let tol = 1e-7 * domain.bbox().diameter();
    let mut current = sigma.clone();
    for _ in 0..256 {
        let len = current.length();
        let remaining = budget * (1.0 - 1e-9) - len;
        if len >= fill * budget || remaining <= tol {
            break;
        }
        let far = max_distance(domain, &current, tol).argmax;
        let foot = current
            .point_set()
            .iter()
            .map(|s| s.closest_point(far))
            .min_by(|a, b| a.dist(far).total_cmp(&b.dist(far)))
            .expect("a network has at least one point");
        let reach = foot.dist(far);
        if reach <= tol {
            break;
        }
        let dir = (far - foot) * (1.0 / reach);
        let hair = Segment::new(foot, foot + dir * reach.min(remaining));
        let Some(piece) = domain
            .clip_segment(&hair)
            .into_iter()
            .find(|s| s.distance_to(foot) <= 1e-12)
        else {
            break;
        };
        if piece.length() <= tol {
            break;
        }
        let mut segs = current.point_set();
        segs.push(piece);
        match SigmaNetwork::from_segments(&segs) {
            Ok(next) if next.length() <= budget => current = next,
            _ => break,
        }
    }
    current
}
