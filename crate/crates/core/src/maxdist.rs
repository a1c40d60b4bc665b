//! The maximum of `d(x, sigma ∪ ∂domain)` over the domain.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::geometry::{Domain, Point, Segment, SigmaNetwork};

/// Result of [`max_distance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceFieldSummary {
    /// The maximum distance, evaluated exactly at `argmax`.
    pub t: f64,
    pub argmax: Point,
    /// Sampling step of the last refinement level.
    pub h: f64,
    /// Number of refinement levels after the coarse scan.
    pub level: usize,
}

const COARSE_CELLS: f64 = 64.0;
const REFINE: usize = 8;
const MAX_LEVELS: usize = 8;

fn distance(segs: &[Segment], x: Point) -> f64 {
    segs.iter().map(|s| s.distance_to(x)).fold(f64::INFINITY, f64::min)
}

fn obstacles(domain: &Domain, sigma: &SigmaNetwork) -> Vec<Segment> {
    let mut segs = sigma.point_set();
    segs.extend(domain.boundary_segments());
    segs
}

/// Keeps samples within `h / sqrt 2` of the best value (the max over the
/// domain cannot be further above any sample near it), at most the top
/// 1% and never fewer than 16.
fn candidates(mut samples: Vec<(f64, Point)>, h: f64) -> Vec<(f64, Point)> {
    samples.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.x.total_cmp(&b.1.x)).then(a.1.y.total_cmp(&b.1.y)));
    let best = samples[0].0;
    let cutoff = best - h / std::f64::consts::SQRT_2;
    let cap = (samples.len() / 100).max(16);
    samples.retain(|s| s.0 >= cutoff);
    samples.truncate(cap);
    samples
}

/// Maximum distance to the network and the boundary, to within `tolerance`.
///
/// A grid scan is refined around the best candidates until the sampling
/// step guarantees the bracket `h / sqrt 2 <= tolerance` (distance
/// functions are 1-Lipschitz).
pub fn max_distance(domain: &Domain, sigma: &SigmaNetwork, tolerance: f64) -> DistanceFieldSummary {
    let segs = obstacles(domain, sigma);
    let bbox = domain.bbox();
    let mut h = bbox.width().max(bbox.height()) / COARSE_CELLS;
    let nx = (bbox.width() / h).ceil() as usize;
    let ny = (bbox.height() / h).ceil() as usize;
    let mut samples = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = Point::new(
                (bbox.min.x + i as f64 * h).min(bbox.max.x),
                (bbox.min.y + j as f64 * h).min(bbox.max.y),
            );
            if domain.contains(x) {
                samples.push((distance(&segs, x), x));
            }
        }
    }
    if samples.is_empty() {
        let c = domain.outer()[0];
        return DistanceFieldSummary { t: 0.0, argmax: c, h, level: 0 };
    }
    let mut cands = candidates(samples, h);
    let mut level = 0;
    while h / std::f64::consts::SQRT_2 > tolerance && level < MAX_LEVELS {
        let fine = h / REFINE as f64;
        let mut seen: HashSet<(i64, i64)> = HashSet::new();
        let mut next = Vec::new();
        for (d, c) in &cands {
            next.push((*d, *c));
            let ci = ((c.x - bbox.min.x) / fine).round() as i64;
            let cj = ((c.y - bbox.min.y) / fine).round() as i64;
            let r = REFINE as i64;
            for dj in -r..=r {
                for di in -r..=r {
                    let key = (ci + di, cj + dj);
                    if !seen.insert(key) {
                        continue;
                    }
                    let x = Point::new(c.x + di as f64 * fine, c.y + dj as f64 * fine);
                    if domain.contains(x) {
                        next.push((distance(&segs, x), x));
                    }
                }
            }
        }
        h = fine;
        level += 1;
        cands = candidates(next, h);
    }
    let (_, argmax) = cands[0];
    DistanceFieldSummary {
        t: distance(&segs, argmax),
        argmax,
        h,
        level,
    }
}

/// Lower bound for `L * max distance` of any connected network of length
/// `L` in the unit square: `L / ((L+4) + sqrt((L+4)^2 + 2 pi))`.
pub fn theta_infinity_certificate(budget: f64) -> f64 {
    let a = budget + 4.0;
    budget / (a + (a * a + 2.0 * std::f64::consts::PI).sqrt())
}

/// Distance values at the nodes of a grid with spacing `h` covering the
/// domain with one extra layer (zero outside the domain), as a raster with
/// header `rows cols h x0 y0` and the bottom row first.
pub fn distance_raster(domain: &Domain, sigma: &SigmaNetwork, h: f64) -> String {
    let segs = obstacles(domain, sigma);
    let bbox = domain.bbox();
    let origin = Point::new(bbox.min.x - h, bbox.min.y - h);
    let nx = (bbox.width() / h - 1e-9).ceil() as usize + 3;
    let ny = (bbox.height() / h - 1e-9).ceil() as usize + 3;
    let mut out = String::new();
    let _ = writeln!(out, "{ny} {nx} {h} {} {}", origin.x, origin.y);
    for j in 0..ny {
        let row: Vec<String> = (0..nx)
            .map(|i| {
                let x = Point::new(origin.x + i as f64 * h, origin.y + j as f64 * h);
                if domain.contains(x) {
                    distance(&segs, x).to_string()
                } else {
                    "0".to_string()
                }
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
