//! Simulated annealing over network vertices and topology.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{Domain, Point, SigmaNetwork};

/// Proposal step sizes and budget.
pub(crate) struct MoveScale {
    /// Standard deviation of a vertex slide.
    pub slide: f64,
    /// Upper bound for a new spur.
    pub spur: f64,
    pub budget: f64,
}

/// Splits edge `e` at parameter `t`; returns the new vertex index.
fn split_edge(verts: &mut Vec<Point>, edges: &mut Vec<(usize, usize)>, e: usize, t: f64) -> usize {
    let (i, j) = edges[e];
    let x = verts[i].lerp(verts[j], t);
    verts.push(x);
    let k = verts.len() - 1;
    edges[e] = (i, k);
    edges.push((k, j));
    k
}

fn degrees(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut d = vec![0; n];
    for &(i, j) in edges {
        d[i] += 1;
        d[j] += 1;
    }
    d
}

/// A random admissible neighbour of `sigma`, or `None` when the drawn move
/// breaks connectivity, leaves the domain or exceeds the budget.
pub(crate) fn propose(sigma: &SigmaNetwork, domain: &Domain, scale: &MoveScale, rng: &mut impl Rng) -> Option<SigmaNetwork> {
    let mut verts = sigma.vertices().to_vec();
    let mut edges = sigma.edges().to_vec();
    let r: f64 = rng.random();
    if r < 0.60 {
        let normal = Normal::new(0.0, scale.slide).ok()?;
        let i = rng.random_range(0..verts.len());
        verts[i] = verts[i] + Point::new(normal.sample(rng), normal.sample(rng));
    } else if r < 0.85 {
        let leaves: Vec<usize> = degrees(verts.len(), &edges)
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == 1)
            .map(|(i, _)| i)
            .collect();
        let remove = rng.random_bool(0.5) && edges.len() > 1 && !leaves.is_empty();
        if remove {
            let leaf = leaves[rng.random_range(0..leaves.len())];
            edges.retain(|&(i, j)| i != leaf && j != leaf);
            verts.remove(leaf);
            for e in edges.iter_mut() {
                if e.0 > leaf {
                    e.0 -= 1;
                }
                if e.1 > leaf {
                    e.1 -= 1;
                }
            }
        } else {
            let room = scale.budget - sigma.length();
            if room <= 1e-12 {
                return None;
            }
            let base = if edges.is_empty() {
                rng.random_range(0..verts.len())
            } else {
                let e = rng.random_range(0..edges.len());
                split_edge(&mut verts, &mut edges, e, rng.random())
            };
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let len = rng.random_range(0.2..1.0) * room.min(scale.spur);
            verts.push(verts[base] + Point::new(angle.cos(), angle.sin()) * len);
            edges.push((base, verts.len() - 1));
        }
    } else {
        if edges.is_empty() {
            return None;
        }
        let e = rng.random_range(0..edges.len());
        split_edge(&mut verts, &mut edges, e, rng.random_range(0.25..0.75));
    }
    let next = SigmaNetwork::new(verts, edges).ok()?;
    let ok = next.length() <= scale.budget && next.lies_within(domain) && next.is_connected();
    ok.then_some(next)
}

/// Geometric cooling `T_k = T_0 0.995^k`.
pub(crate) fn temperature(t0: f64, k: usize) -> f64 {
    t0 * 0.995f64.powi(k as i32)
}

/// `T_0` giving acceptance probability one half for the mean worsening
/// `mean_loss` (a positive score decrease).
pub(crate) fn calibrate(mean_loss: Option<f64>) -> f64 {
    match mean_loss {
        Some(m) if m > 0.0 => m / std::f64::consts::LN_2,
        _ => 1e-3,
    }
}
