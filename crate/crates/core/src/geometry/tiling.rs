//! Networks whose length is distributed according to a fitted measure, built
//! by tiling every lattice cell with scaled copies of a periodic tile.

use super::domain::Domain;
use super::measure::FittedMeasure;
use super::network::SigmaNetwork;
use super::primitives::{Point, Segment};
use super::structures::unit_square_boundary;
use crate::error::{Error, Result};

/// Length of `tile` inside the half-open unit square `[0,1)^2`: the edges on
/// the lines `x = 1` and `y = 1` belong to the neighbouring copies.
pub fn effective_tile_length(tile: &SigmaNetwork) -> f64 {
    let mut len = 0.0;
    for s in tile.segments() {
        let on_right = (s.a.x - 1.0).abs() <= 1e-12 && (s.b.x - 1.0).abs() <= 1e-12;
        let on_top = (s.a.y - 1.0).abs() <= 1e-12 && (s.b.y - 1.0).abs() <= 1e-12;
        if !on_right && !on_top {
            len += s.length();
        }
    }
    len
}

/// Checks that `tile` lives in the unit square and contains its boundary.
pub fn check_tile(tile: &SigmaNetwork) -> Result<()> {
    if tile
        .vertices()
        .iter()
        .any(|v| v.x < -1e-12 || v.x > 1.0 + 1e-12 || v.y < -1e-12 || v.y > 1.0 + 1e-12)
    {
        return Err(Error::InvalidGeometry("tile leaves the unit square".into()));
    }
    let own = tile.union_length_with(&[]);
    let with_boundary = tile.union_length_with(&unit_square_boundary());
    if with_boundary - own > 1e-9 {
        return Err(Error::InvalidGeometry(
            "tile does not contain the unit square boundary".into(),
        ));
    }
    Ok(())
}

/// Number of microtiles per side in every cell of `fitted`:
/// `k_i = floor(s alpha_i (L - sqrt L) / L_e)`.
pub fn tiles_per_side(budget: f64, fitted: &FittedMeasure, effective_length: f64) -> Vec<usize> {
    let s = fitted.side();
    fitted
        .cells()
        .iter()
        .map(|c| {
            // The slack keeps exact integer ratios from rounding down.
            let k = (s * c.alpha * (budget - budget.sqrt()) / effective_length + 1e-9).floor();
            if k.is_finite() && k > 0.0 {
                k as usize
            } else {
                0
            }
        })
        .collect()
}

/// Tiles each fitted cell with `k_i x k_i` scaled copies of `tile`, clips to
/// the domain and adds the domain boundary.
pub fn build_tiled_sigma(
    budget: f64,
    fitted: &FittedMeasure,
    tile: &SigmaNetwork,
    domain: &Domain,
) -> Result<SigmaNetwork> {
    check_tile(tile)?;
    let le = effective_tile_length(tile);
    if !(le > 0.0) {
        return Err(Error::InvalidGeometry("tile has no length".into()));
    }
    let ks = tiles_per_side(budget, fitted, le);
    if let Some(i) = ks.iter().position(|&k| k == 0) {
        let c = &fitted.cells()[i];
        return Err(Error::BudgetTooSmall(format!(
            "budget {budget} gives no microtile in cell ({}, {})",
            c.ix, c.iy
        )));
    }
    let tile_segments = tile.segments();
    let s = fitted.side();
    let mut segs: Vec<Segment> = Vec::new();
    for (c, &k) in fitted.cells().iter().zip(&ks) {
        let scale = s / k as f64;
        for m in 0..k {
            for n in 0..k {
                let origin = Point::new(
                    c.ix as f64 * s + m as f64 * scale,
                    c.iy as f64 * s + n as f64 * scale,
                );
                for t in &tile_segments {
                    let mapped = Segment::new(origin + t.a * scale, origin + t.b * scale);
                    segs.extend(
                        domain
                            .clip_segment(&mapped)
                            .into_iter()
                            .filter(|p| p.length() > 1e-12),
                    );
                }
            }
        }
    }
    segs.extend(domain.boundary_segments());
    let sigma = SigmaNetwork::from_segments(&segs)?;
    if !sigma.is_connected() {
        return Err(Error::InvalidGeometry(
            "tiled network is not connected".into(),
        ));
    }
    let len = sigma.length();
    if len > budget {
        return Err(Error::BudgetTooSmall(format!(
            "tiled network has length {len} > budget {budget}"
        )));
    }
    Ok(sigma)
}
