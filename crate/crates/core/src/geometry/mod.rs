//! Domains, coefficient fields, segment networks and the explicit
//! configurations built from them.

mod coefficient;
mod domain;
pub mod io;
mod measure;
mod network;
pub mod polygon;
mod primitives;
pub mod structures;
pub mod tiling;

pub use coefficient::CoefficientField;
pub use domain::{Domain, Location};
pub use measure::{fit_measure_to_grid, DensityField, FittedCell, FittedMeasure, Quadrature};
pub use network::{merge_segments, SigmaNetwork, COLLINEAR_TOL};
pub use primitives::{closest_points, segment_distance, BoundingBox, Point, Segment, INCIDENCE_TOL};
pub use structures::{build_comb, build_grid_structure, build_oblique_comb};
pub use tiling::build_tiled_sigma;

/// Distance from `x` to `sigma` together with the domain boundary.
pub fn distance_to_set(x: Point, sigma: &SigmaNetwork, domain: &Domain) -> f64 {
    sigma.distance(x).min(domain.boundary_distance(x))
}

/// `H^1(sigma ∪ ∂domain)` with shared pieces counted once.
pub fn union_length_with_boundary(sigma: &SigmaNetwork, domain: &Domain) -> f64 {
    sigma.union_length_with(&domain.boundary_segments())
}
