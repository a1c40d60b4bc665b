//! Quadrature over polygonal domains, density fields and measures fitted to
//! a square lattice.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::coefficient::CoefficientField;
use super::domain::Domain;
use super::polygon::{self, clip_to_box};
use super::primitives::{BoundingBox, Point};
use crate::error::{Error, Result};

/// Degree-5 seven-point rule on a triangle: barycentric `(a, b, b)` orbits
/// with their weights.
fn dunavant5() -> [(f64, f64, f64); 3] {
    let r = 15f64.sqrt();
    [
        (1.0 / 3.0, 1.0 / 3.0, 0.225),
        ((9.0 - 2.0 * r) / 21.0, (6.0 + r) / 21.0, (155.0 + r) / 1200.0),
        ((9.0 + 2.0 * r) / 21.0, (6.0 - r) / 21.0, (155.0 - r) / 1200.0),
    ]
}

/// Quadrature nodes over `domain`, built from lattice cells of side `cell`
/// anchored at the origin and clipped exactly to the domain.
///
/// Weights may be negative (signed fan triangulation of clipped cells); the
/// rule is exact for polynomials of degree five on each cell piece.
#[derive(Clone, Debug)]
pub struct Quadrature {
    cell: f64,
    points: Vec<Point>,
    weights: Vec<f64>,
    cells: Vec<(i64, i64)>,
    samples: Vec<Point>,
}

impl Quadrature {
    pub fn new(domain: &Domain, cell: f64) -> Self {
        assert!(cell > 0.0, "quadrature cell must be positive");
        let bbox = domain.bbox();
        let ix0 = (bbox.min.x / cell).floor() as i64;
        let ix1 = (bbox.max.x / cell).ceil() as i64;
        let iy0 = (bbox.min.y / cell).floor() as i64;
        let iy1 = (bbox.max.y / cell).ceil() as i64;
        let mut q = Quadrature {
            cell,
            points: Vec::new(),
            weights: Vec::new(),
            cells: Vec::new(),
            samples: Vec::new(),
        };
        for iy in iy0..iy1 {
            for ix in ix0..ix1 {
                let cb = BoundingBox {
                    min: Point::new(ix as f64 * cell, iy as f64 * cell),
                    max: Point::new((ix + 1) as f64 * cell, (iy + 1) as f64 * cell),
                };
                let mut pieces = vec![clip_to_box(domain.outer(), &cb)];
                for h in domain.holes() {
                    pieces.push(clip_to_box(h, &cb));
                }
                for piece in &pieces {
                    q.add_polygon(piece, (ix, iy));
                }
                let outer = &pieces[0];
                if outer.len() >= 3 && polygon::signed_area(outer).abs() > 1e-15 * cell * cell {
                    let centroid = polygon::vertex_centroid(outer);
                    for v in outer {
                        let nudged = v.lerp(centroid, 1e-9);
                        if domain.contains(nudged) {
                            q.samples.push(nudged);
                        }
                    }
                }
            }
        }
        let inside: Vec<Point> = q.points.iter().copied().filter(|p| domain.contains(*p)).collect();
        q.samples.extend(inside);
        q
    }

    /// Quadrature whose cell count across the larger bounding-box side is
    /// `per_side`, rounded so cells stay on a lattice through the origin.
    pub fn with_resolution(domain: &Domain, per_side: usize) -> Self {
        let bbox = domain.bbox();
        let extent = bbox.width().max(bbox.height());
        Quadrature::new(domain, extent / per_side.max(1) as f64)
    }

    fn add_polygon(&mut self, poly: &[Point], cell: (i64, i64)) {
        if poly.len() < 3 {
            return;
        }
        let rule = dunavant5();
        let p0 = poly[0];
        for i in 1..poly.len() - 1 {
            let (p1, p2) = (poly[i], poly[i + 1]);
            let area = 0.5 * (p1 - p0).cross(p2 - p0);
            if area == 0.0 {
                continue;
            }
            for &(a, b, w) in &rule {
                let orbit: &[(f64, f64, f64)] = if a == b {
                    &[(a, a, a)]
                } else {
                    &[(a, b, b), (b, a, b), (b, b, a)]
                };
                for &(l0, l1, l2) in orbit {
                    let x = p0 * l0 + p1 * l1 + p2 * l2;
                    self.points.push(x);
                    self.weights.push(w * area);
                    self.cells.push(cell);
                }
            }
        }
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Lattice cell index of every node.
    pub fn cells(&self) -> &[(i64, i64)] {
        &self.cells
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for (p, w) in self.points.iter().zip(&self.weights) {
            acc.add(w * f(*p));
        }
        acc.value()
    }

    /// Points of the closed domain used to approximate suprema: interior
    /// quadrature nodes plus every clipped-cell vertex pulled slightly inward.
    pub fn sample_points(&self) -> &[Point] {
        &self.samples
    }

    /// Maximum of `f` over the sample points.
    pub fn sup(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.samples
            .iter()
            .map(|p| f(*p))
            .fold(f64::NEG_INFINITY, |a, b| if b.is_nan() || b > a { b } else { a })
    }
}

/// Neumaier summation: quadratures add up tens of thousands of tiny terms.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// A density function on a domain.
#[derive(Clone)]
pub enum DensityField {
    /// `(rho/sigma)^(1/p) / normalizer`
    Weighted {
        rho: CoefficientField,
        sigma: CoefficientField,
        p: f64,
        normalizer: f64,
    },
    /// Piecewise-constant density of a fitted measure.
    Piecewise(FittedMeasure),
    /// Any other function.
    Function(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl fmt::Debug for DensityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityField::Weighted { rho, sigma, p, normalizer } => f
                .debug_struct("Weighted")
                .field("rho", rho)
                .field("sigma", sigma)
                .field("p", p)
                .field("normalizer", normalizer)
                .finish(),
            DensityField::Piecewise(m) => f.debug_tuple("Piecewise").field(m).finish(),
            DensityField::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl DensityField {
    pub fn uniform(domain: &Domain) -> Self {
        DensityField::Weighted {
            rho: CoefficientField::Constant(1.0),
            sigma: CoefficientField::Constant(1.0),
            p: 1.0,
            normalizer: domain.area(),
        }
    }

    pub fn function(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        DensityField::Function(Arc::new(f))
    }

    pub fn eval(&self, x: Point) -> f64 {
        match self {
            DensityField::Weighted { rho, sigma, p, normalizer } => {
                (rho.eval(x) / sigma.eval(x)).powf(1.0 / p) / normalizer
            }
            DensityField::Piecewise(m) => m.density(x),
            DensityField::Function(f) => f(x),
        }
    }

    pub fn integral(&self, quad: &Quadrature) -> f64 {
        match self {
            // Exact: cell areas are exact under the signed fan rule.
            DensityField::Piecewise(m) => m.total_mass(),
            _ => quad.integrate(|x| self.eval(x)),
        }
    }
}

/// One lattice cell of a fitted measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FittedCell {
    pub ix: i64,
    pub iy: i64,
    /// Density value on the cell.
    pub alpha: f64,
    /// Area of the cell clipped to the domain.
    pub area: f64,
}

impl FittedCell {
    pub fn mass(&self) -> f64 {
        self.alpha * self.area
    }
}

/// A piecewise-constant probability density on the lattice `(s Z)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedMeasure {
    side: f64,
    cells: Vec<FittedCell>,
}

impl FittedMeasure {
    pub fn new(side: f64, cells: Vec<FittedCell>) -> Result<Self> {
        if !(side > 0.0) {
            return Err(Error::InvalidInput("cell side must be positive".into()));
        }
        if cells.iter().any(|c| !(c.alpha > 0.0) || !(c.area > 0.0)) {
            return Err(Error::InvalidInput(
                "fitted cells need positive weight and area".into(),
            ));
        }
        Ok(FittedMeasure { side, cells })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn cells(&self) -> &[FittedCell] {
        &self.cells
    }

    pub fn cell_box(&self, c: &FittedCell) -> BoundingBox {
        let s = self.side;
        BoundingBox {
            min: Point::new(c.ix as f64 * s, c.iy as f64 * s),
            max: Point::new((c.ix + 1) as f64 * s, (c.iy + 1) as f64 * s),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass()).sum()
    }

    /// Density at `x`; zero outside the listed cells.
    pub fn density(&self, x: Point) -> f64 {
        let ix = (x.x / self.side).floor() as i64;
        let iy = (x.y / self.side).floor() as i64;
        self.cells
            .iter()
            .find(|c| c.ix == ix && c.iy == iy)
            .map_or(0.0, |c| c.alpha)
    }
}

/// Fits a piecewise-constant measure on `(s Z)^2` to the density `f`.
///
/// Each cell weight starts at the cell average `mu(Omega_i)/|Omega_i|` and
/// all weights are then rescaled together so the total mass is exactly one.
pub fn fit_measure_to_grid(f: &DensityField, s: f64, domain: &Domain) -> Result<FittedMeasure> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidInput(format!("cell side must be positive, got {s}")));
    }
    let bbox = domain.bbox();
    let extent = bbox.width().max(bbox.height());
    // Sub-cells nest inside lattice cells so every node maps to one cell.
    let sub = ((s / (extent / 128.0)).ceil() as i64).max(2);
    let quad = Quadrature::new(domain, s / sub as f64);
    let mut sums: BTreeMap<(i64, i64), (CompensatedSum, CompensatedSum)> = BTreeMap::new();
    for ((p, w), c) in quad.points().iter().zip(quad.weights()).zip(quad.cells()) {
        let key = (c.0.div_euclid(sub), c.1.div_euclid(sub));
        let v = f.eval(*p);
        if v < 0.0 || !v.is_finite() {
            return Err(Error::InvalidInput(format!(
                "density must be finite and non-negative, got {v} at ({}, {})",
                p.x, p.y
            )));
        }
        let e = sums.entry(key).or_default();
        e.0.add(w * v);
        e.1.add(*w);
    }
    let sums: Vec<((i64, i64), (f64, f64))> = sums
        .into_iter()
        .map(|(k, (m, a))| (k, (m.value(), a.value())))
        .collect();
    let total: f64 = sums.iter().map(|e| e.1 .0).sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "density integrates to {total}, not 1"
        )));
    }
    let mut cells: Vec<FittedCell> = sums
        .into_iter()
        .filter(|(_, (mass, area))| *area > 1e-14 * s * s && *mass > 0.0)
        .map(|((ix, iy), (mass, area))| FittedCell {
            ix,
            iy,
            alpha: mass / area,
            area,
        })
        .collect();
    let kept: f64 = cells.iter().map(|c| c.mass()).sum();
    for c in &mut cells {
        c.alpha /= kept;
    }
    cells.sort_by_key(|c| (c.iy, c.ix));
    FittedMeasure::new(s, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadrature_integrates_polynomials_exactly() {
        let d = Domain::unit_square();
        let q = Quadrature::with_resolution(&d, 3);
        assert_relative_eq!(q.integrate(|_| 1.0), 1.0, epsilon = 1e-14);
        assert_relative_eq!(q.integrate(|p| p.x * p.x * p.y), 1.0 / 6.0, epsilon = 1e-14);
        assert_relative_eq!(q.integrate(|p| p.x.powi(5)), 1.0 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn quadrature_handles_holes_and_unaligned_cells() {
        let outer = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let hole = polygon::regular_polygon(Point::new(1.0, 0.5), 0.3, 7);
        let hole_area = polygon::signed_area(&hole);
        let d = Domain::new(outer, vec![hole]).unwrap();
        let q = Quadrature::new(&d, 0.37);
        assert_relative_eq!(q.integrate(|_| 1.0), 2.0 - hole_area, epsilon = 1e-12);
        assert!(q.sample_points().iter().all(|p| d.contains(*p)));
    }

    #[test]
    fn uniform_fit_has_unit_weights() {
        let d = Domain::unit_square();
        let m = fit_measure_to_grid(&DensityField::uniform(&d), 0.5, &d).unwrap();
        assert_eq!(m.cells().len(), 4);
        for c in m.cells() {
            assert_relative_eq!(c.alpha, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn linear_density_fit() {
        // Oracle: the average of 2x over [0,1/2] is 1/2 and over [1/2,1] is 3/2.
        let d = Domain::unit_square();
        let f = DensityField::function(|p| 2.0 * p.x);
        let m = fit_measure_to_grid(&f, 0.5, &d).unwrap();
        for c in m.cells() {
            let expected = if c.ix == 0 { 0.5 } else { 1.5 };
            assert_relative_eq!(c.alpha, expected, epsilon = 1e-12);
        }
        assert_relative_eq!(m.total_mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_cell_weight_is_inverse_area() {
        let outer = polygon::regular_polygon(Point::new(0.5, 0.5), 0.45, 9);
        let area = polygon::signed_area(&outer);
        let d = Domain::new(outer, vec![]).unwrap();
        let f = DensityField::uniform(&d);
        let m = fit_measure_to_grid(&f, 1.0, &d).unwrap();
        assert_eq!(m.cells().len(), 1);
        assert_relative_eq!(m.cells()[0].alpha, 1.0 / area, epsilon = 1e-10);
    }

    #[test]
    fn rejects_unnormalized_density() {
        let d = Domain::unit_square();
        let f = DensityField::function(|_| 2.0);
        assert!(fit_measure_to_grid(&f, 0.5, &d).is_err());
    }
}
