//! Limit functionals as the length budget grows: optimal length densities,
//! limit values, empirical measures of networks and comb studies.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::bounds::lambda_p_constant;
use crate::error::{Error, Result};
use crate::geometry::{
    build_comb, build_grid_structure, CoefficientField, DensityField, Domain, FittedMeasure, Point, Quadrature,
    SigmaNetwork,
};
use crate::maxdist::max_distance;
use crate::spectral::lambda_p;

/// Quadrature cells across the larger side of the bounding box used by
/// the functions below that do not take a quadrature.
pub const DEFAULT_RESOLUTION: usize = 128;

/// Densities below this count as zero.
pub const DENSITY_FLOOR: f64 = 1e-12;

fn default_quadrature(domain: &Domain) -> Quadrature {
    Quadrature::with_resolution(domain, DEFAULT_RESOLUTION)
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("exponent must satisfy 1 <= p < inf, got {p}")));
    }
    Ok(())
}

/// `F(f) = (1/Lambda_p) sup rho / (sigma f^p)`, with the sup taken over the
/// quadrature sample points. Vanishing densities give `+inf`.
pub fn gamma_limit_f(
    f: &DensityField,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    p: f64,
    domain: &Domain,
) -> Result<f64> {
    gamma_limit_f_on(f, rho, sigma_coef, p, &default_quadrature(domain))
}

pub fn gamma_limit_f_on(
    f: &DensityField,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    p: f64,
    quad: &Quadrature,
) -> Result<f64> {
    let lp = lambda_p_constant(p)?;
    let sup = quad.sup(|x| {
        let v = f.eval(x);
        if v < DENSITY_FLOOR {
            f64::INFINITY
        } else {
            rho.eval(x) / (sigma_coef.eval(x) * v.powf(p))
        }
    });
    Ok(sup / lp)
}

/// `(1/2) sup 1/f`.
pub fn gamma_limit_f_infinity(f: &DensityField, domain: &Domain) -> f64 {
    gamma_limit_f_infinity_on(f, &default_quadrature(domain))
}

pub fn gamma_limit_f_infinity_on(f: &DensityField, quad: &Quadrature) -> f64 {
    0.5 * quad.sup(|x| {
        let v = f.eval(x);
        if v < DENSITY_FLOOR {
            f64::INFINITY
        } else {
            1.0 / v
        }
    })
}

/// `int (rho/sigma)^(1/p)` over the domain.
fn weight_integral(rho: &CoefficientField, sigma_coef: &CoefficientField, p: f64, quad: &Quadrature) -> f64 {
    quad.integrate(|x| (rho.eval(x) / sigma_coef.eval(x)).powf(1.0 / p))
}

/// The density proportional to `(rho/sigma)^(1/p)`.
pub fn optimal_density(
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    p: f64,
    domain: &Domain,
) -> Result<DensityField> {
    check_exponent(p)?;
    rho.check_positive(domain)?;
    sigma_coef.check_positive(domain)?;
    let quad = default_quadrature(domain);
    Ok(DensityField::Weighted {
        rho: *rho,
        sigma: *sigma_coef,
        p,
        normalizer: weight_integral(rho, sigma_coef, p, &quad),
    })
}

/// `(int (rho/sigma)^(1/p))^p / Lambda_p`.
pub fn limit_value(rho: &CoefficientField, sigma_coef: &CoefficientField, p: f64, domain: &Domain) -> Result<f64> {
    check_exponent(p)?;
    rho.check_positive(domain)?;
    sigma_coef.check_positive(domain)?;
    let quad = default_quadrature(domain);
    Ok(weight_integral(rho, sigma_coef, p, &quad).powf(p) / lambda_p_constant(p)?)
}

/// Normalized length of a network per lattice cell of side `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    side: f64,
    masses: BTreeMap<(i64, i64), f64>,
}

impl EmpiricalMeasure {
    pub fn side(&self) -> f64 {
        self.side
    }

    /// Cells with positive mass, by lattice index.
    pub fn cells(&self) -> impl Iterator<Item = ((i64, i64), f64)> + '_ {
        self.masses.iter().map(|(k, v)| (*k, *v))
    }

    pub fn mass(&self, ix: i64, iy: i64) -> f64 {
        self.masses.get(&(ix, iy)).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Per-cell `(cell_x, cell_y, mass, target)` against a fitted measure
    /// on the same lattice.
    pub fn compare(&self, target: &FittedMeasure) -> Result<Vec<DensityRow>> {
        if (target.side() - self.side).abs() > 1e-12 * self.side {
            return Err(Error::InvalidInput("lattices differ".into()));
        }
        let mut rows: Vec<DensityRow> = target
            .cells()
            .iter()
            .map(|c| DensityRow {
                cell_x: c.ix,
                cell_y: c.iy,
                mass: self.mass(c.ix, c.iy),
                target: c.mass(),
            })
            .collect();
        for (&(ix, iy), &m) in &self.masses {
            if !target.cells().iter().any(|c| c.ix == ix && c.iy == iy) {
                rows.push(DensityRow { cell_x: ix, cell_y: iy, mass: m, target: 0.0 });
            }
        }
        Ok(rows)
    }
}

/// One row of a density comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityRow {
    pub cell_x: i64,
    pub cell_y: i64,
    pub mass: f64,
    pub target: f64,
}

impl DensityRow {
    /// `|mass - target| / target`, infinite for an empty target.
    pub fn relative_deviation(&self) -> f64 {
        if self.target > 0.0 {
            (self.mass - self.target).abs() / self.target
        } else if self.mass > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

pub fn format_density_csv(rows: &[DensityRow]) -> String {
    let mut out = String::from("cell_x,cell_y,mass,target\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.cell_x, r.cell_y, r.mass, r.target);
    }
    out
}

/// Splits every segment at the lattice lines of `(s Z)^2` and assigns each
/// piece to the cell holding its midpoint. A piece lying on a lattice line
/// is shared equally by the adjacent cells that meet the bounding box of
/// the network.
pub fn empirical_measure(sigma: &SigmaNetwork, s: f64) -> Result<EmpiricalMeasure> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidInput(format!("cell side must be positive, got {s}")));
    }
    let total = sigma.length();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("empirical measure of a zero-length network".into()));
    }
    let bbox = sigma.bbox();
    // Lattice indices along one axis for a coordinate `v`.
    let owners = |v: f64, lo: f64, hi: f64| -> Vec<i64> {
        let k = (v / s).round();
        if (v / s - k).abs() > 1e-9 {
            return vec![(v / s).floor() as i64];
        }
        let k = k as i64;
        let meets = |i: i64| (i + 1) as f64 * s > lo && (i as f64) * s < hi;
        let both: Vec<i64> = [k - 1, k].into_iter().filter(|&i| meets(i)).collect();
        if both.is_empty() {
            vec![k - 1, k]
        } else {
            both
        }
    };
    let mut masses: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    for seg in sigma.segments() {
        let mut cuts = vec![0.0, 1.0];
        for (a, b) in [(seg.a.x, seg.b.x), (seg.a.y, seg.b.y)] {
            if a == b {
                continue;
            }
            let (lo, hi) = (a.min(b), a.max(b));
            let mut k = (lo / s).floor() as i64 + 1;
            while (k as f64) * s < hi {
                let t = (k as f64 * s - a) / (b - a);
                if t > 0.0 && t < 1.0 {
                    cuts.push(t);
                }
                k += 1;
            }
        }
        cuts.sort_by(f64::total_cmp);
        let len = seg.length();
        for w in cuts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let mid = seg.point_at(0.5 * (w[0] + w[1]));
            let xs = owners(mid.x, bbox.min.x, bbox.max.x);
            let ys = owners(mid.y, bbox.min.y, bbox.max.y);
            let share = (w[1] - w[0]) * len / total / (xs.len() * ys.len()) as f64;
            for &ix in &xs {
                for &iy in &ys {
                    *masses.entry((ix, iy)).or_insert(0.0) += share;
                }
            }
        }
    }
    Ok(EmpiricalMeasure { side: s, masses })
}

/// Checks `sigma` against the budget and the domain.
fn check_budget(sigma: &SigmaNetwork, budget: f64, domain: &Domain) -> Result<()> {
    if !(budget > 0.0) {
        return Err(Error::InvalidInput(format!("budget must be positive, got {budget}")));
    }
    sigma.check_admissible(domain, budget)
}

/// `L^p / lambda_p(domain \ sigma)` at grid spacing `h`.
#[allow(clippy::too_many_arguments)]
pub fn scaled_objective(
    sigma: &SigmaNetwork,
    budget: f64,
    p: f64,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    domain: &Domain,
    h: f64,
) -> Result<f64> {
    check_budget(sigma, budget, domain)?;
    let r = lambda_p(domain, sigma, rho, sigma_coef, p, h)?;
    Ok(budget.powf(p) / r.lambda)
}

/// `L max_x d(x, sigma ∪ ∂domain)`.
pub fn scaled_objective_infinity(sigma: &SigmaNetwork, budget: f64, domain: &Domain) -> Result<f64> {
    check_budget(sigma, budget, domain)?;
    Ok(budget * max_distance(domain, sigma, 1e-6).t)
}

/// Exponent of a study: finite `p > 1` or the max-distance limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

/// Family of structures in a study.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyStructure {
    /// `n+1` teeth and the lower base.
    Comb,
    /// `n+1` horizontal and `n+1` vertical lines.
    Grid,
}

/// One row of a study over `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaRow {
    pub n: usize,
    /// Length of the structure.
    pub length: f64,
    /// `lambda_p`, or the maximum distance for the infinity study.
    pub value: f64,
    /// `L^p / lambda_p`, or `L * max distance`.
    pub ratio: f64,
    /// `1 / Lambda_p`, or `1/2`.
    pub limit: f64,
}

/// Ratios of the unit-square structures `C_n` or grids for every `n`; the
/// eigenvalue is computed at `h = 1 / (cells_per_gap * n)`.
pub fn theta_study(
    p: Exponent,
    structure: StudyStructure,
    n_list: &[usize],
    cells_per_gap: usize,
) -> Result<Vec<ThetaRow>> {
    let domain = Domain::unit_square();
    let unit = CoefficientField::Constant(1.0);
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n == 0 {
            return Err(Error::InvalidInput("structures need n >= 1".into()));
        }
        let sigma = match structure {
            StudyStructure::Comb => build_comb(n),
            StudyStructure::Grid => build_grid_structure(n),
        };
        let length = sigma.length();
        let row = match p {
            Exponent::Finite(p) => {
                let h = 1.0 / (cells_per_gap.max(1) * n) as f64;
                let lambda = lambda_p(&domain, &sigma, &unit, &unit, p, h)?.lambda;
                ThetaRow {
                    n,
                    length,
                    value: lambda,
                    ratio: length.powf(p) / lambda,
                    limit: 1.0 / lambda_p_constant(p)?,
                }
            }
            Exponent::Infinity => {
                let t = max_distance(&domain, &sigma, 1e-6).t;
                ThetaRow { n, length, value: t, ratio: length * t, limit: 0.5 }
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

/// CSV with header `n,L,lambda,ratio,limit`.
pub fn format_theta_csv(rows: &[ThetaRow]) -> String {
    let mut out = String::from("n,L,lambda,ratio,limit\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.n, r.length, r.value, r.ratio, r.limit);
    }
    out
}

/// Uniform density on a domain, as a convenience for studies.
pub fn uniform_density(domain: &Domain) -> DensityField {
    DensityField::uniform(domain)
}

/// Midpoint of a lattice cell.
pub fn cell_center(side: f64, ix: i64, iy: i64) -> Point {
    Point::new((ix as f64 + 0.5) * side, (iy as f64 + 0.5) * side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fit_measure_to_grid, Segment};
    use crate::geometry::structures::unit_square_boundary;
    use crate::geometry::tiling::build_tiled_sigma;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit() -> CoefficientField {
        CoefficientField::Constant(1.0)
    }

    fn quadratic_rho() -> CoefficientField {
        CoefficientField::AffineSquared { a: 1.0, b: 1.0, c: 0.0 }
    }

    #[test]
    fn uniform_gamma_limit() {
        let d = Domain::unit_square();
        let f = DensityField::uniform(&d);
        assert_relative_eq!(gamma_limit_f(&f, &unit(), &unit(), 2.0, &d).unwrap(), 1.0 / (PI * PI), epsilon = 1e-12);
        assert_relative_eq!(gamma_limit_f_infinity(&f, &d), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn vanishing_density_is_infinite() {
        let d = Domain::unit_square();
        let f = DensityField::function(|x| if x.x < 0.5 { 2.0 } else { 0.0 });
        assert_eq!(gamma_limit_f(&f, &unit(), &unit(), 2.0, &d).unwrap(), f64::INFINITY);
        assert_eq!(gamma_limit_f_infinity(&f, &d), f64::INFINITY);
    }

    #[test]
    fn quadratic_weight_optimum() {
        let d = Domain::unit_square();
        let rho = quadratic_rho();
        let f = optimal_density(&rho, &unit(), 2.0, &d).unwrap();
        for x in [Point::new(0.0, 0.3), Point::new(0.4, 0.9), Point::new(1.0, 0.0)] {
            assert_relative_eq!(f.eval(x), (1.0 + x.x) / 1.5, epsilon = 1e-12);
        }
        let limit = limit_value(&rho, &unit(), 2.0, &d).unwrap();
        assert_relative_eq!(limit, 2.25 / (PI * PI), epsilon = 1e-12);
        let at_opt = gamma_limit_f(&f, &rho, &unit(), 2.0, &d).unwrap();
        assert_relative_eq!(at_opt, limit, max_relative = 1e-4);
        assert_relative_eq!(gamma_limit_f_infinity(&f, &d), 0.75, epsilon = 1e-6);
    }

    #[test]
    fn constant_coefficients_give_uniform_density() {
        let d = Domain::rectangle(Point::new(0.0, 0.0), 2.0, 0.5);
        let c = CoefficientField::Constant(3.0);
        let f = optimal_density(&c, &unit(), 2.0, &d).unwrap();
        assert_relative_eq!(f.eval(Point::new(1.3, 0.2)), 1.0, epsilon = 1e-12);
        assert_relative_eq!(limit_value(&unit(), &unit(), 1.0, &d).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn density_flattens_for_large_p() {
        let d = Domain::unit_square();
        let spread = |p: f64| {
            let f = optimal_density(&quadratic_rho(), &unit(), p, &d).unwrap();
            f.eval(Point::new(1.0, 0.5)) / f.eval(Point::new(0.0, 0.5))
        };
        assert_relative_eq!(spread(2.0), 2.0, epsilon = 1e-12);
        assert!(spread(16.0) < spread(4.0) && spread(16.0) < 2f64.powf(2.0 / 16.0) + 1e-12);
    }

    #[test]
    fn optimum_beats_perturbations() {
        let d = Domain::unit_square();
        let rho = CoefficientField::Exponential { a: 1.0, b: 0.8 };
        let sig = CoefficientField::Affine { a: 1.0, b: 0.0, c: 0.5 };
        let quad = Quadrature::with_resolution(&d, 64);
        let f = optimal_density(&rho, &sig, 2.0, &d).unwrap();
        let best = gamma_limit_f_on(&f, &rho, &sig, 2.0, &quad).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (a, kx, ky, ph): (f64, f64, f64, f64) =
                (rng.random_range(0.05..0.5), rng.random_range(1.0..4.0), rng.random_range(1.0..4.0), rng.random_range(0.0..6.3));
            let f0 = f.clone();
            let raw = move |x: Point| f0.eval(x) * (1.0 + a * (kx * x.x + ky * x.y + ph).sin());
            let norm = quad.integrate(&raw);
            let g = DensityField::function(move |x| raw(x) / norm);
            assert!(gamma_limit_f_on(&g, &rho, &sig, 2.0, &quad).unwrap() >= best - 1e-9);
        }
    }

    #[test]
    fn uniform_limit_approaches_infinity_functional() {
        // F^(1/p) for the uniform density grows toward (1/2 sup 1/f) = 1/2.
        let d = Domain::unit_square();
        let f = DensityField::uniform(&d);
        let vals: Vec<f64> = [2.0, 4.0, 8.0, 16.0, 256.0]
            .iter()
            .map(|&p| gamma_limit_f(&f, &unit(), &unit(), p, &d).unwrap().powf(1.0 / p))
            .collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]), "{vals:?}");
        assert!(vals[4] < 0.5 && vals[4] > 0.48);
    }

    #[test]
    fn empirical_measure_of_comb() {
        let m = empirical_measure(&build_comb(2), 0.5).unwrap();
        assert_relative_eq!(m.total(), 1.0, epsilon = 1e-12);
        // Outer teeth stay inside; the middle tooth is shared.
        assert_relative_eq!(m.mass(0, 0) + m.mass(0, 1), 0.5, epsilon = 1e-12);
        assert_relative_eq!(m.mass(1, 0) + m.mass(1, 1), 0.5, epsilon = 1e-12);
        // Bottom cell: half the outer tooth, half the shared one, half the base.
        assert_relative_eq!(m.mass(0, 0), (0.5 + 0.25 + 0.5) / 4.0, epsilon = 1e-12);
        assert_eq!(m.cells().count(), 4);
    }

    #[test]
    fn empirical_measure_single_cell() {
        let s = SigmaNetwork::from_segments(&[Segment::new(Point::new(0.1, 0.2), Point::new(0.4, 0.2))]).unwrap();
        let m = empirical_measure(&s, 0.5).unwrap();
        assert_eq!(m.cells().count(), 1);
        assert_relative_eq!(m.mass(0, 0), 1.0);
        assert!(empirical_measure(&SigmaNetwork::point(Point::new(0.0, 0.0)), 0.5).is_err());
    }

    #[test]
    fn tiled_network_follows_target() {
        let d = Domain::unit_square();
        let fitted = fit_measure_to_grid(&DensityField::uniform(&d), 0.25, &d).unwrap();
        let mut segs = unit_square_boundary();
        segs.push(Segment::new(Point::new(0.5, 0.0), Point::new(0.5, 1.0)));
        let tile = SigmaNetwork::from_segments(&segs).unwrap();
        let sigma = build_tiled_sigma(200.0, &fitted, &tile, &d).unwrap();
        let rows = empirical_measure(&sigma, 0.25).unwrap().compare(&fitted).unwrap();
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().all(|r| r.relative_deviation() <= 0.1));
        let csv = format_density_csv(&rows);
        assert!(csv.starts_with("cell_x,cell_y,mass,target\n"));
    }

    #[test]
    fn comb_objectives() {
        let d = Domain::unit_square();
        let n = 4usize;
        let l = (n + 2) as f64;
        let inf = scaled_objective_infinity(&build_comb(n), l, &d).unwrap();
        assert_relative_eq!(inf, l / (2.0 * n as f64), epsilon = 1e-5);
        let twice = scaled_objective_infinity(&build_comb(n), 2.0 * l, &d).unwrap();
        assert_relative_eq!(twice, 2.0 * inf, epsilon = 1e-5);
        let f = scaled_objective(&build_comb(n), l, 2.0, &unit(), &unit(), &d, 1.0 / 64.0).unwrap();
        let f2 = scaled_objective(&build_comb(n), 2.0 * l, 2.0, &unit(), &unit(), &d, 1.0 / 64.0).unwrap();
        assert_relative_eq!(f2, 4.0 * f, max_relative = 1e-12);
        assert_relative_eq!(f, l * l / (PI * PI * 17.0), max_relative = 0.02);
        assert!(scaled_objective(&build_comb(n), 5.0, 2.0, &unit(), &unit(), &d, 1.0 / 64.0).is_err());
    }

    #[test]
    fn infinity_study_rows() {
        let rows = theta_study(Exponent::Infinity, StudyStructure::Comb, &[2, 4, 8, 16], 1).unwrap();
        for (r, expected) in rows.iter().zip([1.0, 0.75, 0.625, 0.5625]) {
            assert_relative_eq!(r.ratio, expected, epsilon = 1e-5);
        }
        let csv = format_theta_csv(&rows);
        assert!(csv.starts_with("n,L,lambda,ratio,limit\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn finite_study_decreases() {
        let rows = theta_study(Exponent::Finite(2.0), StudyStructure::Comb, &[2, 4, 8], 16).unwrap();
        assert!(rows.windows(2).all(|w| w[0].ratio > w[1].ratio));
        assert!(rows.iter().all(|r| r.ratio > r.limit));
    }
}
