//! Closed-form constants and explicit inequalities: `Lambda_p`, the
//! sublevel-area bound `H(t)` with its root `tbar`, the eigenvalue upper
//! bound, and the rectangle eigenvalue and Cheeger formulas.

use std::f64::consts::PI;

use crate::discretize::{GridDiscretization, NodeClass};
use crate::error::{Error, Result};
use crate::geometry::{distance_to_set, union_length_with_boundary, CoefficientField, Domain, SigmaNetwork};

/// First Dirichlet eigenvalue of the one-dimensional p-Laplacian on `(0,1)`:
/// `(p-1) (2 pi / (p sin(pi/p)))^p` for `p > 1` and 2 at `p = 1`.
pub fn lambda_p_constant(p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("Lambda_p needs 1 <= p < inf, got {p}")));
    }
    if p == 1.0 {
        return Ok(2.0);
    }
    Ok((p - 1.0) * half_period(p).powf(p))
}

/// `2 pi / (p sin(pi/p))`, the half period of the p-sine.
fn half_period(p: f64) -> f64 {
    2.0 * PI / (p * (PI / p).sin())
}

/// Positive root of `2 L t + (kappa+1) pi t^2 = area`.
pub fn tbar(sigma_len: f64, area: f64, kappa: usize) -> Result<f64> {
    if !(area > 0.0) {
        return Err(Error::InvalidInput(format!("area must be positive, got {area}")));
    }
    if !(sigma_len >= 0.0) {
        return Err(Error::InvalidInput(format!("length must be non-negative, got {sigma_len}")));
    }
    if kappa < 1 {
        return Err(Error::InvalidInput("a domain has at least one boundary component".into()));
    }
    let c = (kappa + 1) as f64 * PI;
    // Rationalized root: no cancellation for large lengths.
    Ok(area / (sigma_len + (sigma_len * sigma_len + c * area).sqrt()))
}

/// `H(t) = 2 L t + (kappa+1) pi t^2`, capped at `area` beyond `tbar`.
pub fn h_of_t(t: f64, sigma_len: f64, area: f64, kappa: usize) -> Result<f64> {
    let tb = tbar(sigma_len, area, kappa)?;
    if t > tb {
        return Ok(area);
    }
    Ok((2.0 * sigma_len * t + (kappa + 1) as f64 * PI * t * t).min(area))
}

/// The quantities entering the length bounds for one configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthBoundContext {
    /// `H^1(sigma ∪ ∂domain)`.
    pub sigma_len: f64,
    pub area: f64,
    /// Number of boundary components of the domain.
    pub kappa: usize,
    pub tbar: f64,
    /// Measured maximum distance, when known.
    pub t_max: Option<f64>,
}

impl LengthBoundContext {
    pub fn new(sigma_len: f64, area: f64, kappa: usize) -> Result<Self> {
        Ok(LengthBoundContext {
            sigma_len,
            area,
            kappa,
            tbar: tbar(sigma_len, area, kappa)?,
            t_max: None,
        })
    }

    pub fn for_configuration(domain: &Domain, sigma: &SigmaNetwork) -> Result<Self> {
        Self::new(
            union_length_with_boundary(sigma, domain),
            domain.area(),
            domain.boundary_components(),
        )
    }

    pub fn with_max_distance(mut self, t_max: f64) -> Self {
        self.t_max = Some(t_max);
        self
    }

    pub fn h_of_t(&self, t: f64) -> f64 {
        if t > self.tbar {
            self.area
        } else {
            (2.0 * self.sigma_len * t + (self.kappa + 1) as f64 * PI * t * t).min(self.area)
        }
    }

    /// `Lambda_p / (2 tbar)^p * (1 + (kappa+1) pi tbar / L)`.
    pub fn upper_bound(&self, p: f64) -> Result<f64> {
        let lp = lambda_p_constant(p)?;
        let tb = self.tbar;
        Ok(lp / (2.0 * tb).powf(p) * (1.0 + (self.kappa + 1) as f64 * PI * tb / self.sigma_len))
    }
}

/// Upper bound for `lambda_p(domain \ sigma)` with unit coefficients.
pub fn upper_bound_lambda(domain: &Domain, sigma: &SigmaNetwork, p: f64) -> Result<f64> {
    LengthBoundContext::for_configuration(domain, sigma)?.upper_bound(p)
}

/// Upper bound with coefficients, via `lambda^{sigma,rho} <= (sup sigma / inf rho) lambda`.
pub fn upper_bound_lambda_weighted(
    domain: &Domain,
    sigma: &SigmaNetwork,
    p: f64,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
) -> Result<f64> {
    rho.check_positive(domain)?;
    sigma_coef.check_positive(domain)?;
    let (rho_min, _) = rho.range_over(&domain.bbox());
    let (_, sig_max) = sigma_coef.range_over(&domain.bbox());
    Ok(upper_bound_lambda(domain, sigma, p)? * sig_max / rho_min)
}

/// `pi^2 (n^2 + 1)`, the first eigenvalue of a `1/n x 1` rectangle.
pub fn lambda2_rectangle(n: usize) -> f64 {
    PI * PI * ((n * n) as f64 + 1.0)
}

/// Cheeger constant of the `1/n x 1` rectangle,
/// `n (1 + 1/n + sqrt((1-1/n)^2 + pi/n))`.
pub fn cheeger_rectangle(n: usize) -> f64 {
    let inv = 1.0 / n as f64;
    n as f64 * (1.0 + inv + ((1.0 - inv).powi(2) + PI * inv).sqrt())
}

/// The same constant in the form `(4 - pi) / (1 + 1/n - sqrt((1-1/n)^2 + pi/n))`.
pub fn cheeger_rectangle_quotient_form(n: usize) -> f64 {
    let inv = 1.0 / n as f64;
    (4.0 - PI) / (1.0 + inv - ((1.0 - inv).powi(2) + PI * inv).sqrt())
}

/// The first Dirichlet p-eigenfunction of `(0,1)`, scaled to maximum 1.
///
/// It solves `y' = c (1 - y^p)^(1/p)` on `[0, 1/2]` with `c` the half
/// period, and is symmetric about `1/2`.
#[derive(Clone, Debug)]
pub struct EigenProfile {
    /// Values on `[0, 1/2]` at equispaced points.
    table: Vec<f64>,
}

impl EigenProfile {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidInput(format!("eigen profile needs 1 < p < inf, got {p}")));
        }
        const STEPS: usize = 8192;
        let c = half_period(p);
        let dz = 0.5 / STEPS as f64;
        let rhs = |y: f64| c * (1.0 - y.clamp(0.0, 1.0).powf(p)).max(0.0).powf(1.0 / p);
        let mut table = Vec::with_capacity(STEPS + 1);
        let mut y = 0.0f64;
        table.push(y);
        for _ in 0..STEPS {
            let k1 = rhs(y);
            let k2 = rhs(y + 0.5 * dz * k1);
            let k3 = rhs(y + 0.5 * dz * k2);
            let k4 = rhs(y + dz * k3);
            y = (y + dz / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).min(1.0);
            table.push(y);
        }
        Ok(EigenProfile { table })
    }

    /// Value at `z`, extended by zero outside `[0,1]`.
    pub fn eval(&self, z: f64) -> f64 {
        if !(0.0..=1.0).contains(&z) {
            return 0.0;
        }
        let z = z.min(1.0 - z);
        let steps = self.table.len() - 1;
        let x = z / 0.5 * steps as f64;
        let i = (x.floor() as usize).min(steps - 1);
        let f = x - i as f64;
        self.table[i] * (1.0 - f) + self.table[i + 1] * f
    }
}

/// Node values of `g(d(x, sigma ∪ ∂domain))` with `g(t) = u_1(t / (2 tbar))`
/// for `t <= tbar` and `g = 1` beyond, zero on non-interior nodes.
pub fn distance_test_function(
    grid: &GridDiscretization,
    domain: &Domain,
    sigma: &SigmaNetwork,
    p: f64,
) -> Result<Vec<f64>> {
    let ctx = LengthBoundContext::for_configuration(domain, sigma)?;
    let profile = EigenProfile::new(p)?;
    Ok(grid
        .classes()
        .iter()
        .enumerate()
        .map(|(id, c)| {
            if *c != NodeClass::Interior {
                return 0.0;
            }
            let d = distance_to_set(grid.position(id), sigma, domain);
            profile.eval((d / (2.0 * ctx.tbar)).min(0.5))
        })
        .collect())
}
