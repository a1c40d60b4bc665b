//! First eigenvalues of the weighted p-Laplacian with Dirichlet conditions
//! on a domain minus a network.
//!
//! For `p = 2` the smallest generalized eigenpair of the five-point
//! stiffness `K` (edge-midpoint `sigma`) and the lumped mass `M = h^2 rho`
//! is found on every connected component by shift-invert Lanczos. For other
//! `p` the discrete Rayleigh quotient is minimized from the `p = 2`
//! eigenfunction. The eigenvalue of the whole set is the minimum over its
//! components.

mod descent;
mod lanczos;
mod linalg;
mod operator;

use std::collections::HashMap;

use crate::discretize::{discretize_with_band, GridDiscretization, NodeClass, DEFAULT_BAND_FACTOR};
use crate::error::{Error, Result};
use crate::geometry::{CoefficientField, Domain, SigmaNetwork};
use crate::maxdist::max_distance;

use descent::{minimize_quotient, DescentOptions, Quotient};
use linalg::{solve_tridiagonal, SpdSolver};
use operator::NodeOperator;

/// Knobs shared by the eigen solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Relative residual required of a `p = 2` eigenpair.
    pub tol: f64,
    /// Linear solves allowed per component for `p = 2`.
    pub max_solves: usize,
    /// Krylov vectors per Lanczos cycle.
    pub lanczos_cycle: usize,
    pub max_descent_iterations: usize,
    /// Descent stops once the quotient decreased by less than
    /// `descent_rel_tol` (relative) over `descent_window` iterations.
    pub descent_window: usize,
    pub descent_rel_tol: f64,
    /// Dirichlet band width in units of `h`.
    pub band_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_solves: 500,
            lanczos_cycle: 80,
            max_descent_iterations: 5000,
            descent_window: 50,
            descent_rel_tol: 1e-10,
            band_factor: DEFAULT_BAND_FACTOR,
        }
    }
}

/// A computed first eigenpair.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub lambda: f64,
    /// Values on the grid unknowns (zero off the minimizing component),
    /// normalized so that `h^2 sum rho |u|^p = 1`, non-negative.
    pub eigenfunction: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub h: f64,
    pub p: f64,
    /// Index (in [`GridDiscretization::connected_components`] order) of the
    /// component attaining the minimum.
    pub component_id: usize,
    pub component_count: usize,
    pub converged: bool,
    /// Resolution warnings from the discretization.
    pub warnings: Vec<String>,
}

struct ComponentSolution {
    lambda: f64,
    u: Vec<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
}

fn check_coefficients(domain: &Domain, rho: &CoefficientField, sigma: &CoefficientField) -> Result<()> {
    rho.check_positive(domain)?;
    sigma.check_positive(domain)
}

/// `lambda_2` with default options.
pub fn lambda2(
    domain: &Domain,
    sigma: &SigmaNetwork,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    h: f64,
) -> Result<EigenResult> {
    lambda_p(domain, sigma, rho, sigma_coef, 2.0, h)
}

/// `lambda_p` for `p > 1` with default options.
pub fn lambda_p(
    domain: &Domain,
    sigma: &SigmaNetwork,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    p: f64,
    h: f64,
) -> Result<EigenResult> {
    lambda_p_with(domain, sigma, rho, sigma_coef, p, h, &SolverOptions::default())
}

pub fn lambda_p_with(
    domain: &Domain,
    sigma: &SigmaNetwork,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    p: f64,
    h: f64,
    opts: &SolverOptions,
) -> Result<EigenResult> {
    check_coefficients(domain, rho, sigma_coef)?;
    let grid = discretize_with_band(domain, sigma, h, opts.band_factor)?;
    lambda_p_on_grid(&grid, rho, sigma_coef, p, opts)
}

/// `lambda_p` on an existing discretization. Coefficients are not checked
/// for positivity here.
pub fn lambda_p_on_grid(
    grid: &GridDiscretization,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    p: f64,
    opts: &SolverOptions,
) -> Result<EigenResult> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!(
            "lambda_p needs 1 < p < inf, got {p}"
        )));
    }
    let comps = grid.connected_components();
    let cacheable = rho.is_constant() && sigma_coef.is_constant();
    let mut cache: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut solutions: Vec<(usize, ComponentSolution)> = Vec::new();
    let mut best: Option<(usize, usize)> = None; // (component, solution index)
    let mut iterations = 0;
    for (ci, nodes) in comps.iter().enumerate() {
        let op = NodeOperator::new(grid, nodes.clone(), rho, sigma_coef);
        let key = cacheable.then(|| op.shape_key(grid.nx()));
        let idx = match key.as_ref().and_then(|k| cache.get(k)) {
            Some(&i) => i,
            None => {
                let sol = solve_component(&op, p, opts)?;
                iterations += sol.iterations;
                solutions.push((ci, sol));
                let i = solutions.len() - 1;
                if let Some(k) = key {
                    cache.insert(k, i);
                }
                i
            }
        };
        let better = match best {
            None => true,
            Some((_, b)) => solutions[idx].1.lambda < solutions[b].1.lambda,
        };
        if better {
            best = Some((ci, idx));
        }
    }
    let (ci, si) = best.expect("a discretization has at least one component");
    let sol = &solutions[si].1;
    let mut eigenfunction = vec![0.0; grid.unknown_count()];
    let unknown = grid.unknown_index();
    for (k, &id) in comps[ci].iter().enumerate() {
        eigenfunction[unknown[id]] = sol.u[k];
    }
    Ok(EigenResult {
        lambda: sol.lambda,
        eigenfunction,
        residual: sol.residual,
        iterations,
        h: grid.h(),
        p,
        component_id: ci,
        component_count: comps.len(),
        converged: solutions.iter().all(|(_, s)| s.converged),
        warnings: grid.warnings().to_vec(),
    })
}

fn solve_component(op: &NodeOperator, p: f64, opts: &SolverOptions) -> Result<ComponentSolution> {
    let solver = SpdSolver::new(&op.stiffness, &op.orderings, 1e-13)?;
    let mut sol = solve_quadratic(op, &solver, opts)?;
    if p != 2.0 {
        let q = PQuotient {
            op,
            solver: &solver,
            p,
            eps2: if p < 2.0 { 1e-16 } else { 0.0 },
        };
        let dopts = DescentOptions {
            max_iterations: opts.max_descent_iterations,
            window: opts.descent_window,
            rel_tol: opts.descent_rel_tol,
        };
        let out = minimize_quotient(&q, sol.u.clone(), &dopts);
        let u: Vec<f64> = out.u.iter().map(|x| x.abs()).collect();
        let (e, d) = op.quotient_parts(&u, p);
        sol = ComponentSolution {
            lambda: e / d,
            u,
            residual: out.residual,
            iterations: sol.iterations + out.iterations,
            converged: out.converged,
        };
    }
    normalize(&mut sol.u, op, p);
    Ok(sol)
}

/// Scales `u` to `h^2 sum rho |u|^p = 1`.
fn normalize(u: &mut [f64], op: &NodeOperator, p: f64) {
    let d = op.denominator(u, p, None);
    if d > 0.0 {
        let s = d.powf(-1.0 / p);
        u.iter_mut().for_each(|x| *x *= s);
    }
}

fn generalized_residual(op: &NodeOperator, mass: &[f64], u: &[f64], lambda: f64) -> f64 {
    let ku = op.stiffness.mul_vec(u);
    let mu: Vec<f64> = u.iter().zip(mass).map(|(a, m)| a * m).collect();
    let r: Vec<f64> = ku.iter().zip(&mu).map(|(k, m)| k - lambda * m).collect();
    linalg::norm(&r) / (lambda * linalg::norm(&mu))
}

fn rayleigh(op: &NodeOperator, mass: &[f64], u: &[f64]) -> f64 {
    let ku = op.stiffness.mul_vec(u);
    linalg::dot(u, &ku) / u.iter().zip(mass).map(|(a, m)| a * a * m).sum::<f64>()
}

fn solve_quadratic(op: &NodeOperator, solver: &SpdSolver, opts: &SolverOptions) -> Result<ComponentSolution> {
    let mass = op.mass();
    let dsqrt: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
    let n = op.len();
    let apply = |x: &[f64]| {
        let b: Vec<f64> = x.iter().zip(&dsqrt).map(|(a, d)| a * d).collect();
        let y = solver.solve(&b);
        y.iter().zip(&dsqrt).map(|(a, d)| a * d).collect::<Vec<f64>>()
    };
    let budget = opts.max_solves.max(2);
    let out = lanczos::largest_eigenpair(
        n,
        apply,
        &dsqrt,
        opts.lanczos_cycle,
        budget.saturating_sub(5).max(1),
        1e-12,
    );
    let mut solves = out.applications;
    let mut u: Vec<f64> = out.vector.iter().zip(&dsqrt).map(|(y, d)| y / d).collect();
    if u.iter().sum::<f64>() < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    let mut lambda = rayleigh(op, &mass, &u);
    let mut residual = generalized_residual(op, &mass, &u, lambda);
    // Inverse iteration damps whatever high-frequency error Lanczos left.
    while residual > opts.tol && solves < budget {
        let mu: Vec<f64> = u.iter().zip(&mass).map(|(a, m)| a * m).collect();
        u = solver.solve(&mu);
        solves += 1;
        let s = linalg::norm(&u);
        u.iter_mut().for_each(|x| *x /= s);
        lambda = rayleigh(op, &mass, &u);
        residual = generalized_residual(op, &mass, &u, lambda);
    }
    if residual > opts.tol {
        return Err(Error::NotConverged {
            iterations: solves,
            residual,
        });
    }
    if u.iter().any(|x| *x < -1e-8 * linalg::norm(&u)) {
        return Err(Error::InvalidInput(
            "first eigenfunction changes sign; component solve is unreliable".into(),
        ));
    }
    u.iter_mut().for_each(|x| *x = x.max(0.0));
    Ok(ComponentSolution {
        lambda,
        u,
        residual,
        iterations: solves,
        converged: true,
    })
}

struct PQuotient<'a> {
    op: &'a NodeOperator,
    solver: &'a SpdSolver,
    p: f64,
    eps2: f64,
}

impl Quotient for PQuotient<'_> {
    fn parts(&self, u: &[f64], grads: Option<(&mut [f64], &mut [f64])>) -> (f64, f64) {
        match grads {
            Some((ge, gd)) => (
                self.op.energy(u, self.p, self.eps2, Some(ge)),
                self.op.denominator(u, self.p, Some(gd)),
            ),
            None => self.op.quotient_parts(u, self.p),
        }
    }

    fn precondition(&self, g: &[f64]) -> Vec<f64> {
        self.solver.solve(g)
    }
}

/// `lambda_infinity = 1 / max_x d(x, sigma ∪ ∂domain)`.
pub fn lambda_infinity(domain: &Domain, sigma: &SigmaNetwork) -> f64 {
    1.0 / max_distance(domain, sigma, 1e-6).t
}

/// Discrete first Dirichlet p-eigenvalue of the unit interval with
/// `n_nodes` interior nodes.
pub fn lambda_1d(p: f64, n_nodes: usize) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("lambda_1d needs 1 < p < inf, got {p}")));
    }
    if n_nodes < 2 {
        return Err(Error::InvalidInput("lambda_1d needs at least two nodes".into()));
    }
    let h = 1.0 / (n_nodes + 1) as f64;
    let q = Interval { n: n_nodes, h, p };
    let u0: Vec<f64> = (1..=n_nodes)
        .map(|i| (std::f64::consts::PI * i as f64 * h).sin())
        .collect();
    let out = minimize_quotient(&q, u0, &DescentOptions::default());
    Ok(out.value)
}

struct Interval {
    n: usize,
    h: f64,
    p: f64,
}

impl Quotient for Interval {
    fn parts(&self, u: &[f64], grads: Option<(&mut [f64], &mut [f64])>) -> (f64, f64) {
        let (n, h, p) = (self.n, self.h, self.p);
        let at = |i: isize| if i < 0 || i as usize >= n { 0.0 } else { u[i as usize] };
        let scale_e = h.powf(1.0 - p);
        let mut e = 0.0;
        let mut d = 0.0;
        let mut grads = grads;
        if let Some((ge, gd)) = grads.as_mut() {
            ge.iter_mut().for_each(|x| *x = 0.0);
            gd.iter_mut().for_each(|x| *x = 0.0);
        }
        let eps2: f64 = if p < 2.0 { 1e-16 } else { 0.0 };
        for k in 0..=n as isize {
            let du = at(k) - at(k - 1);
            let a = du.abs();
            e += scale_e * a.powf(p);
            if let Some((ge, _)) = grads.as_mut() {
                let g = scale_e * p * (du * du + eps2).powf(0.5 * p - 1.0) * du;
                if k < n as isize {
                    ge[k as usize] += g;
                }
                if k >= 1 {
                    ge[k as usize - 1] -= g;
                }
            }
        }
        for i in 0..n {
            let a = u[i].abs();
            d += h * a.powf(p);
            if let Some((_, gd)) = grads.as_mut() {
                gd[i] = h * p * a.powf(p - 1.0) * u[i].signum();
            }
        }
        (e, d)
    }

    fn precondition(&self, g: &[f64]) -> Vec<f64> {
        let d = vec![2.0; self.n];
        let e = vec![-1.0; self.n - 1];
        solve_tridiagonal(&d, &e, g)
    }
}

/// Discrete Rayleigh quotient of node values `u` (one per grid node) on a
/// discretization. `u` must vanish off the interior nodes.
pub fn rayleigh_quotient_on_grid(
    grid: &GridDiscretization,
    u: &[f64],
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    p: f64,
) -> Result<f64> {
    if u.len() != grid.classes().len() {
        return Err(Error::InvalidInput(format!(
            "expected {} node values, got {}",
            grid.classes().len(),
            u.len()
        )));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("p must satisfy 1 < p < inf, got {p}")));
    }
    if grid
        .classes()
        .iter()
        .zip(u)
        .any(|(c, v)| *c != NodeClass::Interior && *v != 0.0)
    {
        return Err(Error::InvalidInput(
            "test function must vanish on Dirichlet and exterior nodes".into(),
        ));
    }
    let op = NodeOperator::new(grid, grid.interior_nodes().to_vec(), rho, sigma_coef);
    let local: Vec<f64> = grid.interior_nodes().iter().map(|&id| u[id]).collect();
    let (e, d) = op.quotient_parts(&local, p);
    if !(d > 0.0) {
        return Err(Error::InvalidInput("test function is identically zero".into()));
    }
    Ok(e / d)
}

/// Rayleigh quotient of node values `u` on the grid built from the inputs.
#[allow(clippy::too_many_arguments)]
pub fn rayleigh_quotient(
    u: &[f64],
    domain: &Domain,
    sigma: &SigmaNetwork,
    rho: &CoefficientField,
    sigma_coef: &CoefficientField,
    p: f64,
    h: f64,
) -> Result<f64> {
    let grid = discretize_with_band(domain, sigma, h, DEFAULT_BAND_FACTOR)?;
    rayleigh_quotient_on_grid(&grid, u, rho, sigma_coef, p)
}
