//! Minimization of a scale-invariant quotient `E(u) / D(u)` by
//! preconditioned nonlinear conjugate gradients on `ln E - ln D`.

use super::linalg::{dot, norm};

/// A quotient to minimize together with a preconditioner (an approximate
/// inverse Hessian, typically the inverse of a stiffness matrix).
pub(crate) trait Quotient {
    /// `(E, D)` and, when requested, their gradients.
    fn parts(&self, u: &[f64], grads: Option<(&mut [f64], &mut [f64])>) -> (f64, f64);
    fn precondition(&self, g: &[f64]) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct DescentOptions {
    pub max_iterations: usize,
    /// Convergence: relative quotient decrease below `rel_tol` over `window`
    /// iterations.
    pub window: usize,
    pub rel_tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            max_iterations: 5000,
            window: 50,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct DescentOutcome {
    pub u: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `||grad E - R grad D|| / ||R grad D||` at the returned point.
    pub residual: f64,
}

fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn scale(u: &mut [f64], s: f64) {
    u.iter_mut().for_each(|x| *x *= s);
}

struct Point {
    u: Vec<f64>,
    e: f64,
    d: f64,
    g: Vec<f64>,
    ge: Vec<f64>,
    gd: Vec<f64>,
}

impl Point {
    fn at(q: &impl Quotient, mut u: Vec<f64>) -> Point {
        let m = max_abs(&u);
        if m > 0.0 {
            scale(&mut u, 1.0 / m);
        }
        let n = u.len();
        let mut ge = vec![0.0; n];
        let mut gd = vec![0.0; n];
        let (e, d) = q.parts(&u, Some((&mut ge, &mut gd)));
        let g = ge.iter().zip(&gd).map(|(a, b)| a / e - b / d).collect();
        Point { u, e, d, g, ge, gd }
    }

    fn value(&self) -> f64 {
        self.e / self.d
    }

    fn residual(&self) -> f64 {
        let r = self.value();
        let diff: Vec<f64> = self.ge.iter().zip(&self.gd).map(|(a, b)| a - r * b).collect();
        let base: f64 = norm(&self.gd) * r;
        if base > 0.0 {
            norm(&diff) / base
        } else {
            f64::INFINITY
        }
    }
}

pub(crate) fn minimize_quotient(q: &impl Quotient, u0: Vec<f64>, opts: &DescentOptions) -> DescentOutcome {
    const ARMIJO: f64 = 1e-4;
    let mut cur = Point::at(q, u0);
    let mut z = q.precondition(&cur.g);
    let mut gz = dot(&cur.g, &z);
    let mut dir: Vec<f64> = z.iter().map(|x| -x).collect();
    let mut step = {
        let m = max_abs(&dir);
        if m > 0.0 { 0.1 / m } else { 1.0 }
    };
    let mut history = vec![cur.value()];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let f0 = cur.value().ln();
        let mut slope = dot(&cur.g, &dir);
        if !(slope < 0.0) {
            dir = z.iter().map(|x| -x).collect();
            slope = -gz;
        }
        if !(slope < 0.0) {
            converged = true;
            break;
        }
        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = cur.u.iter().zip(&dir).map(|(u, d)| u + alpha * d).collect();
            let (e, d) = q.parts(&trial, None);
            let f = (e / d).ln();
            if f.is_finite() && f <= f0 + ARMIJO * alpha * slope {
                accepted = Some(trial);
                break;
            }
            alpha *= 0.5;
        }
        let Some(trial) = accepted else {
            // No descent along a restarted direction: at the floor of
            // floating point progress.
            let steepest = z.iter().zip(&dir).all(|(a, b)| *b == -*a);
            if steepest {
                converged = true;
                break;
            }
            dir = z.iter().map(|x| -x).collect();
            continue;
        };
        // Point::at rescales u; the direction is carried along.
        let s = 1.0 / max_abs(&trial).max(f64::MIN_POSITIVE);
        let next = Point::at(q, trial);
        let z_next = q.precondition(&next.g);
        let gz_next = dot(&next.g, &z_next);
        let beta = if gz > 0.0 {
            (next.g.iter().zip(&z_next).zip(&z).map(|((g, zn), zo)| g * (zn - zo)).sum::<f64>() / gz).max(0.0)
        } else {
            0.0
        };
        dir = z_next.iter().zip(&dir).map(|(zn, d)| -zn + beta * s * d).collect();
        z = z_next;
        gz = gz_next;
        step = (2.0 * alpha * s).min(1e6);
        cur = next;
        history.push(cur.value());
        let k = history.len() - 1;
        if k >= opts.window {
            let old = history[k - opts.window];
            if (old - history[k]) <= opts.rel_tol * history[k] {
                converged = true;
                break;
            }
        }
    }
    let residual = cur.residual();
    let value = cur.value();
    DescentOutcome {
        u: cur.u,
        value,
        iterations,
        converged,
        residual,
    }
}
