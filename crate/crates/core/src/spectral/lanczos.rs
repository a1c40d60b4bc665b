//! Restarted Lanczos with full reorthogonalization for the largest
//! eigenpair of a symmetric operator.

use nalgebra::{DMatrix, SymmetricEigen};

use super::linalg::{axpy, dot, norm};

pub(crate) struct LanczosOutcome {
    /// Ritz value.
    #[cfg_attr(not(test), allow(dead_code))]
    pub value: f64,
    pub vector: Vec<f64>,
    /// Operator applications spent.
    pub applications: usize,
    /// Ritz residual `|beta s_m|` relative to the Ritz value.
    pub ritz_residual: f64,
}

/// Largest eigenpair of the symmetric operator `op` on `R^n`, starting
/// from `start`. Each cycle builds at most `cycle` Krylov vectors and
/// restarts from the current Ritz vector.
pub(crate) fn largest_eigenpair(
    n: usize,
    mut op: impl FnMut(&[f64]) -> Vec<f64>,
    start: &[f64],
    cycle: usize,
    max_applications: usize,
    tol: f64,
) -> LanczosOutcome {
    let mut v0 = start.to_vec();
    let mut applications = 0;
    let mut best = LanczosOutcome {
        value: 0.0,
        vector: v0.clone(),
        applications: 0,
        ritz_residual: f64::INFINITY,
    };
    if n == 1 {
        let w = op(&v0);
        return LanczosOutcome {
            value: w[0] / v0[0],
            vector: vec![1.0],
            applications: 1,
            ritz_residual: 0.0,
        };
    }
    let cycle = cycle.min(n).max(2);
    while applications < max_applications {
        let nv = norm(&v0);
        let mut basis: Vec<Vec<f64>> = vec![v0.iter().map(|x| x / nv).collect()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz: Option<(f64, Vec<f64>, f64)> = None;
        for j in 0..cycle {
            let mut w = op(&basis[j]);
            applications += 1;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            // Two passes of classical Gram-Schmidt against the whole basis.
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let b = norm(&w);
            let m = alpha.len();
            let mut t = DMatrix::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alpha[i];
                if i + 1 < m {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (imax, &theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(y.1))
                .unwrap();
            let s: Vec<f64> = eig.eigenvectors.column(imax).iter().copied().collect();
            let res = (b * s[m - 1]).abs() / theta.abs().max(f64::MIN_POSITIVE);
            ritz = Some((theta, s, res));
            let exhausted = b <= 1e-14 * theta.abs() || basis.len() == n;
            if res <= tol || exhausted || applications >= max_applications {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let (theta, s, res) = ritz.expect("at least one Lanczos step");
        let mut y = vec![0.0; n];
        for (q, c) in basis.iter().zip(&s) {
            axpy(*c, q, &mut y);
        }
        if res < best.ritz_residual {
            best = LanczosOutcome {
                value: theta,
                vector: y.clone(),
                applications,
                ritz_residual: res,
            };
        }
        best.applications = applications;
        if res <= tol {
            break;
        }
        v0 = y;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn diagonal_operator() {
        let d: Vec<f64> = (1..=200).map(|k| 1.0 / k as f64).collect();
        let out = largest_eigenpair(
            d.len(),
            |x| x.iter().zip(&d).map(|(a, b)| a * b).collect(),
            &vec![1.0; 200],
            40,
            400,
            1e-12,
        );
        assert_relative_eq!(out.value, 1.0, epsilon = 1e-12);
        assert!(out.vector[0].abs() > 0.999_999);
    }

    #[test]
    fn clustered_spectrum_needs_restarts() {
        // Largest eigenvalue separated by 1e-3 relative from the next.
        let mut d: Vec<f64> = (0..300).map(|k| 0.5 * (k as f64 / 300.0)).collect();
        d[17] = 1.0;
        d[42] = 0.999;
        let out = largest_eigenpair(
            d.len(),
            |x| x.iter().zip(&d).map(|(a, b)| a * b).collect(),
            &vec![1.0; 300],
            20,
            2000,
            1e-12,
        );
        assert_relative_eq!(out.value, 1.0, epsilon = 1e-11);
    }
}
