//! Sparse symmetric matrices and the linear solvers used by the eigen
//! solvers.

use crate::error::{Error, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Compressed sparse rows, full symmetric storage.
#[derive(Clone, Debug)]
pub(crate) struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub(crate) fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub(crate) fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub(crate) fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul(x, &mut y);
        y
    }

    pub(crate) fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).find(|(j, _)| *j == i).map_or(0.0, |(_, v)| v))
            .collect()
    }

    /// Half bandwidth under the ordering `perm` (new index -> old index).
    pub(crate) fn bandwidth_under(&self, inverse: &[usize]) -> usize {
        let mut bw = 0;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                bw = bw.max(inverse[i].abs_diff(inverse[j]));
            }
        }
        bw
    }

    #[cfg(test)]
    pub(crate) fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Cholesky factor of a symmetric positive definite band matrix.
#[derive(Clone, Debug)]
pub(crate) struct BandedCholesky {
    n: usize,
    bw: usize,
    /// Row `i` holds columns `i - bw ..= i` (absent columns are zero).
    data: Vec<f64>,
}

impl BandedCholesky {
    /// Factors `P A P^T` where `inverse[old] = new`.
    pub(crate) fn factor(a: &CsrMatrix, inverse: &[usize], bw: usize) -> Result<Self> {
        let n = a.n();
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for old in 0..n {
            let i = inverse[old];
            for (c, v) in a.row(old) {
                let j = inverse[c];
                if j <= i {
                    data[i * w + (j + bw - i)] = v;
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut sum = data[i * w + (j + bw - i)];
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                for k in k0..j {
                    sum -= data[ri + k] * data[rj + k];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return Err(Error::InvalidInput(
                            "matrix is not positive definite".into(),
                        ));
                    }
                    data[ri + i] = sum.sqrt();
                } else {
                    data[ri + j] = sum / data[rj + j];
                }
            }
        }
        Ok(BandedCholesky { n, bw, data })
    }

    /// Solves in the permuted ordering, in place.
    pub(crate) fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let ri = i * w + bw - i;
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.data[ri + k] * x[k];
            }
            x[i] = s / self.data[ri + i];
        }
        for i in (0..n).rev() {
            let ri = i * w + bw - i;
            x[i] /= self.data[ri + i];
            let xi = x[i];
            for k in i.saturating_sub(bw)..i {
                x[k] -= self.data[ri + k] * xi;
            }
        }
    }
}

/// Maximum number of stored band entries before falling back to CG.
pub(crate) const BAND_STORAGE_LIMIT: usize = 25_000_000;

/// Solver for `K x = b` with `K` symmetric positive definite.
#[derive(Clone, Debug)]
pub(crate) enum SpdSolver {
    Banded {
        factor: BandedCholesky,
        /// `inverse[old] = new`
        inverse: Vec<usize>,
    },
    Cg {
        matrix: CsrMatrix,
        inv_diag: Vec<f64>,
        tol: f64,
    },
}

impl SpdSolver {
    /// Chooses between the two orderings supplied (by their inverse maps)
    /// and factors when the band fits in memory.
    pub(crate) fn new(k: &CsrMatrix, orderings: &[Vec<usize>], cg_tol: f64) -> Result<Self> {
        let best = orderings
            .iter()
            .map(|inv| (k.bandwidth_under(inv), inv))
            .min_by_key(|(bw, _)| *bw);
        if let Some((bw, inv)) = best {
            if k.n().saturating_mul(bw + 1) <= BAND_STORAGE_LIMIT {
                let factor = BandedCholesky::factor(k, inv, bw)?;
                return Ok(SpdSolver::Banded {
                    factor,
                    inverse: inv.clone(),
                });
            }
        }
        Ok(SpdSolver::cg(k.clone(), cg_tol))
    }

    pub(crate) fn cg(matrix: CsrMatrix, tol: f64) -> Self {
        let inv_diag = matrix.diagonal().iter().map(|d| 1.0 / d).collect();
        SpdSolver::Cg { matrix, inv_diag, tol }
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            SpdSolver::Banded { factor, inverse } => {
                let mut x = vec![0.0; b.len()];
                for (old, &new) in inverse.iter().enumerate() {
                    x[new] = b[old];
                }
                factor.solve_in_place(&mut x);
                inverse.iter().map(|&new| x[new]).collect()
            }
            SpdSolver::Cg { matrix, inv_diag, tol } => pcg(matrix, inv_diag, b, *tol, 20 * b.len() + 100),
        }
    }
}

/// Jacobi-preconditioned conjugate gradients from a zero start.
pub(crate) fn pcg(a: &CsrMatrix, inv_diag: &[f64], b: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return x;
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if norm(&r) <= tol * bnorm {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

/// Symmetric tridiagonal solve (Thomas algorithm) with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i + 1`).
pub(crate) fn solve_tridiagonal(d: &[f64], e: &[f64], b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = d[0];
    x[0] = b[0] / denom;
    for i in 1..n {
        c[i - 1] = e[i - 1] / denom;
        denom = d[i] - e[i - 1] * c[i - 1];
        x[i] = (b[i] - e[i - 1] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// 2D Dirichlet Laplacian on an `m x m` node block, row-major.
    fn laplacian(m: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for j in 0..m {
            for i in 0..m {
                let id = j * m + i;
                t.push((id, id, 4.0));
                if i + 1 < m {
                    t.push((id, id + 1, -1.0));
                    t.push((id + 1, id, -1.0));
                }
                if j + 1 < m {
                    t.push((id, id + m, -1.0));
                    t.push((id + m, id, -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(m * m, t)
    }

    #[test]
    fn banded_and_cg_agree_with_dense() {
        let m = 9;
        let k = laplacian(m);
        let n = m * m;
        let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let identity: Vec<usize> = (0..n).collect();
        let column_major: Vec<usize> = (0..n).map(|id| (id % m) * m + id / m).collect();
        let banded = SpdSolver::new(&k, &[identity, column_major], 1e-12).unwrap();
        assert!(matches!(banded, SpdSolver::Banded { .. }));
        let cg = SpdSolver::cg(k.clone(), 1e-13);
        let dense = k.to_dense().cholesky().unwrap().solve(&nalgebra::DVector::from_vec(b.clone()));
        let xb = banded.solve(&b);
        let xc = cg.solve(&b);
        for i in 0..n {
            assert_relative_eq!(xb[i], dense[i], epsilon = 1e-12);
            assert_relative_eq!(xc[i], dense[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn permuted_band_is_correct() {
        // A non-trivial permutation exercises the reordering path.
        let m = 5;
        let k = laplacian(m);
        let n = m * m;
        let inverse: Vec<usize> = (0..n).map(|i| n - 1 - i).collect();
        let bw = k.bandwidth_under(&inverse);
        assert_eq!(bw, m);
        let f = BandedCholesky::factor(&k, &inverse, bw).unwrap();
        let solver = SpdSolver::Banded { factor: f, inverse };
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = k.mul_vec(&x_true);
        let x = solver.solve(&b);
        for i in 0..n {
            assert_relative_eq!(x[i], x_true[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn tridiagonal_solve() {
        let d = vec![2.0; 6];
        let e = vec![-1.0; 5];
        let x_true = [1.0, -2.0, 0.5, 3.0, 0.0, 1.5];
        let mut b = vec![0.0; 6];
        for i in 0..6 {
            b[i] = 2.0 * x_true[i];
            if i > 0 {
                b[i] -= x_true[i - 1];
            }
            if i < 5 {
                b[i] -= x_true[i + 1];
            }
        }
        let x = solve_tridiagonal(&d, &e, &b);
        for i in 0..6 {
            assert_relative_eq!(x[i], x_true[i], epsilon = 1e-13);
        }
    }
}
