//! Discrete operators on a set of interior grid nodes.
//!
//! The p-energy of a node function is a sum over grid cells. Each cell
//! corner pairs the horizontal and vertical cell edges meeting there into a
//! gradient `(dx, dy)` and contributes
//! `(h^2/4) sbar^(1-p/2) (s_h dx^2 + s_v dy^2)^(p/2)`, with `s_h`, `s_v` the
//! edge-midpoint values of `sigma` and `sbar` their mean. At `p = 2` the sum
//! is exactly the five-point form `sum_edges s_e (u_i - u_j)^2`.

use crate::discretize::{GridDiscretization, NodeClass};
use crate::geometry::{CoefficientField, Point};

use super::linalg::CsrMatrix;

pub(crate) const NONE: usize = usize::MAX;

/// One grid cell touching the node set.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Cell {
    /// Local indices of the corners (bottom-left, bottom-right, top-left,
    /// top-right), [`NONE`] where the corner is not an unknown.
    corners: [usize; 4],
    /// `sigma` at the midpoints of the bottom, top, left and right edges.
    sig: [f64; 4],
}

/// Operators restricted to a set of interior nodes.
#[derive(Clone, Debug)]
pub(crate) struct NodeOperator {
    pub nodes: Vec<usize>,
    pub h: f64,
    pub stiffness: CsrMatrix,
    /// `rho` at the nodes.
    pub rho: Vec<f64>,
    cells: Vec<Cell>,
    /// Two candidate orderings for banded factorization, as `old -> new`.
    pub orderings: [Vec<usize>; 2],
}

impl NodeOperator {
    /// `nodes` must be sorted interior node ids of `grid`.
    pub(crate) fn new(
        grid: &GridDiscretization,
        nodes: Vec<usize>,
        rho: &CoefficientField,
        sigma: &CoefficientField,
    ) -> Self {
        let nx = grid.nx();
        let h = grid.h();
        let local = |id: usize| nodes.binary_search(&id).ok();
        let mid = |a: usize, b: usize| {
            let (pa, pb) = (grid.position(a), grid.position(b));
            sigma.eval(Point::new(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)))
        };

        let mut triplets = Vec::with_capacity(5 * nodes.len());
        for (k, &id) in nodes.iter().enumerate() {
            let mut diag = 0.0;
            for nb in grid.neighbors(id) {
                let s = mid(id, nb);
                diag += s;
                if let Some(l) = local(nb) {
                    triplets.push((k, l, -s));
                }
            }
            triplets.push((k, k, diag));
        }
        let stiffness = CsrMatrix::from_triplets(nodes.len(), triplets);

        let mut lower_left: Vec<usize> = nodes
            .iter()
            .flat_map(|&id| [id, id - 1, id - nx, id - nx - 1])
            .collect();
        lower_left.sort_unstable();
        lower_left.dedup();
        let cells = lower_left
            .into_iter()
            .map(|c| {
                let ids = [c, c + 1, c + nx, c + nx + 1];
                let corners = ids.map(|id| {
                    if grid.classes()[id] == NodeClass::Interior {
                        local(id).unwrap_or(NONE)
                    } else {
                        NONE
                    }
                });
                Cell {
                    corners,
                    sig: [mid(ids[0], ids[1]), mid(ids[2], ids[3]), mid(ids[0], ids[2]), mid(ids[1], ids[3])],
                }
            })
            .collect();

        let rho_vals = nodes.iter().map(|&id| rho.eval(grid.position(id))).collect();

        let row_major: Vec<usize> = (0..nodes.len()).collect();
        let mut by_column: Vec<usize> = (0..nodes.len()).collect();
        by_column.sort_by_key(|&k| (nodes[k] % nx, nodes[k] / nx));
        let mut column_major = vec![0; nodes.len()];
        for (new, &old) in by_column.iter().enumerate() {
            column_major[old] = new;
        }

        NodeOperator {
            nodes,
            h,
            stiffness,
            rho: rho_vals,
            cells,
            orderings: [row_major, column_major],
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Lumped mass `h^2 rho_i`.
    pub(crate) fn mass(&self) -> Vec<f64> {
        let h2 = self.h * self.h;
        self.rho.iter().map(|r| h2 * r).collect()
    }

    /// `(E, D)` for exponent `p`.
    pub(crate) fn quotient_parts(&self, u: &[f64], p: f64) -> (f64, f64) {
        (self.energy(u, p, 0.0, None), self.denominator(u, p, None))
    }

    /// p-energy; accumulates its gradient into `grad` when given, using
    /// `eps2` to regularize `S^(p/2-1)` at vanishing gradients.
    pub(crate) fn energy(&self, u: &[f64], p: f64, eps2: f64, mut grad: Option<&mut [f64]>) -> f64 {
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
        let hp = self.h.powf(2.0 - p) / 4.0;
        let half = 0.5 * p;
        let quadratic = p == 2.0;
        let mut total = 0.0;
        for cell in &self.cells {
            let val = |k: usize| {
                let c = cell.corners[k];
                if c == NONE {
                    0.0
                } else {
                    u[c]
                }
            };
            let v = [val(0), val(1), val(2), val(3)];
            let dh = [v[1] - v[0], v[3] - v[2]];
            let dv = [v[2] - v[0], v[3] - v[1]];
            // each corner pairs one horizontal edge with one vertical edge
            for (eh, ev) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
                let (sh, sv) = (cell.sig[eh], cell.sig[2 + ev]);
                let s = sh * dh[eh] * dh[eh] + sv * dv[ev] * dv[ev];
                let c = if quadratic {
                    0.25
                } else {
                    hp * (0.5 * (sh + sv)).powf(1.0 - half)
                };
                total += if quadratic { c * s } else { c * s.powf(half) };
                if let Some(g) = grad.as_deref_mut() {
                    let factor = if quadratic {
                        2.0 * c
                    } else {
                        c * p * (s + eps2).powf(half - 1.0)
                    };
                    if factor == 0.0 || !factor.is_finite() {
                        continue;
                    }
                    let gh = factor * sh * dh[eh];
                    let gv = factor * sv * dv[ev];
                    // horizontal edge runs from corner (2 eh) to (2 eh + 1);
                    // vertical edge from corner ev to (ev + 2).
                    let add = |g: &mut [f64], corner: usize, x: f64| {
                        let c = cell.corners[corner];
                        if c != NONE {
                            g[c] += x;
                        }
                    };
                    add(g, 2 * eh + 1, gh);
                    add(g, 2 * eh, -gh);
                    add(g, ev + 2, gv);
                    add(g, ev, -gv);
                }
            }
        }
        total
    }

    /// `h^2 sum rho_i |u_i|^p`, with optional gradient.
    pub(crate) fn denominator(&self, u: &[f64], p: f64, grad: Option<&mut [f64]>) -> f64 {
        let h2 = self.h * self.h;
        let mut total = 0.0;
        match grad {
            Some(g) => {
                for i in 0..u.len() {
                    let a = u[i].abs();
                    let ap1 = if p == 2.0 { a } else { a.powf(p - 1.0) };
                    total += h2 * self.rho[i] * ap1 * a;
                    g[i] = h2 * self.rho[i] * p * ap1 * u[i].signum() * (a > 0.0) as u8 as f64;
                }
            }
            None => {
                for i in 0..u.len() {
                    let a = u[i].abs();
                    total += h2 * self.rho[i] * if p == 2.0 { a * a } else { a.powf(p) };
                }
            }
        }
        total
    }

    /// Relative positions of the nodes: equal keys mean congruent node sets.
    pub(crate) fn shape_key(&self, nx: usize) -> Vec<(usize, usize)> {
        let i0 = self.nodes.iter().map(|id| id % nx).min().unwrap_or(0);
        let j0 = self.nodes.iter().map(|id| id / nx).min().unwrap_or(0);
        self.nodes.iter().map(|id| (id % nx - i0, id / nx - j0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::discretize;
    use crate::geometry::{Domain, SigmaNetwork};
    use approx::assert_relative_eq;

    fn setup(rho: CoefficientField, sigma: CoefficientField) -> NodeOperator {
        let d = Domain::unit_square();
        let g = discretize(&d, &SigmaNetwork::point(Point::new(0.3, 0.6)), 1.0 / 12.0).unwrap();
        NodeOperator::new(&g, g.interior_nodes().to_vec(), &rho, &sigma)
    }

    fn sample(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 37 % 11) as f64 - 4.0) / 3.0).collect()
    }

    #[test]
    fn quadratic_energy_matches_stiffness() {
        let op = setup(
            CoefficientField::Constant(1.0),
            CoefficientField::Affine { a: 1.0, b: 0.5, c: 2.0 },
        );
        let u = sample(op.len());
        let ku = op.stiffness.mul_vec(&u);
        let quad: f64 = u.iter().zip(&ku).map(|(a, b)| a * b).sum();
        assert_relative_eq!(op.energy(&u, 2.0, 0.0, None), quad, epsilon = 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let op = setup(
            CoefficientField::Exponential { a: 1.0, b: 0.3 },
            CoefficientField::Affine { a: 1.0, b: 0.5, c: 2.0 },
        );
        let u = sample(op.len());
        for p in [1.5, 2.0, 3.0] {
            let mut ge = vec![0.0; u.len()];
            let mut gd = vec![0.0; u.len()];
            op.energy(&u, p, 0.0, Some(&mut ge));
            op.denominator(&u, p, Some(&mut gd));
            for i in [0, 7, u.len() / 2, u.len() - 1] {
                let step = 1e-6;
                let mut up = u.clone();
                up[i] += step;
                let mut um = u.clone();
                um[i] -= step;
                let fe = (op.energy(&up, p, 0.0, None) - op.energy(&um, p, 0.0, None)) / (2.0 * step);
                let fd = (op.denominator(&up, p, None) - op.denominator(&um, p, None)) / (2.0 * step);
                assert_relative_eq!(ge[i], fe, epsilon = 1e-6, max_relative = 1e-5);
                assert_relative_eq!(gd[i], fd, epsilon = 1e-6, max_relative = 1e-5);
            }
        }
    }
}
