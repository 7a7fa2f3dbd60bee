//! Monolithic optimality system solved by dense LU, as a reference for the
//! iterative methods on coarse meshes.
//!
//! Unknowns `[x_s, x_1, x_2, u_1, u_2]`, each `x` a bordered Stokes vector:
//!
//! ```text
//! K x_s − C_1 u_1 − C_2 u_2 = F
//! K x_i − M y               = −t_i
//! C_iᵀ φ_i + α_i M_i u_i    = 0
//! ```

use super::{EquilibriumBundle, Method, NashGame, SolverDiagnostics};
use crate::error::{Error, Result};
use crate::sparse::{dense_solve, norm2};

/// Largest monolithic system the oracle will build.
pub const DENSE_ORACLE_LIMIT: usize = 5000;

/// Each block of the system must be satisfied to this relative residual.
const BLOCK_RESIDUAL_LIMIT: f64 = 1e-10;

impl NashGame {
    pub fn dense_oracle_size(&self) -> usize {
        3 * self.problem.saddle_dim() + self.control_dim(0) + self.control_dim(1)
    }

    pub fn solve_dense_oracle(&self) -> Result<EquilibriumBundle> {
        let size = self.dense_oracle_size();
        if size > DENSE_ORACLE_LIMIT {
            return Err(Error::TooLarge {
                size,
                limit: DENSE_ORACLE_LIMIT,
            });
        }
        let p = &self.problem;
        let forms = p.forms();
        let map = p.dirichlet();
        let n = p.saddle_dim();
        let nf = map.n_free();
        let d = [self.control_dim(0), self.control_dim(1)];
        let off_u = [3 * n, 3 * n + d[0]];

        let mut a = vec![vec![0.0; size]; size];
        let mut rhs = vec![0.0; size];
        for blk in 0..3 {
            for (r, c, v) in p.saddle_matrix().triplets() {
                a[blk * n + r][blk * n + c] = v;
            }
        }
        for (row, col, v) in forms.velocity_mass.triplets() {
            if let (Some(r), Some(c)) = (map.free_of()[row], map.free_of()[col]) {
                a[n + r][c] -= v;
                a[2 * n + r][c] -= v;
            }
        }
        for i in 0..2 {
            for (row, j, v) in forms.coupling[i].triplets() {
                if let Some(r) = map.free_of()[row] {
                    a[r][off_u[i] + j] -= v;
                    a[off_u[i] + j][(i + 1) * n + r] += v;
                }
            }
            for (r, c, v) in forms.control_mass[i].triplets() {
                a[off_u[i] + r][off_u[i] + c] += self.alpha(i) * v;
            }
        }
        let f = map.restrict(&self.forcing_load);
        rhs[..nf].copy_from_slice(&f);
        for i in 0..2 {
            let t = map.restrict(&self.target_loads[i]);
            for (k, tk) in t.iter().enumerate() {
                rhs[(i + 1) * n + k] = -tk;
            }
        }

        let mut x = dense_solve(&a, &rhs)?;
        let residual = |x: &[f64]| -> Vec<f64> {
            a.iter()
                .zip(&rhs)
                .map(|(row, b)| b - row.iter().zip(x).map(|(aij, xj)| aij * xj).sum::<f64>())
                .collect()
        };
        let mut r = residual(&x);
        let scale = norm2(&rhs);
        let blocks = [(0, n), (n, 2 * n), (2 * n, 3 * n), (off_u[0], off_u[1]), (off_u[1], size)];
        let block_residuals = |r: &[f64]| -> Vec<f64> {
            blocks
                .iter()
                .map(|&(s, e)| {
                    let v = norm2(&r[s..e]);
                    if scale > 0.0 {
                        v / scale
                    } else {
                        v
                    }
                })
                .collect()
        };
        if block_residuals(&r).iter().any(|&v| v > BLOCK_RESIDUAL_LIMIT * 1e-2) {
            let dx = dense_solve(&a, &r)?;
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            r = residual(&x);
        }
        let br = block_residuals(&r);
        if let Some(&worst) = br.iter().find(|&&v| !(v <= BLOCK_RESIDUAL_LIMIT)) {
            return Err(Error::Residual {
                residual: worst,
                limit: BLOCK_RESIDUAL_LIMIT,
            });
        }

        let state = p.flow_from_solution(&x[..n], br[0], 0);
        let adjoints = [
            p.flow_from_solution(&x[n..2 * n], br[1], 0),
            p.flow_from_solution(&x[2 * n..3 * n], br[2], 0),
        ];
        let controls = [x[off_u[0]..off_u[1]].to_vec(), x[off_u[1]..].to_vec()];
        let residuals = [0, 1].map(|i| {
            let g = self.gradient_from_adjoint(i, &controls[i], &adjoints[i].velocity);
            self.control_norm(i, &g)
        });
        Ok(EquilibriumBundle {
            state,
            controls,
            adjoints,
            residuals,
            diagnostics: SolverDiagnostics {
                method: Method::DenseOracle,
                iterations: 1,
                history: vec![residuals],
            },
        })
    }
}
