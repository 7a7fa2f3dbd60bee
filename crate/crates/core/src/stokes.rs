//! Discrete Stokes solves with no-slip boundary conditions.
//!
//! Velocity dofs on the boundary are eliminated and the pressure is fixed by a
//! Lagrange multiplier for `∫ p = 0`, giving the bordered symmetric system
//!
//! ```text
//! [ A  Bᵀ 0 ] [y]   [F]
//! [ B  0  m ] [p] = [0]
//! [ 0  mᵀ 0 ] [λ]   [0]
//! ```
//!
//! which is factored once. Since the operator is symmetric, the same factors
//! serve state and adjoint solves.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{assemble, velocity_load, AssembledForms, ControlProjector, DirichletMap, Spaces, VectorData};
use crate::mesh::TriMesh;
use crate::sparse::{norm2, CsrMatrix, LuFactor, TripletBuilder};

/// Relative residual above which iterative refinement kicks in.
pub const REFINE_THRESHOLD: f64 = 1e-12;
/// Relative residual above which a solve is reported as failed.
pub const RESIDUAL_LIMIT: f64 = 1e-10;
const MAX_REFINEMENT_STEPS: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveDiagnostics {
    /// `‖rhs − K x‖ / ‖rhs‖` of the bordered system (absolute if `rhs = 0`).
    pub relative_residual: f64,
    /// Euclidean norm of `B y`, the discrete divergence.
    pub divergence: f64,
    /// `∫ p / |Ω|`.
    pub pressure_mean: f64,
    pub refinement_steps: usize,
}

/// Velocity (all dofs, zero on the boundary) and pressure of one solve.
#[derive(Clone, Debug)]
pub struct FlowField {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    /// Lagrange multiplier of the mean-zero constraint.
    pub multiplier: f64,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Debug)]
pub struct StokesProblem {
    spaces: Spaces,
    forms: AssembledForms,
    dirichlet: DirichletMap,
    saddle: CsrMatrix,
    lu: LuFactor,
    projectors: [ControlProjector; 2],
    area: f64,
}

impl StokesProblem {
    pub fn new(spaces: Spaces, nu: f64) -> Result<Self> {
        let forms = assemble(&spaces, nu)?;
        let dirichlet = DirichletMap::new(&spaces.velocity);
        let saddle = bordered_matrix(&forms, &dirichlet);
        let lu = LuFactor::new(&saddle)?;
        let projectors = [
            ControlProjector::new(&forms.control_mass[0], &forms.coupling[0])?,
            ControlProjector::new(&forms.control_mass[1], &forms.coupling[1])?,
        ];
        let area = spaces.mesh().total_area();
        Ok(Self {
            spaces,
            forms,
            dirichlet,
            saddle,
            lu,
            projectors,
            area,
        })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        self.spaces.mesh()
    }

    pub fn spaces(&self) -> &Spaces {
        &self.spaces
    }

    pub fn forms(&self) -> &AssembledForms {
        &self.forms
    }

    pub fn dirichlet(&self) -> &DirichletMap {
        &self.dirichlet
    }

    /// The bordered matrix on free velocity dofs, pressure and multiplier.
    pub fn saddle_matrix(&self) -> &CsrMatrix {
        &self.saddle
    }

    pub fn projector(&self, i: usize) -> &ControlProjector {
        &self.projectors[i]
    }

    pub fn nu(&self) -> f64 {
        self.forms.nu
    }

    pub fn velocity_dim(&self) -> usize {
        self.spaces.velocity.dim()
    }

    pub fn pressure_dim(&self) -> usize {
        self.spaces.pressure.dim()
    }

    pub fn control_dim(&self, i: usize) -> usize {
        self.spaces.controls[i].dim()
    }

    /// Solves with right-hand side `load` (a functional on all velocity dofs;
    /// boundary entries are ignored).
    pub fn solve_load(&self, load: &[f64]) -> Result<FlowField> {
        if load.len() != self.velocity_dim() {
            return Err(Error::MeshMismatch(format!(
                "load has {} entries, velocity space has {}",
                load.len(),
                self.velocity_dim()
            )));
        }
        let rhs = self.saddle_rhs(load);
        let scale = norm2(&rhs);
        let rel = |r: &[f64]| if scale > 0.0 { norm2(r) / scale } else { norm2(r) };
        let mut x = self.lu.solve(&rhs);
        let mut r = self.residual(&rhs, &x);
        let mut steps = 0;
        while rel(&r) > REFINE_THRESHOLD && steps < MAX_REFINEMENT_STEPS {
            let dx = self.lu.solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            r = self.residual(&rhs, &x);
            steps += 1;
        }
        let relative_residual = rel(&r);
        if !(relative_residual <= RESIDUAL_LIMIT) {
            return Err(Error::Residual {
                residual: relative_residual,
                limit: RESIDUAL_LIMIT,
            });
        }

        Ok(self.flow_from_solution(&x, relative_residual, steps))
    }

    /// Size of the bordered system.
    pub fn saddle_dim(&self) -> usize {
        self.dirichlet.n_free() + self.pressure_dim() + 1
    }

    /// Right-hand side of the bordered system for a velocity load.
    pub fn saddle_rhs(&self, load: &[f64]) -> Vec<f64> {
        let mut rhs = self.dirichlet.restrict(load);
        rhs.resize(self.saddle_dim(), 0.0);
        rhs
    }

    /// Splits a solution vector of the bordered system into a [`FlowField`].
    pub fn flow_from_solution(&self, x: &[f64], relative_residual: f64, refinement_steps: usize) -> FlowField {
        let nf = self.dirichlet.n_free();
        let np = self.pressure_dim();
        let velocity = self.dirichlet.extend(&x[..nf]);
        let pressure = x[nf..nf + np].to_vec();
        let divergence = norm2(&self.forms.divergence.mul_vec(&velocity));
        let pressure_mean = crate::sparse::dot(&self.forms.pressure_mean, &pressure) / self.area;
        FlowField {
            velocity,
            pressure,
            multiplier: x[nf + np],
            diagnostics: SolveDiagnostics {
                relative_residual,
                divergence,
                pressure_mean,
                refinement_steps,
            },
        }
    }

    /// Discrete inf-sup constant: square root of the smallest nonzero
    /// eigenvalue of `B A⁻¹ Bᵀ` relative to the pressure mass matrix. The
    /// constant pressure, which `B` annihilates, is skipped. Dense; coarse
    /// meshes only.
    pub fn inf_sup_constant(&self) -> Result<f64> {
        let map = &self.dirichlet;
        let nf = map.n_free();
        let np = self.pressure_dim();
        let a = self.forms.stiffness.select(map.free_of(), nf, map.free_of(), nf);
        let all: Vec<Option<usize>> = (0..np).map(Some).collect();
        let b = self.forms.divergence.select(&all, np, map.free_of(), nf);
        let lu = LuFactor::new(&a)?;
        let bt = b.transpose();
        let mut schur = vec![vec![0.0; np]; np];
        for q in 0..np {
            let mut e = vec![0.0; np];
            e[q] = 1.0;
            let col = b.mul_vec(&lu.solve(&bt.mul_vec(&e)));
            for (r, v) in col.into_iter().enumerate() {
                schur[r][q] = v;
            }
        }
        let ev = crate::sparse::generalized_eigenvalues(&schur, &self.forms.pressure_mass.to_dense())?;
        let beta_sq = ev[1];
        if ev[0].abs() > 1e-10 * ev[np - 1] {
            return Err(Error::Singular(format!("constant pressure not in the kernel of B: {}", ev[0])));
        }
        Ok((beta_sq * self.nu()).max(0.0).sqrt())
    }

    fn residual(&self, rhs: &[f64], x: &[f64]) -> Vec<f64> {
        let kx = self.saddle.mul_vec(x);
        rhs.iter().zip(&kx).map(|(b, k)| b - k).collect()
    }

    /// `(B_1 u_1 + B_2 u_2, ·)` as a velocity load.
    pub fn control_load(&self, controls: [&[f64]; 2]) -> Result<Vec<f64>> {
        let mut load = vec![0.0; self.velocity_dim()];
        for (i, u) in controls.iter().enumerate() {
            if u.len() != self.control_dim(i) {
                return Err(Error::MeshMismatch(format!(
                    "control {} has {} entries, expected {}",
                    i + 1,
                    u.len(),
                    self.control_dim(i)
                )));
            }
            for (l, c) in load.iter_mut().zip(self.forms.coupling[i].mul_vec(u)) {
                *l += c;
            }
        }
        Ok(load)
    }

    /// State equation with forcing `f` and controls `u_1, u_2`.
    pub fn solve_state(&self, f: &VectorData, controls: [&[f64]; 2]) -> Result<FlowField> {
        let mut load = velocity_load(&self.spaces, &self.forms, f)?;
        for (l, c) in load.iter_mut().zip(self.control_load(controls)?) {
            *l += c;
        }
        self.solve_load(&load)
    }

    /// Adjoint equation: velocity load `(y − y_d, ·)` is passed as `y` in the
    /// velocity space and the target as data.
    pub fn solve_adjoint(&self, y: &[f64], target: &VectorData) -> Result<FlowField> {
        let mut load = self.forms.velocity_mass.mul_vec(y);
        let t = velocity_load(&self.spaces, &self.forms, target)?;
        for (l, ti) in load.iter_mut().zip(t) {
            *l -= ti;
        }
        self.solve_load(&load)
    }

    /// `S_i v`: velocity of the homogeneous problem driven by control `v`.
    pub fn apply_s(&self, i: usize, v: &[f64]) -> Result<Vec<f64>> {
        let load = self.forms.coupling[i].mul_vec(v);
        if v.len() != self.control_dim(i) {
            return Err(Error::MeshMismatch(format!("control {} has wrong length", i + 1)));
        }
        Ok(self.solve_load(&load)?.velocity)
    }

    /// `S_i^* w` with respect to the `L²` inner products.
    pub fn apply_s_adjoint(&self, i: usize, w: &[f64]) -> Result<Vec<f64>> {
        let z = self.solve_load(&self.forms.velocity_mass.mul_vec(w))?.velocity;
        Ok(self.projectors[i].project_velocity(&z))
    }

    /// `B_i^* φ`: the `L²(ω_i)` projection of an adjoint velocity.
    pub fn restrict_to_control(&self, i: usize, phi: &[f64]) -> Vec<f64> {
        self.projectors[i].project_velocity(phi)
    }
}

fn bordered_matrix(forms: &AssembledForms, map: &DirichletMap) -> CsrMatrix {
    let nf = map.n_free();
    let np = forms.pressure_mean.len();
    let n = nf + np + 1;
    let mut t = TripletBuilder::new(n, n);
    for (r, c, v) in forms.stiffness.triplets() {
        if let (Some(i), Some(j)) = (map.free_of()[r], map.free_of()[c]) {
            t.add(i, j, v);
        }
    }
    for (q, c, v) in forms.divergence.triplets() {
        if let Some(j) = map.free_of()[c] {
            t.add(nf + q, j, v);
            t.add(j, nf + q, v);
        }
    }
    for (q, &m) in forms.pressure_mean.iter().enumerate() {
        t.add(nf + q, n - 1, m);
        t.add(n - 1, nf + q, m);
    }
    t.build()
}
