//! Two-player Nash game for distributed Stokes control.
//!
//! Player `i` minimizes
//!
//! ```text
//! J_i(u_1, u_2) = ½‖y − y_{i,d}‖² + (α_i/2)‖u_i‖²_{ω_i}
//! ```
//!
//! subject to the Stokes system driven by `f + B_1 u_1 + B_2 u_2`. At the
//! equilibrium `α_i u_i + P_i B_i^* φ_i = 0`, where `φ_i` solves the adjoint
//! problem with load `y − y_{i,d}`.

mod oracle;
mod solvers;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{l2_norm_sq, velocity_load, Spaces, VectorData};
use crate::mesh::{TriMesh, WHOLE_DOMAIN_LABEL};
use crate::sparse::dot;
use crate::stokes::{FlowField, StokesProblem};

pub use oracle::DENSE_ORACLE_LIMIT;

/// Triangles on which a player's control acts.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum ControlRegion {
    #[default]
    Whole,
    /// Union of the labelled subdomains.
    Labels(Vec<String>),
    Triangles(Vec<usize>),
}

impl ControlRegion {
    pub fn label(name: &str) -> Self {
        if name == WHOLE_DOMAIN_LABEL {
            Self::Whole
        } else {
            Self::Labels(vec![name.to_string()])
        }
    }

    pub fn resolve(&self, mesh: &TriMesh) -> Result<Vec<usize>> {
        match self {
            Self::Whole => Ok((0..mesh.n_triangles()).collect()),
            Self::Labels(names) => {
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                mesh.triangles_with_labels(&names)
            }
            Self::Triangles(t) => {
                if let Some(bad) = t.iter().find(|&&t| t >= mesh.n_triangles()) {
                    return Err(Error::InvalidArgument(format!("control region triangle {bad} does not exist")));
                }
                Ok(t.clone())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlayerSpec {
    pub alpha: f64,
    pub target: VectorData,
    pub region: ControlRegion,
}

impl PlayerSpec {
    pub fn new(alpha: f64, target: VectorData, region: ControlRegion) -> Self {
        Self { alpha, target, region }
    }
}

#[derive(Clone, Debug)]
pub struct GameSpec {
    pub nu: f64,
    pub forcing: VectorData,
    pub players: [PlayerSpec; 2],
    /// Polynomial degree of both control spaces (0 or 1).
    pub control_degree: u8,
}

impl GameSpec {
    /// Game with zero forcing and targets, controls on the whole domain.
    pub fn zero(nu: f64, alpha: [f64; 2]) -> Self {
        Self {
            nu,
            forcing: VectorData::Zero,
            players: [
                PlayerSpec::new(alpha[0], VectorData::Zero, ControlRegion::Whole),
                PlayerSpec::new(alpha[1], VectorData::Zero, ControlRegion::Whole),
            ],
            control_degree: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {}", self.nu)));
        }
        for (i, p) in self.players.iter().enumerate() {
            if !(p.alpha > 0.0) || !p.alpha.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "alpha of player {} must be positive, got {}",
                    i + 1,
                    p.alpha
                )));
            }
        }
        Ok(())
    }
}

/// A pair of control coefficient vectors.
pub type Controls = [Vec<f64>; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    FixedPoint,
    Gradient,
    ReducedCg,
    DenseOracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::FixedPoint, Method::Gradient, Method::ReducedCg, Method::DenseOracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::FixedPoint => "fixed-point",
            Method::Gradient => "gradient",
            Method::ReducedCg => "reduced-cg",
            Method::DenseOracle => "dense-oracle",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}' (fixed-point, gradient, reduced-cg, dense-oracle)")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Order of the player updates in the iterative methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum UpdateOrder {
    #[default]
    Simultaneous,
    /// Player 1, then player 2 with the refreshed state.
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub method: Method,
    /// Threshold on each player's optimality residual `‖α_i u_i + P_i B_i^* φ_i‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Damping of the fixed-point update.
    pub theta: f64,
    pub order: UpdateOrder,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: Method::FixedPoint,
            tol: 1e-9,
            max_iter: 10_000,
            theta: 1.0,
            order: UpdateOrder::Simultaneous,
        }
    }
}

impl SolverOptions {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidArgument(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverDiagnostics {
    pub method: Method,
    pub iterations: usize,
    /// Optimality residual of both players, one entry per iteration.
    pub history: Vec<[f64; 2]>,
}

/// Discrete equilibrium with its state and adjoints.
#[derive(Clone, Debug)]
pub struct EquilibriumBundle {
    pub state: FlowField,
    pub controls: Controls,
    pub adjoints: [FlowField; 2],
    /// Final optimality residuals.
    pub residuals: [f64; 2],
    pub diagnostics: SolverDiagnostics,
}

/// State, adjoints and gradients at one control pair.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub state: FlowField,
    pub adjoints: [FlowField; 2],
    pub gradients: Controls,
    pub residuals: [f64; 2],
}

/// A game discretized on one mesh: the factorized Stokes operator plus the
/// assembled data of both players.
#[derive(Debug)]
pub struct NashGame {
    spec: GameSpec,
    problem: StokesProblem,
    forcing_load: Vec<f64>,
    target_loads: [Vec<f64>; 2],
    target_norms_sq: [f64; 2],
}

impl NashGame {
    pub fn new(mesh: Arc<TriMesh>, spec: GameSpec) -> Result<Self> {
        spec.validate()?;
        let regions = [
            spec.players[0].region.resolve(&mesh)?,
            spec.players[1].region.resolve(&mesh)?,
        ];
        let spaces = Spaces::new(mesh, regions, spec.control_degree)?;
        let problem = StokesProblem::new(spaces, spec.nu)?;
        let (sp, fm) = (problem.spaces(), problem.forms());
        let forcing_load = velocity_load(sp, fm, &spec.forcing)?;
        let target_loads = [
            velocity_load(sp, fm, &spec.players[0].target)?,
            velocity_load(sp, fm, &spec.players[1].target)?,
        ];
        let target_norms_sq = [
            l2_norm_sq(sp, fm, &spec.players[0].target)?,
            l2_norm_sq(sp, fm, &spec.players[1].target)?,
        ];
        Ok(Self {
            spec,
            problem,
            forcing_load,
            target_loads,
            target_norms_sq,
        })
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn problem(&self) -> &StokesProblem {
        &self.problem
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        self.problem.mesh()
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.spec.players[i].alpha
    }

    pub fn control_dim(&self, i: usize) -> usize {
        self.problem.control_dim(i)
    }

    pub fn zero_controls(&self) -> Controls {
        [vec![0.0; self.control_dim(0)], vec![0.0; self.control_dim(1)]]
    }

    /// `(v, w)_{L²(ω_i)}` for control coefficients.
    pub fn control_inner(&self, i: usize, v: &[f64], w: &[f64]) -> f64 {
        self.problem.forms().control_mass[i].bilinear(v, w)
    }

    pub fn control_norm(&self, i: usize, v: &[f64]) -> f64 {
        self.control_inner(i, v, v).max(0.0).sqrt()
    }

    /// Product inner product on `U_1 × U_2`.
    pub fn pair_inner(&self, v: &Controls, w: &Controls) -> f64 {
        self.control_inner(0, &v[0], &w[0]) + self.control_inner(1, &v[1], &w[1])
    }

    /// `(y_{i,d}, w_j)` for every velocity basis function.
    pub fn target_load(&self, i: usize) -> &[f64] {
        &self.target_loads[i]
    }

    pub fn forcing_load(&self) -> &[f64] {
        &self.forcing_load
    }

    fn check_controls(&self, u: [&[f64]; 2]) -> Result<()> {
        for i in 0..2 {
            if u[i].len() != self.control_dim(i) {
                return Err(Error::MeshMismatch(format!(
                    "control {} has {} coefficients, expected {}",
                    i + 1,
                    u[i].len(),
                    self.control_dim(i)
                )));
            }
        }
        Ok(())
    }

    /// State for the control pair.
    pub fn state(&self, u: [&[f64]; 2]) -> Result<FlowField> {
        self.check_controls(u)?;
        let mut load = self.problem.control_load(u)?;
        for (l, f) in load.iter_mut().zip(&self.forcing_load) {
            *l += f;
        }
        self.problem.solve_load(&load)
    }

    /// Adjoint of player `i` with load `y − y_{i,d}`.
    pub fn adjoint(&self, i: usize, y: &[f64]) -> Result<FlowField> {
        let mut load = self.problem.forms().velocity_mass.mul_vec(y);
        for (l, t) in load.iter_mut().zip(&self.target_loads[i]) {
            *l -= t;
        }
        self.problem.solve_load(&load)
    }

    /// Both adjoints; the two solves run concurrently.
    pub fn adjoints(&self, y: &[f64]) -> Result<[FlowField; 2]> {
        let (a, b) = rayon::join(|| self.adjoint(0, y), || self.adjoint(1, y));
        Ok([a?, b?])
    }

    /// `½‖y − y_{i,d}‖²` for a velocity in the discrete space.
    pub fn tracking(&self, i: usize, y: &[f64]) -> f64 {
        let m = &self.problem.forms().velocity_mass;
        0.5 * (m.bilinear(y, y) - 2.0 * dot(y, &self.target_loads[i]) + self.target_norms_sq[i])
    }

    pub fn cost_from_state(&self, i: usize, y: &[f64], u_i: &[f64]) -> f64 {
        self.tracking(i, y) + 0.5 * self.alpha(i) * self.control_inner(i, u_i, u_i)
    }

    /// `J_i(u_1, u_2)`; one state solve.
    pub fn cost(&self, i: usize, u: [&[f64]; 2]) -> Result<f64> {
        let y = self.state(u)?.velocity;
        Ok(self.cost_from_state(i, &y, u[i]))
    }

    /// `α_i u_i + P_i B_i^* φ_i`.
    pub fn gradient_from_adjoint(&self, i: usize, u_i: &[f64], phi: &[f64]) -> Vec<f64> {
        let mut g = self.problem.restrict_to_control(i, phi);
        for (gk, uk) in g.iter_mut().zip(u_i) {
            *gk += self.alpha(i) * uk;
        }
        g
    }

    /// Gradient of `J_i` with respect to `u_i` in the `L²(ω_i)` inner product.
    pub fn gradient(&self, i: usize, u: [&[f64]; 2]) -> Result<Vec<f64>> {
        let y = self.state(u)?;
        let phi = self.adjoint(i, &y.velocity)?;
        Ok(self.gradient_from_adjoint(i, u[i], &phi.velocity))
    }

    /// State, adjoints, gradients and residuals with one shared state solve.
    pub fn evaluate(&self, u: [&[f64]; 2]) -> Result<Evaluation> {
        let state = self.state(u)?;
        let adjoints = self.adjoints(&state.velocity)?;
        let gradients = [
            self.gradient_from_adjoint(0, u[0], &adjoints[0].velocity),
            self.gradient_from_adjoint(1, u[1], &adjoints[1].velocity),
        ];
        let residuals = [self.control_norm(0, &gradients[0]), self.control_norm(1, &gradients[1])];
        Ok(Evaluation {
            state,
            adjoints,
            gradients,
            residuals,
        })
    }

    /// Reduced operator `(R v)_i = α_i v_i + P_i S_i^*(S_1 v_1 + S_2 v_2)`:
    /// one state-type and one adjoint-type solve.
    pub fn apply_reduced(&self, v: [&[f64]; 2]) -> Result<Controls> {
        self.check_controls(v)?;
        let p = &self.problem;
        let y = p.solve_load(&p.control_load(v)?)?.velocity;
        let z = p.solve_load(&p.forms().velocity_mass.mul_vec(&y))?.velocity;
        let mut out = [p.restrict_to_control(0, &z), p.restrict_to_control(1, &z)];
        for i in 0..2 {
            for (o, vk) in out[i].iter_mut().zip(v[i]) {
                *o += self.alpha(i) * vk;
            }
        }
        Ok(out)
    }

    /// Right-hand side `z_i = −P_i S_i^*(y_0 − y_{i,d})` of `R u = z`, with
    /// `y_0` the uncontrolled state.
    pub fn reduced_rhs(&self) -> Result<Controls> {
        let y0 = self.problem.solve_load(&self.forcing_load)?.velocity;
        let adj = self.adjoints(&y0)?;
        let mut z = [
            self.problem.restrict_to_control(0, &adj[0].velocity),
            self.problem.restrict_to_control(1, &adj[1].velocity),
        ];
        for zi in z.iter_mut() {
            zi.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(z)
    }

    /// Computes the equilibrium with the selected method.
    pub fn solve(&self, opts: &SolverOptions) -> Result<EquilibriumBundle> {
        opts.validate()?;
        match opts.method {
            Method::FixedPoint => self.solve_fixed_point(opts),
            Method::Gradient => self.solve_gradient(opts),
            Method::ReducedCg => self.solve_reduced_cg(opts),
            Method::DenseOracle => self.solve_dense_oracle(),
        }
    }

    /// Bundle from final controls, re-solving state and adjoints.
    fn bundle(&self, controls: Controls, method: Method, history: Vec<[f64; 2]>) -> Result<EquilibriumBundle> {
        let ev = self.evaluate([&controls[0], &controls[1]])?;
        Ok(EquilibriumBundle {
            state: ev.state,
            controls,
            adjoints: ev.adjoints,
            residuals: ev.residuals,
            diagnostics: SolverDiagnostics {
                method,
                iterations: history.len(),
                history,
            },
        })
    }
}
