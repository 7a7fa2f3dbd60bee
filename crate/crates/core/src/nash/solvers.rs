//! Iterative equilibrium solvers.

use super::{Controls, EquilibriumBundle, Method, NashGame, SolverOptions, UpdateOrder};
use crate::error::{Error, Result};
use crate::sparse::axpy;

fn not_converged(method: Method, history: &[[f64; 2]]) -> Error {
    Error::NotConverged {
        method: method.name().to_string(),
        iterations: history.len(),
        trail: history.iter().map(|r| r[0].max(r[1])).collect(),
    }
}

fn converged(r: [f64; 2], tol: f64) -> bool {
    r[0] <= tol && r[1] <= tol
}

impl NashGame {
    /// Damped fixed-point iteration
    /// `u_i ← (1 − θ) u_i − (θ/α_i) P_i B_i^* φ_i`.
    pub fn solve_fixed_point(&self, opts: &SolverOptions) -> Result<EquilibriumBundle> {
        opts.validate()?;
        let mut u = self.zero_controls();
        let mut history = Vec::new();
        for _ in 0..opts.max_iter {
            let ev = self.evaluate([&u[0], &u[1]])?;
            history.push(ev.residuals);
            if converged(ev.residuals, opts.tol) {
                return Ok(EquilibriumBundle {
                    state: ev.state,
                    controls: u,
                    adjoints: ev.adjoints,
                    residuals: ev.residuals,
                    diagnostics: super::SolverDiagnostics {
                        method: Method::FixedPoint,
                        iterations: history.len(),
                        history,
                    },
                });
            }
            if ev.residuals.iter().any(|r| !r.is_finite()) {
                break;
            }
            for i in 0..2 {
                let b_star_phi = self.problem.restrict_to_control(i, &ev.adjoints[i].velocity);
                let a = self.alpha(i);
                for (uk, pk) in u[i].iter_mut().zip(&b_star_phi) {
                    *uk = (1.0 - opts.theta) * *uk - opts.theta / a * pk;
                }
            }
        }
        Err(not_converged(Method::FixedPoint, &history))
    }

    /// Exact line-search step for player `i` along `−g`:
    /// `ρ = ‖g‖² / (‖S_i g‖² + α_i ‖g‖²)`.
    pub fn optimal_step(&self, i: usize, g: &[f64]) -> Result<f64> {
        let gg = self.control_inner(i, g, g);
        if gg == 0.0 {
            return Ok(0.0);
        }
        let sg = self.problem.apply_s(i, g)?;
        let ss = self.problem.forms().velocity_mass.bilinear(&sg, &sg);
        Ok(gg / (ss + self.alpha(i) * gg))
    }

    /// Gradient method with per-player exact line search.
    pub fn solve_gradient(&self, opts: &SolverOptions) -> Result<EquilibriumBundle> {
        opts.validate()?;
        let mut u = self.zero_controls();
        let mut history = Vec::new();
        for _ in 0..opts.max_iter {
            let ev = self.evaluate([&u[0], &u[1]])?;
            history.push(ev.residuals);
            if converged(ev.residuals, opts.tol) {
                return Ok(EquilibriumBundle {
                    state: ev.state,
                    controls: u,
                    adjoints: ev.adjoints,
                    residuals: ev.residuals,
                    diagnostics: super::SolverDiagnostics {
                        method: Method::Gradient,
                        iterations: history.len(),
                        history,
                    },
                });
            }
            if ev.residuals.iter().any(|r| !r.is_finite()) {
                break;
            }
            match opts.order {
                UpdateOrder::Simultaneous => {
                    for i in 0..2 {
                        let rho = self.optimal_step(i, &ev.gradients[i])?;
                        axpy(-rho, &ev.gradients[i], &mut u[i]);
                    }
                }
                UpdateOrder::Sequential => {
                    let rho = self.optimal_step(0, &ev.gradients[0])?;
                    axpy(-rho, &ev.gradients[0], &mut u[0]);
                    let g2 = self.gradient(1, [&u[0], &u[1]])?;
                    let rho = self.optimal_step(1, &g2)?;
                    axpy(-rho, &g2, &mut u[1]);
                }
            }
        }
        Err(not_converged(Method::Gradient, &history))
    }

    /// Conjugate gradients on `R u = z` in the `L²(ω_1) × L²(ω_2)` inner
    /// product, in which `R` is symmetric and bounded below by `min α_i`.
    /// The CG residual `z − R u` is minus the optimality residual.
    pub fn solve_reduced_cg(&self, opts: &SolverOptions) -> Result<EquilibriumBundle> {
        opts.validate()?;
        let z = self.reduced_rhs()?;
        let mut u = self.zero_controls();
        let mut r = z.clone();
        let mut history = Vec::new();
        let norms = |r: &Controls| [self.control_norm(0, &r[0]), self.control_norm(1, &r[1])];
        history.push(norms(&r));
        let mut p = r.clone();
        let mut rr = self.pair_inner(&r, &r);
        let mut iterations = 0;
        loop {
            let res = *history.last().unwrap();
            if converged(res, opts.tol) {
                // Confirm with the true optimality residual; restart if rounding drifted.
                let ev = self.evaluate([&u[0], &u[1]])?;
                if converged(ev.residuals, opts.tol) {
                    return self.bundle(u, Method::ReducedCg, history);
                }
                r = [ev.gradients[0].iter().map(|g| -g).collect(), ev.gradients[1].iter().map(|g| -g).collect()];
                history.push(ev.residuals);
                p = r.clone();
                rr = self.pair_inner(&r, &r);
            }
            if iterations >= opts.max_iter {
                return Err(not_converged(Method::ReducedCg, &history));
            }
            iterations += 1;
            let rp = self.apply_reduced([&p[0], &p[1]])?;
            let curvature = self.pair_inner(&p, &rp);
            if !(curvature > 0.0) {
                return Err(Error::Breakdown {
                    iteration: iterations,
                    curvature,
                });
            }
            let step = rr / curvature;
            for i in 0..2 {
                axpy(step, &p[i], &mut u[i]);
                axpy(-step, &rp[i], &mut r[i]);
            }
            let rr_new = self.pair_inner(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..2 {
                for (pk, rk) in p[i].iter_mut().zip(&r[i]) {
                    *pk = rk + beta * *pk;
                }
            }
            history.push(norms(&r));
        }
    }
}
