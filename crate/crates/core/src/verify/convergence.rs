//! Convergence studies and empirical lemma constants for the manufactured game.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::velocity_load;
use crate::mesh::TriMesh;
use crate::nash::{EquilibriumBundle, Method, NashGame, SolverOptions};
use crate::verify::manufactured::ManufacturedBundle;
use crate::verify::norms::{scalar_error, vector_error, VectorError};
use crate::verify::report::{ErrorReport, ErrorRow};

/// Parameters of a manufactured convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub bundle: ManufacturedBundle,
    pub control_degree: u8,
    pub options: SolverOptions,
}

impl ConvergenceStudy {
    pub fn new(bundle: ManufacturedBundle) -> Self {
        Self {
            bundle,
            control_degree: 1,
            options: SolverOptions {
                tol: 1e-12,
                ..SolverOptions::with_method(Method::ReducedCg)
            },
        }
    }

    pub fn game(&self, mesh: Arc<TriMesh>) -> Result<NashGame> {
        NashGame::new(mesh, self.bundle.game_spec(self.control_degree))
    }
}

fn velocity_error(game: &NashGame, coeffs: &[f64], field: &crate::verify::manufactured::CurlField) -> VectorError {
    let f = *field;
    vector_error(
        &game.problem().spaces().velocity,
        coeffs,
        move |x| f.value(x),
        Some(&move |x| f.gradient(x)),
    )
}

/// Errors of a discrete equilibrium against the manufactured one.
pub fn compute_errors(bundle: &ManufacturedBundle, game: &NashGame, eq: &EquilibriumBundle) -> Result<ErrorRow> {
    let p = game.problem();
    if eq.state.velocity.len() != p.velocity_dim() || eq.controls[0].len() != game.control_dim(0) {
        return Err(Error::MeshMismatch("equilibrium was not computed on this game's mesh".into()));
    }
    let spaces = p.spaces();
    let b = *bundle;
    let y = velocity_error(game, &eq.state.velocity, b.state());
    let phi = [0, 1].map(|i| velocity_error(game, &eq.adjoints[i].velocity, b.adjoint(i)));
    let p_l2 = scalar_error(&spaces.pressure, &eq.state.pressure, move |x| b.p(x));
    let r_l2 = [0, 1].map(|i| scalar_error(&spaces.pressure, &eq.adjoints[i].pressure, move |x| b.r(i, x)));
    let u_l2 = [0, 1].map(|i| vector_error(&spaces.controls[i], &eq.controls[i], move |x| b.u(i, x), None).l2);
    let mut projected = [0.0; 2];
    for i in 0..2 {
        let pu = p.projector(i).project(&spaces.controls[i], &b.control(i))?;
        let d: Vec<f64> = pu.iter().zip(&eq.controls[i]).map(|(a, c)| a - c).collect();
        projected[i] = game.control_norm(i, &d);
    }
    Ok(ErrorRow {
        h: game.mesh().mesh_size().0,
        y_l2: y.l2,
        y_h1: y.h1,
        p_l2,
        phi_l2: [phi[0].l2, phi[1].l2],
        phi_h1: [phi[0].h1, phi[1].h1],
        r_l2,
        u_l2,
        projected_u_l2: projected,
    })
}

/// Rejects sequences in which a mesh is not a uniform refinement of its
/// predecessor (4× the triangles, same leading vertices, half the size).
pub fn check_nested(meshes: &[Arc<TriMesh>]) -> Result<()> {
    for (j, w) in meshes.windows(2).enumerate() {
        let (coarse, fine) = (&w[0], &w[1]);
        let nested = fine.n_triangles() == 4 * coarse.n_triangles()
            && fine.n_vertices() > coarse.n_vertices()
            && fine.vertices()[..coarse.n_vertices()] == coarse.vertices()[..]
            && (fine.mesh_size().0 - 0.5 * coarse.mesh_size().0).abs() <= 1e-12 * coarse.mesh_size().0;
        if !nested {
            return Err(Error::InvalidMesh(format!("mesh {} is not a refinement of mesh {j}", j + 1)));
        }
    }
    Ok(())
}

/// Solves the manufactured game on every mesh and tabulates the errors. Meshes
/// are processed in parallel; rows keep the input order.
pub fn run_convergence(study: &ConvergenceStudy, meshes: &[Arc<TriMesh>]) -> Result<ErrorReport> {
    if meshes.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a convergence study needs at least 3 meshes, got {}",
            meshes.len()
        )));
    }
    check_nested(meshes)?;
    let rows = meshes
        .par_iter()
        .map(|mesh| {
            let game = study.game(mesh.clone())?;
            let eq = game.solve(&study.options)?;
            compute_errors(&study.bundle, &game, &eq)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport::new(rows))
}

/// Left and right sides of one lemma inequality on one mesh.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    /// Empirical constant `lhs / rhs`; zero when both sides vanish.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 && self.rhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Lemma quantities on one mesh:
///
/// * `lemma1`: `‖y_h(u) − y_h‖₁ + ‖p_h(u) − p_h‖` against
///   `Σ_i ‖P_i u_i − u_{i,h}‖ + h ‖P_i u_i − u_i‖`,
/// * `lemma2`: `Σ_i ‖φ_{i,h}(u) − φ_{i,h}‖₁ + ‖r_{i,h}(u) − r_{i,h}‖` against
///   `‖y − y_h‖`,
/// * `lemma4`: `Σ_i ‖P_i u_i − u_{i,h}‖` against
///   `‖y − y_h(u)‖ + Σ_i ‖φ_i − φ_{i,h}(u)‖ + h ‖u_i − P_i u_i‖`,
///
/// where `y_h(u)` and `φ_{i,h}(u)` are discrete solutions driven by the exact
/// controls and the exact adjoint loads.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LemmaRow {
    pub h: f64,
    pub lemma1: Sides,
    pub lemma2: Sides,
    pub lemma4: Sides,
}

pub fn lemma_row(bundle: &ManufacturedBundle, game: &NashGame, eq: &EquilibriumBundle) -> Result<LemmaRow> {
    let p = game.problem();
    let (spaces, forms) = (p.spaces(), p.forms());
    let b = *bundle;
    let h = game.mesh().mesh_size().0;
    let nu = forms.nu;
    let h1 = |d: &[f64]| (forms.velocity_mass.bilinear(d, d) + forms.stiffness.bilinear(d, d) / nu).sqrt();
    let l2p = |d: &[f64]| forms.pressure_mass.bilinear(d, d).max(0.0).sqrt();
    let sub = |a: &[f64], c: &[f64]| -> Vec<f64> { a.iter().zip(c).map(|(x, y)| x - y).collect() };

    let aux_state = p.solve_load(&velocity_load(spaces, forms, &b.state_load())?)?;
    let aux_adj = [0, 1]
        .map(|i| velocity_load(spaces, forms, &b.adjoint_load(i)).and_then(|l| p.solve_load(&l)));
    let [a0, a1] = aux_adj;
    let aux_adj = [a0?, a1?];

    let mut pu_gap = [0.0; 2];
    let mut pu_err = [0.0; 2];
    for i in 0..2 {
        let pu = p.projector(i).project(&spaces.controls[i], &b.control(i))?;
        pu_gap[i] = game.control_norm(i, &sub(&pu, &eq.controls[i]));
        pu_err[i] = vector_error(&spaces.controls[i], &pu, move |x| b.u(i, x), None).l2;
    }

    let lemma1 = Sides {
        lhs: h1(&sub(&aux_state.velocity, &eq.state.velocity)) + l2p(&sub(&aux_state.pressure, &eq.state.pressure)),
        rhs: (0..2).map(|i| pu_gap[i] + h * pu_err[i]).sum(),
    };
    let y_err = velocity_error(game, &eq.state.velocity, b.state()).l2;
    let lemma2 = Sides {
        lhs: (0..2)
            .map(|i| {
                h1(&sub(&aux_adj[i].velocity, &eq.adjoints[i].velocity))
                    + l2p(&sub(&aux_adj[i].pressure, &eq.adjoints[i].pressure))
            })
            .sum(),
        rhs: y_err,
    };
    let aux_y_err = velocity_error(game, &aux_state.velocity, b.state()).l2;
    let aux_phi_err: f64 = (0..2)
        .map(|i| velocity_error(game, &aux_adj[i].velocity, b.adjoint(i)).l2)
        .sum();
    let lemma4 = Sides {
        lhs: pu_gap.iter().sum(),
        rhs: aux_y_err + aux_phi_err + h * pu_err.iter().sum::<f64>(),
    };
    Ok(LemmaRow {
        h,
        lemma1,
        lemma2,
        lemma4,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LemmaReport {
    pub rows: Vec<LemmaRow>,
}

impl LemmaReport {
    /// Empirical constants of lemma `which` (1, 2 or 4) on each mesh.
    pub fn ratios(&self, which: u8) -> Result<Vec<f64>> {
        let pick = |r: &LemmaRow| match which {
            1 => Ok(r.lemma1),
            2 => Ok(r.lemma2),
            4 => Ok(r.lemma4),
            _ => Err(Error::InvalidArgument(format!("no lemma {which}"))),
        };
        self.rows.iter().map(|r| pick(r).map(|s| s.ratio())).collect()
    }

    /// Whether every ratio stays within `factor` times the coarsest one.
    pub fn bounded(&self, which: u8, factor: f64) -> Result<bool> {
        let r = self.ratios(which)?;
        let first = r.first().copied().unwrap_or(0.0);
        Ok(r.iter().all(|v| v.is_finite() && *v <= factor * first))
    }
}

pub fn check_lemma_inequalities(study: &ConvergenceStudy, meshes: &[Arc<TriMesh>]) -> Result<LemmaReport> {
    let rows = meshes
        .par_iter()
        .map(|mesh| {
            let game = study.game(mesh.clone())?;
            let eq = game.solve(&study.options)?;
            lemma_row(&study.bundle, &game, &eq)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LemmaReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, refine, DomainSpec};

    fn meshes(n: usize, levels: usize) -> Vec<Arc<TriMesh>> {
        let mut out = vec![Arc::new(generate(&DomainSpec::unit_square(n)).unwrap())];
        for _ in 1..levels {
            let next = refine(out.last().unwrap()).unwrap();
            out.push(Arc::new(next));
        }
        out
    }

    #[test]
    fn zero_equilibrium_errors_equal_exact_norms() {
        let bundle = ManufacturedBundle::new(1.0, [1.0, 0.5]).unwrap();
        let study = ConvergenceStudy::new(bundle);
        let mesh = meshes(4, 1).remove(0);
        let game = study.game(mesh).unwrap();
        let zero_game = NashGame::new(game.mesh().clone(), crate::nash::GameSpec::zero(1.0, [1.0, 0.5])).unwrap();
        let eq = zero_game.solve(&SolverOptions::default()).unwrap();
        let row = compute_errors(&bundle, &game, &eq).unwrap();
        // ‖curl(sin²πx sin²πy)‖² = 2 · (3/8) · (π²/2).
        let exact = (3.0 * std::f64::consts::PI.powi(2) / 8.0).sqrt();
        assert!((row.y_l2 - exact).abs() < 1e-6 * exact);
        assert!(row.y_l2 <= row.y_h1);
        // ‖sin 2πx sin 2πy‖ = 1/2.
        assert!((row.p_l2 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn velocity_error_ratio_between_two_meshes() {
        let bundle = ManufacturedBundle::new(1.0, [1.0, 0.5]).unwrap();
        let study = ConvergenceStudy::new(bundle);
        let m = meshes(8, 2);
        let errs: Vec<ErrorRow> = m
            .iter()
            .map(|mesh| {
                let game = study.game(mesh.clone()).unwrap();
                compute_errors(&bundle, &game, &game.solve(&study.options).unwrap()).unwrap()
            })
            .collect();
        let ratio = errs[0].y_l2 / errs[1].y_l2;
        assert!((6.0..=10.5).contains(&ratio), "ratio {ratio}");
        for r in &errs {
            for i in 0..2 {
                assert!(r.phi_l2[i] <= r.phi_h1[i]);
            }
        }
    }

    #[test]
    fn non_nested_sequence_rejected() {
        let a = Arc::new(generate(&DomainSpec::unit_square(4)).unwrap());
        let b = Arc::new(generate(&DomainSpec::unit_square(6)).unwrap());
        let c = Arc::new(generate(&DomainSpec::unit_square(8)).unwrap());
        let study = ConvergenceStudy::new(ManufacturedBundle::new(1.0, [1.0, 1.0]).unwrap());
        assert!(matches!(run_convergence(&study, &[a.clone(), b, c.clone()]), Err(Error::InvalidMesh(_))));
        assert!(run_convergence(&study, &[a, c]).is_err());
    }

    #[test]
    fn zero_data_lemma_sides_vanish() {
        let bundle = ManufacturedBundle::zero(1.0, [1.0, 0.5]).unwrap();
        let study = ConvergenceStudy::new(bundle);
        let report = check_lemma_inequalities(&study, &meshes(4, 2)).unwrap();
        for row in &report.rows {
            assert_eq!(row.lemma4.rhs, 0.0);
            assert!(row.lemma4.lhs <= 1e-9);
            assert!(row.lemma1.lhs <= 1e-9 && row.lemma2.lhs <= 1e-9);
        }
    }

    #[test]
    fn lemma2_vanishes_for_auxiliary_controls() {
        // If the discrete state is replaced by the auxiliary one driven by the
        // exact data, the adjoint difference system has zero load and the
        // auxiliary adjoints coincide with the discrete ones.
        let bundle = ManufacturedBundle::new(1.0, [1.0, 0.5]).unwrap();
        let study = ConvergenceStudy::new(bundle);
        let game = study.game(meshes(4, 1).remove(0)).unwrap();
        let mut eq = game.solve(&study.options).unwrap();
        let p = game.problem();
        let (sp, fm) = (p.spaces(), p.forms());
        for i in 0..2 {
            eq.adjoints[i] = p.solve_load(&velocity_load(sp, fm, &bundle.adjoint_load(i)).unwrap()).unwrap();
        }
        let row = lemma_row(&bundle, &game, &eq).unwrap();
        assert!(row.lemma2.lhs < 1e-14, "{}", row.lemma2.lhs);
    }
}
