//! Assembly of the Stokes forms, mass matrices and control couplings.
//!
//! * `a(w, z) = ν Σ_c (∇w_c, ∇z_c)` on the P2 velocity,
//! * `b(w, q) = −(q, ∇·w)` between velocity and P1 pressure,
//! * `(B_i v, w) = (χ_{ω_i} v, w)`: the control of player `i` acts by extension
//!   by zero from its region `ω_i`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::element::ElementGeometry;
use crate::fem::field::VectorData;
use crate::fem::quadrature::QuadratureRule;
use crate::fem::space::{Family, FeSpace};
use crate::mesh::TriMesh;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Taylor-Hood pair plus one control space per player, all on one mesh.
#[derive(Clone, Debug)]
pub struct Spaces {
    pub velocity: FeSpace,
    pub pressure: FeSpace,
    pub controls: [FeSpace; 2],
}

impl Spaces {
    /// `regions[i]` lists the triangles of `ω_i`.
    pub fn new(mesh: Arc<TriMesh>, regions: [Vec<usize>; 2], control_degree: u8) -> Result<Self> {
        let family = Family::Control { degree: control_degree };
        let [r1, r2] = regions;
        Ok(Self {
            velocity: FeSpace::new(mesh.clone(), Family::P2Vector)?,
            pressure: FeSpace::new(mesh.clone(), Family::P1Scalar)?,
            controls: [
                FeSpace::control(mesh.clone(), family, r1)?,
                FeSpace::control(mesh, family, r2)?,
            ],
        })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        self.velocity.mesh()
    }

    fn check(&self) -> Result<()> {
        if self.velocity.family() != Family::P2Vector {
            return Err(Error::UnsupportedFamily("velocity space must be P2 vector".into()));
        }
        if self.pressure.family() != Family::P1Scalar {
            return Err(Error::UnsupportedFamily("pressure space must be P1".into()));
        }
        for (i, c) in self.controls.iter().enumerate() {
            if !matches!(c.family(), Family::Control { .. }) {
                return Err(Error::UnsupportedFamily(format!("control space {} is not a control family", i + 1)));
            }
        }
        let same = self.velocity.same_mesh(&self.pressure)
            && self.controls.iter().all(|c| c.same_mesh(&self.velocity));
        if !same {
            return Err(Error::MeshMismatch("velocity, pressure and control spaces must share one mesh".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct AssembledForms {
    pub nu: f64,
    /// `a(·,·)` on all velocity dofs.
    pub stiffness: CsrMatrix,
    /// `b(·,·)`: rows are pressure dofs, columns velocity dofs.
    pub divergence: CsrMatrix,
    pub velocity_mass: CsrMatrix,
    pub pressure_mass: CsrMatrix,
    /// Mass matrix of each control space.
    pub control_mass: [CsrMatrix; 2],
    /// `(B_i v, w)`: rows velocity dofs, columns control dofs of player `i`.
    pub coupling: [CsrMatrix; 2],
    /// `∫ q_j` for each pressure basis function.
    pub pressure_mean: Vec<f64>,
}

pub fn assemble(spaces: &Spaces, nu: f64) -> Result<AssembledForms> {
    spaces.check()?;
    if !(nu > 0.0) {
        return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    let rule = QuadratureRule::degree5();
    let vel = &spaces.velocity;
    let pre = &spaces.pressure;
    let mesh = vel.mesh();
    let nv = vel.n_scalar();
    let np = pre.n_scalar();

    let mut stiffness = TripletBuilder::new(vel.dim(), vel.dim());
    let mut vmass = TripletBuilder::new(vel.dim(), vel.dim());
    let mut div = TripletBuilder::new(np, vel.dim());
    let mut pmass = TripletBuilder::new(np, np);
    let mut mean = vec![0.0; np];

    // Velocity and pressure spaces cover every triangle in mesh order.
    for t in 0..mesh.n_triangles() {
        let geo = ElementGeometry::new(mesh, t);
        let vdofs = vel.element_dofs(t);
        let pdofs = pre.element_dofs(t);
        let mut k_loc = [[0.0; 6]; 6];
        let mut m_loc = [[0.0; 6]; 6];
        let mut b_loc = [[[0.0; 6]; 2]; 3];
        let mut mp_loc = [[0.0; 3]; 3];
        let mut mean_loc = [0.0; 3];
        for (l, w) in rule.iter() {
            let jw = w * geo.jacobian;
            let phi = vel.shape_values(l);
            let dphi = vel.shape_gradients(l, &geo);
            let psi = pre.shape_values(l);
            for i in 0..6 {
                for j in 0..6 {
                    k_loc[i][j] += jw * nu * (dphi[i][0] * dphi[j][0] + dphi[i][1] * dphi[j][1]);
                    m_loc[i][j] += jw * phi[i] * phi[j];
                }
            }
            for a in 0..3 {
                for c in 0..2 {
                    for j in 0..6 {
                        b_loc[a][c][j] -= jw * psi[a] * dphi[j][c];
                    }
                }
                for b in 0..3 {
                    mp_loc[a][b] += jw * psi[a] * psi[b];
                }
                mean_loc[a] += jw * psi[a];
            }
        }
        for c in 0..2 {
            let off = c * nv;
            for i in 0..6 {
                for j in 0..6 {
                    stiffness.add(off + vdofs[i], off + vdofs[j], k_loc[i][j]);
                    vmass.add(off + vdofs[i], off + vdofs[j], m_loc[i][j]);
                }
            }
        }
        for a in 0..3 {
            for c in 0..2 {
                for j in 0..6 {
                    div.add(pdofs[a], c * nv + vdofs[j], b_loc[a][c][j]);
                }
            }
            for b in 0..3 {
                pmass.add(pdofs[a], pdofs[b], mp_loc[a][b]);
            }
            mean[pdofs[a]] += mean_loc[a];
        }
    }

    let [m1, c1] = control_forms(spaces, 0, &rule);
    let [m2, c2] = control_forms(spaces, 1, &rule);

    Ok(AssembledForms {
        nu,
        stiffness: stiffness.build(),
        divergence: div.build(),
        velocity_mass: vmass.build(),
        pressure_mass: pmass.build(),
        control_mass: [m1, m2],
        coupling: [c1, c2],
        pressure_mean: mean,
    })
}

/// Mass matrix and velocity coupling of control space `i`.
fn control_forms(spaces: &Spaces, i: usize, rule: &QuadratureRule) -> [CsrMatrix; 2] {
    let ctl = &spaces.controls[i];
    let vel = &spaces.velocity;
    let mesh = vel.mesh();
    let nv = vel.n_scalar();
    let nu = ctl.n_scalar();
    let mut mass = TripletBuilder::new(ctl.dim(), ctl.dim());
    let mut coupling = TripletBuilder::new(vel.dim(), ctl.dim());
    for (k, &t) in ctl.elements().iter().enumerate() {
        let geo = ElementGeometry::new(mesh, t);
        let cdofs = ctl.element_dofs(k);
        let vdofs = vel.element_dofs(t);
        let nc = cdofs.len();
        let mut m_loc = vec![vec![0.0; nc]; nc];
        let mut c_loc = vec![vec![0.0; nc]; 6];
        for (l, w) in rule.iter() {
            let jw = w * geo.jacobian;
            let psi = ctl.shape_values(l);
            let phi = vel.shape_values(l);
            for a in 0..nc {
                for b in 0..nc {
                    m_loc[a][b] += jw * psi[a] * psi[b];
                }
                for j in 0..6 {
                    c_loc[j][a] += jw * phi[j] * psi[a];
                }
            }
        }
        for c in 0..2 {
            for a in 0..nc {
                for b in 0..nc {
                    mass.add(c * nu + cdofs[a], c * nu + cdofs[b], m_loc[a][b]);
                }
                for j in 0..6 {
                    coupling.add(c * nv + vdofs[j], c * nu + cdofs[a], c_loc[j][a]);
                }
            }
        }
    }
    [mass.build(), coupling.build()]
}

/// `(data, w_j)` for every velocity basis function `w_j`.
pub fn velocity_load(spaces: &Spaces, forms: &AssembledForms, data: &VectorData) -> Result<Vec<f64>> {
    let vel = &spaces.velocity;
    match data {
        VectorData::Zero => Ok(vec![0.0; vel.dim()]),
        VectorData::Discrete(c) => {
            check_discrete(c, vel)?;
            Ok(forms.velocity_mass.mul_vec(c))
        }
        _ => {
            let rule = QuadratureRule::degree5();
            let mesh = vel.mesh();
            let nv = vel.n_scalar();
            let mut load = vec![0.0; vel.dim()];
            for t in 0..mesh.n_triangles() {
                let geo = ElementGeometry::new(mesh, t);
                let dofs = vel.element_dofs(t);
                for (l, w) in rule.iter() {
                    let jw = w * geo.jacobian;
                    let v = data.eval(t, geo.map(l)).expect("callback data");
                    let phi = vel.shape_values(l);
                    for (j, &d) in dofs.iter().enumerate() {
                        load[d] += jw * v[0] * phi[j];
                        load[nv + d] += jw * v[1] * phi[j];
                    }
                }
            }
            Ok(load)
        }
    }
}

/// `‖data‖²_{L²(Ω)}`, with the degree-8 rule for callback data.
pub fn l2_norm_sq(spaces: &Spaces, forms: &AssembledForms, data: &VectorData) -> Result<f64> {
    match data {
        VectorData::Zero => Ok(0.0),
        VectorData::Discrete(c) => {
            check_discrete(c, &spaces.velocity)?;
            Ok(forms.velocity_mass.bilinear(c, c))
        }
        _ => {
            let rule = QuadratureRule::degree8();
            let mesh = spaces.mesh();
            let mut s = 0.0;
            for t in 0..mesh.n_triangles() {
                let geo = ElementGeometry::new(mesh, t);
                for (l, w) in rule.iter() {
                    let v = data.eval(t, geo.map(l)).expect("callback data");
                    s += w * geo.jacobian * (v[0] * v[0] + v[1] * v[1]);
                }
            }
            Ok(s)
        }
    }
}

fn check_discrete(c: &[f64], vel: &FeSpace) -> Result<()> {
    if c.len() != vel.dim() {
        return Err(Error::MeshMismatch(format!(
            "discrete field has {} coefficients, velocity space has {}",
            c.len(),
            vel.dim()
        )));
    }
    Ok(())
}
