//! `L²(ω_i)` projection onto a control space.

use crate::error::{Error, Result};
use crate::fem::element::ElementGeometry;
use crate::fem::field::VectorData;
use crate::fem::quadrature::QuadratureRule;
use crate::fem::space::FeSpace;
use crate::sparse::{CsrMatrix, LuFactor};

#[derive(Debug)]
pub struct ControlProjector {
    mass: LuFactor,
    coupling_t: CsrMatrix,
}

impl ControlProjector {
    /// `mass` is the control mass matrix, `coupling` the velocity/control
    /// coupling (rows velocity dofs).
    pub fn new(mass: &CsrMatrix, coupling: &CsrMatrix) -> Result<Self> {
        Ok(Self {
            mass: LuFactor::new(mass)?,
            coupling_t: coupling.transpose(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    /// Solves `M_ctl x = rhs`.
    pub fn apply_mass_inverse(&self, rhs: &[f64]) -> Vec<f64> {
        self.mass.solve(rhs)
    }

    /// Projection of a velocity-space function restricted to the region.
    pub fn project_velocity(&self, w: &[f64]) -> Vec<f64> {
        self.mass.solve(&self.coupling_t.mul_vec(w))
    }

    /// Projection of arbitrary data onto `control`.
    pub fn project(&self, control: &FeSpace, data: &VectorData) -> Result<Vec<f64>> {
        match data {
            VectorData::Zero => Ok(vec![0.0; self.dim()]),
            VectorData::Discrete(w) => {
                if w.len() != self.coupling_t.ncols() {
                    return Err(Error::MeshMismatch("discrete data does not live in the velocity space".into()));
                }
                Ok(self.project_velocity(w))
            }
            _ => {
                let rule = QuadratureRule::degree8();
                let n = control.n_scalar();
                let mut rhs = vec![0.0; control.dim()];
                for (k, &t) in control.elements().iter().enumerate() {
                    let geo = ElementGeometry::new(control.mesh(), t);
                    let dofs = control.element_dofs(k);
                    for (l, w) in rule.iter() {
                        let v = data.eval(t, geo.map(l)).expect("callback data");
                        let psi = control.shape_values(l);
                        for (a, &d) in dofs.iter().enumerate() {
                            rhs[d] += w * geo.jacobian * v[0] * psi[a];
                            rhs[n + d] += w * geo.jacobian * v[1] * psi[a];
                        }
                    }
                }
                Ok(self.mass.solve(&rhs))
            }
        }
    }
}
