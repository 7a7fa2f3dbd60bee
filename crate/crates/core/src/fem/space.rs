use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::element::{p1_values, p2_values, p2_gradients, ElementGeometry};
use crate::mesh::TriMesh;

/// Supported finite element families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Continuous piecewise linears (pressure).
    P1Scalar,
    /// One component of the Taylor-Hood velocity.
    P2Scalar,
    /// Taylor-Hood velocity, two components.
    P2Vector,
    /// Vector control of polynomial degree `k` on a subset of triangles:
    /// `k = 0` is discontinuous piecewise constant, `k = 1` continuous linear.
    Control { degree: u8 },
}

/// Degrees of freedom of one family on (part of) a mesh.
///
/// Vector spaces store component-major coefficients: global dof
/// `c * n_scalar + s` is component `c` of scalar dof `s`.
#[derive(Clone, Debug)]
pub struct FeSpace {
    mesh: Arc<TriMesh>,
    family: Family,
    /// Triangles carrying the space (all for state spaces, the control region otherwise).
    elements: Vec<usize>,
    /// Scalar dofs of each entry of `elements`.
    element_dofs: Vec<Vec<usize>>,
    n_scalar: usize,
    /// Mesh vertex of each scalar dof, when it sits on one.
    dof_vertex: Vec<Option<usize>>,
}

impl FeSpace {
    pub fn new(mesh: Arc<TriMesh>, family: Family) -> Result<Self> {
        let all: Vec<usize> = (0..mesh.n_triangles()).collect();
        match family {
            Family::Control { .. } => Self::control(mesh, family, all),
            _ => Self::build(mesh, family, all),
        }
    }

    /// Control space on the triangles in `region`.
    pub fn control(mesh: Arc<TriMesh>, family: Family, region: Vec<usize>) -> Result<Self> {
        match family {
            Family::Control { degree: 0 | 1 } => {}
            Family::Control { degree } => {
                return Err(Error::UnsupportedFamily(format!("control degree {degree} (only 0 and 1)")))
            }
            other => return Err(Error::UnsupportedFamily(format!("{other:?} is not a control family"))),
        }
        if region.is_empty() {
            return Err(Error::InvalidArgument("control region contains no triangles".into()));
        }
        if region.iter().any(|&t| t >= mesh.n_triangles()) {
            return Err(Error::InvalidArgument("control region references a missing triangle".into()));
        }
        Self::build(mesh, family, region)
    }

    fn build(mesh: Arc<TriMesh>, family: Family, elements: Vec<usize>) -> Result<Self> {
        let nv = mesh.n_vertices();
        let (element_dofs, n_scalar, dof_vertex) = match family {
            Family::P1Scalar => (
                elements.iter().map(|&t| mesh.triangles()[t].to_vec()).collect(),
                nv,
                (0..nv).map(Some).collect(),
            ),
            Family::P2Scalar | Family::P2Vector => {
                let dofs = elements
                    .iter()
                    .map(|&t| {
                        let v = mesh.triangles()[t];
                        let e = mesh.triangle_edges()[t];
                        vec![v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]]
                    })
                    .collect();
                let n = nv + mesh.n_edges();
                let dof_vertex = (0..n).map(|i| (i < nv).then_some(i)).collect();
                (dofs, n, dof_vertex)
            }
            Family::Control { degree: 0 } => (
                (0..elements.len()).map(|k| vec![k]).collect(),
                elements.len(),
                vec![None; elements.len()],
            ),
            Family::Control { degree: 1 } => {
                let mut local = vec![usize::MAX; nv];
                let mut dof_vertex = Vec::new();
                let mut dofs = Vec::with_capacity(elements.len());
                // Number the region's vertices in increasing mesh order.
                let mut used = vec![false; nv];
                for &t in &elements {
                    for v in mesh.triangles()[t] {
                        used[v] = true;
                    }
                }
                for v in 0..nv {
                    if used[v] {
                        local[v] = dof_vertex.len();
                        dof_vertex.push(Some(v));
                    }
                }
                for &t in &elements {
                    dofs.push(mesh.triangles()[t].iter().map(|&v| local[v]).collect());
                }
                (dofs, dof_vertex.len(), dof_vertex)
            }
            Family::Control { degree } => {
                return Err(Error::UnsupportedFamily(format!("control degree {degree}")))
            }
        };
        Ok(Self {
            mesh,
            family,
            elements,
            element_dofs,
            n_scalar,
            dof_vertex,
        })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn components(&self) -> usize {
        match self.family {
            Family::P1Scalar | Family::P2Scalar => 1,
            Family::P2Vector | Family::Control { .. } => 2,
        }
    }

    pub fn n_scalar(&self) -> usize {
        self.n_scalar
    }

    pub fn dim(&self) -> usize {
        self.n_scalar * self.components()
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    /// Scalar dofs of the `k`-th element of [`Self::elements`].
    pub fn element_dofs(&self, k: usize) -> &[usize] {
        &self.element_dofs[k]
    }

    pub fn dof_vertex(&self, s: usize) -> Option<usize> {
        self.dof_vertex[s]
    }

    pub fn same_mesh(&self, other: &FeSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }

    /// Scalar shape function values at barycentric point `l`.
    pub fn shape_values(&self, l: [f64; 3]) -> Vec<f64> {
        match self.family {
            Family::P1Scalar | Family::Control { degree: 1 } => p1_values(l).to_vec(),
            Family::P2Scalar | Family::P2Vector => p2_values(l).to_vec(),
            Family::Control { .. } => vec![1.0],
        }
    }

    pub fn shape_gradients(&self, l: [f64; 3], geo: &ElementGeometry) -> Vec<[f64; 2]> {
        match self.family {
            Family::P1Scalar | Family::Control { degree: 1 } => geo.grad_bary.to_vec(),
            Family::P2Scalar | Family::P2Vector => p2_gradients(l, geo).to_vec(),
            Family::Control { .. } => vec![[0.0, 0.0]],
        }
    }

    /// Value and gradient of a scalar coefficient vector (or component `c` of a
    /// vector one) at barycentric point `l` of the `k`-th element.
    pub fn eval_component(
        &self,
        coeffs: &[f64],
        c: usize,
        k: usize,
        l: [f64; 3],
        geo: &ElementGeometry,
    ) -> (f64, [f64; 2]) {
        let dofs = &self.element_dofs[k];
        let offset = c * self.n_scalar;
        let vals = self.shape_values(l);
        let grads = self.shape_gradients(l, geo);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (j, &d) in dofs.iter().enumerate() {
            let x = coeffs[offset + d];
            v += x * vals[j];
            g[0] += x * grads[j][0];
            g[1] += x * grads[j][1];
        }
        (v, g)
    }

    /// Nodal interpolation of a vector function (P2 / P1 families only).
    pub fn interpolate_vector(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let n = self.n_scalar;
        let mut out = vec![0.0; self.dim()];
        for s in 0..n {
            let x = self.dof_point(s);
            let v = f(x);
            out[s] = v[0];
            if self.components() == 2 {
                out[n + s] = v[1];
            }
        }
        out
    }

    pub fn interpolate_scalar(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        (0..self.n_scalar).map(|s| f(self.dof_point(s))).collect()
    }

    /// Location of the Lagrange node of scalar dof `s`.
    pub fn dof_point(&self, s: usize) -> [f64; 2] {
        let m = &self.mesh;
        match self.family {
            Family::P1Scalar | Family::Control { degree: 1 } => m.vertices()[self.dof_vertex[s].unwrap()],
            Family::P2Scalar | Family::P2Vector => {
                let nv = m.n_vertices();
                if s < nv {
                    m.vertices()[s]
                } else {
                    let [a, b] = m.edges()[s - nv];
                    let (pa, pb) = (m.vertices()[a], m.vertices()[b]);
                    [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
                }
            }
            Family::Control { .. } => m.centroid(self.elements[s]),
        }
    }

    /// Scalar dofs lying on the domain boundary (P2/P1 families).
    pub fn boundary_scalar_dofs(&self) -> Vec<usize> {
        let m = &self.mesh;
        let nv = m.n_vertices();
        match self.family {
            Family::P1Scalar => (0..nv).filter(|&v| m.boundary_vertex_flags()[v]).collect(),
            Family::P2Scalar | Family::P2Vector => (0..nv)
                .filter(|&v| m.boundary_vertex_flags()[v])
                .chain((0..m.n_edges()).filter(|&e| m.boundary_edge_flags()[e]).map(|e| nv + e))
                .collect(),
            Family::Control { .. } => Vec::new(),
        }
    }
}
