//! Tracking target of the multi-domain example: the curl of the P2 solution of
//! `−Δψ = 1` in a labelled subdomain with `ψ = 0` on its boundary, extended by
//! zero to the rest of the mesh.

use std::sync::Arc;

use anyhow::{bail, Result};
use nash_stokes::fem::element::{p2_gradients, p2_values, ElementGeometry};
use nash_stokes::fem::{Family, FeSpace, QuadratureRule, VectorData};
use nash_stokes::mesh::{Point, TriMesh};
use nash_stokes::sparse::{LuFactor, TripletBuilder};

/// Piecewise-quadratic stream function on one subdomain.
#[derive(Clone, Debug)]
pub struct Streamfunction {
    space: FeSpace,
    coeffs: Vec<f64>,
    inside: Vec<bool>,
}

impl Streamfunction {
    pub fn mesh(&self) -> &Arc<TriMesh> {
        self.space.mesh()
    }

    /// Coefficients in the P2 scalar space of the whole mesh (zero outside).
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn contains(&self, t: usize) -> bool {
        self.inside[t]
    }

    /// Value and gradient on triangle `t` at `x`; zero outside the subdomain.
    pub fn eval(&self, t: usize, x: Point) -> (f64, [f64; 2]) {
        if !self.inside[t] {
            return (0.0, [0.0, 0.0]);
        }
        let geo = ElementGeometry::new(self.mesh(), t);
        self.space.eval_component(&self.coeffs, 0, t, barycentric(&geo, x), &geo)
    }

    /// `(∂_y ψ, −∂_x ψ)`, evaluated per triangle.
    pub fn velocity(self: &Arc<Self>) -> VectorData {
        let s = Arc::clone(self);
        VectorData::piecewise(move |t, x| {
            let (_, g) = s.eval(t, x);
            [g[1], -g[0]]
        })
    }
}

fn barycentric(geo: &ElementGeometry, x: Point) -> [f64; 3] {
    let p0 = geo.corners[0];
    let d = [x[0] - p0[0], x[1] - p0[1]];
    let l1 = geo.grad_bary[1][0] * d[0] + geo.grad_bary[1][1] * d[1];
    let l2 = geo.grad_bary[2][0] * d[0] + geo.grad_bary[2][1] * d[1];
    [1.0 - l1 - l2, l1, l2]
}

/// Solves `−Δψ = 1` on the triangles labelled `label`, `ψ = 0` on the
/// boundary of that subdomain.
pub fn solve_streamfunction(mesh: &Arc<TriMesh>, label: &str) -> Result<Streamfunction> {
    let region = mesh.triangles_with_labels(&[label])?;
    if region.is_empty() {
        bail!("subdomain '{label}' contains no triangles");
    }
    let space = FeSpace::new(mesh.clone(), Family::P2Scalar)?;
    let n = space.dim();
    let nv = mesh.n_vertices();
    let mut inside = vec![false; mesh.n_triangles()];
    let mut edge_uses = vec![0u8; mesh.n_edges()];
    for &t in &region {
        inside[t] = true;
        for e in mesh.triangle_edges()[t] {
            edge_uses[e] += 1;
        }
    }
    // Dofs of the subdomain, minus those on edges it does not share internally.
    let mut free = vec![false; n];
    for &t in &region {
        for &d in space.element_dofs(t) {
            free[d] = true;
        }
    }
    for (e, &uses) in edge_uses.iter().enumerate() {
        if uses == 1 {
            let [a, b] = mesh.edges()[e];
            free[a] = false;
            free[b] = false;
            free[nv + e] = false;
        }
    }
    let mut index = vec![None; n];
    let mut n_free = 0;
    for d in 0..n {
        if free[d] {
            index[d] = Some(n_free);
            n_free += 1;
        }
    }
    if n_free == 0 {
        bail!("subdomain '{label}' has no interior degrees of freedom");
    }
    let rule = QuadratureRule::degree5();
    let mut k = TripletBuilder::new(n_free, n_free);
    let mut rhs = vec![0.0; n_free];
    for &t in &region {
        let geo = ElementGeometry::new(mesh, t);
        let dofs = space.element_dofs(t);
        for (l, w) in rule.iter() {
            let jw = w * geo.jacobian;
            let g = p2_gradients(l, &geo);
            let v = p2_values(l);
            for a in 0..6 {
                let Some(i) = index[dofs[a]] else { continue };
                rhs[i] += jw * v[a];
                for b in 0..6 {
                    if let Some(j) = index[dofs[b]] {
                        k.add(i, j, jw * (g[a][0] * g[b][0] + g[a][1] * g[b][1]));
                    }
                }
            }
        }
    }
    let lu = LuFactor::new(&k.build())?;
    let x = lu.solve(&rhs);
    let mut coeffs = vec![0.0; n];
    for d in 0..n {
        if let Some(i) = index[d] {
            coeffs[d] = x[i];
        }
    }
    Ok(Streamfunction { space, coeffs, inside })
}

/// `y_{1,d}` of the multi-domain example.
pub fn build_streamfunction_target(mesh: &Arc<TriMesh>, label: &str) -> Result<VectorData> {
    Ok(Arc::new(solve_streamfunction(mesh, label)?).velocity())
}
