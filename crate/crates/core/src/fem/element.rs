//! Affine triangle geometry and the Lagrange P1/P2 shape functions.
//!
//! P2 local ordering: vertex functions 0..3, then the edge functions for local
//! edges (0,1), (1,2), (2,0), matching [`crate::mesh::EDGE_VERTS`].

use crate::mesh::{Point, TriMesh, EDGE_VERTS};

#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub corners: [Point; 3],
    /// Twice the area; positive for counter-clockwise triangles.
    pub jacobian: f64,
    pub grad_bary: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(mesh: &TriMesh, t: usize) -> Self {
        Self::from_corners(mesh.corners(t))
    }

    pub fn from_corners(p: [Point; 3]) -> Self {
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let grad_bary = [
            [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
            [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
            [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
        ];
        Self {
            corners: p,
            jacobian: det,
            grad_bary,
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.jacobian
    }

    pub fn map(&self, l: [f64; 3]) -> Point {
        let p = &self.corners;
        [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ]
    }
}

pub fn p1_values(l: [f64; 3]) -> [f64; 3] {
    l
}

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    let mut v = [0.0; 6];
    for i in 0..3 {
        v[i] = l[i] * (2.0 * l[i] - 1.0);
    }
    for (k, [a, b]) in EDGE_VERTS.iter().enumerate() {
        v[3 + k] = 4.0 * l[*a] * l[*b];
    }
    v
}

pub fn p2_gradients(l: [f64; 3], geo: &ElementGeometry) -> [[f64; 2]; 6] {
    let g = &geo.grad_bary;
    let mut out = [[0.0; 2]; 6];
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        out[i] = [s * g[i][0], s * g[i][1]];
    }
    for (k, [a, b]) in EDGE_VERTS.iter().enumerate() {
        out[3 + k] = [
            4.0 * (l[*a] * g[*b][0] + l[*b] * g[*a][0]),
            4.0 * (l[*a] * g[*b][1] + l[*b] * g[*a][1]),
        ];
    }
    out
}
