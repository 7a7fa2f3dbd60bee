//! Elimination of homogeneous Dirichlet (no-slip) velocity dofs.

use crate::fem::space::FeSpace;

/// Numbering of the free velocity dofs.
#[derive(Clone, Debug)]
pub struct DirichletMap {
    /// `full -> free` index, `None` on the boundary.
    free_of: Vec<Option<usize>>,
    /// `free -> full` index.
    full_of: Vec<usize>,
}

impl DirichletMap {
    pub fn new(velocity: &FeSpace) -> Self {
        let n = velocity.n_scalar();
        let mut fixed = vec![false; velocity.dim()];
        for s in velocity.boundary_scalar_dofs() {
            for c in 0..velocity.components() {
                fixed[c * n + s] = true;
            }
        }
        let mut free_of = vec![None; fixed.len()];
        let mut full_of = Vec::new();
        for (i, &f) in fixed.iter().enumerate() {
            if !f {
                free_of[i] = Some(full_of.len());
                full_of.push(i);
            }
        }
        Self { free_of, full_of }
    }

    pub fn n_full(&self) -> usize {
        self.free_of.len()
    }

    pub fn n_free(&self) -> usize {
        self.full_of.len()
    }

    pub fn n_eliminated(&self) -> usize {
        self.n_full() - self.n_free()
    }

    pub fn free_of(&self) -> &[Option<usize>] {
        &self.free_of
    }

    pub fn full_of(&self) -> &[usize] {
        &self.full_of
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.full_of.iter().map(|&i| full[i]).collect()
    }

    /// Extends by zero on the boundary.
    pub fn extend(&self, free: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_full()];
        for (k, &i) in self.full_of.iter().enumerate() {
            out[i] = free[k];
        }
        out
    }
}
