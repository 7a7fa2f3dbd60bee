//! Finite element computation of the two-player Nash equilibrium for distributed
//! control of the stationary Stokes equations.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] builds structured triangulations of rectangles and labelled
//!   multi-rectangle domains, with uniform red refinement.
//! * [`fem`] provides quadrature, Taylor-Hood (P2/P1) and control spaces,
//!   assembly of all bilinear forms, Dirichlet elimination and the L2 projection.
//! * [`stokes`] factorizes the bordered saddle-point system once per mesh and
//!   exposes state/adjoint solves and the control-to-state maps.
//! * [`nash`] evaluates costs and gradients and computes the equilibrium by
//!   fixed-point iteration, optimal-step gradient, reduced conjugate gradient or
//!   a dense monolithic oracle.
//! * [`verify`] holds the manufactured equilibrium, error norms, EOC tables and
//!   the empirical lemma-constant checks.

pub mod error;
pub mod fem;
pub mod mesh;
pub mod nash;
pub mod sparse;
pub mod stokes;
pub mod verify;

pub use error::{Error, Result};
pub use mesh::{DomainSpec, Point, TriMesh};
