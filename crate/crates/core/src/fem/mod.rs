//! Taylor-Hood discretization: elements, spaces, assembly and projections.

pub mod assembly;
pub mod dirichlet;
pub mod element;
pub mod field;
pub mod projection;
pub mod quadrature;
pub mod space;

pub use assembly::{assemble, l2_norm_sq, velocity_load, AssembledForms, Spaces};
pub use dirichlet::DirichletMap;
pub use field::VectorData;
pub use projection::ControlProjector;
pub use quadrature::QuadratureRule;
pub use space::{Family, FeSpace};
