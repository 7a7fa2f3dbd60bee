//! Batch front end of the nash-stokes solver: TOML run configurations, the
//! solve / converge / compare / example-multidomain workflows, the stream
//! function target of the multi-domain example and legacy-VTK output.

pub mod config;
pub mod target;
pub mod vtk;
pub mod workflow;

pub use config::{Overrides, RunConfig, Workflow};
pub use workflow::{run, Summary};
