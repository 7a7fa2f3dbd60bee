//! Manufactured equilibria, error norms, EOC tables and empirical lemma
//! constants.

pub mod convergence;
pub mod manufactured;
pub mod norms;
pub mod report;

pub use convergence::{
    check_lemma_inequalities, check_nested, compute_errors, lemma_row, run_convergence, ConvergenceStudy, LemmaReport,
    LemmaRow, Sides,
};
pub use manufactured::{make_manufactured, CurlField, ManufacturedBundle};
pub use norms::{scalar_error, vector_error, VectorError};
pub use report::{eoc, ErrorReport, ErrorRow, COLUMNS};
