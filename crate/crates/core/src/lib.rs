//! Pure pairs of commuting isometries: model construction, wandering data,
//! defect and fringe analysis, analytic invariants and unitary equivalence.

pub mod analytic;
pub mod bcl;
pub mod bidisc;
pub mod defect;
pub mod equivalence;
pub mod error;
pub mod hardy;
pub mod json;
pub mod linalg;
pub mod model;
pub mod random;

pub use error::{Error, Result};
pub use linalg::TolerancePolicy;
