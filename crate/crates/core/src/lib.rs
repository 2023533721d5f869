//! Membership tests for commutators and differences of idempotents and of
//! orthogonal projections, for their norm closures, and construction of
//! explicit certificate pairs.

pub mod classify;
pub mod compact;
pub mod construct;
pub mod error;
pub mod io;
pub mod linalg;
pub mod testkit;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerances, C64};
