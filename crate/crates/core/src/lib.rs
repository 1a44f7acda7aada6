//! Depth reduction of multiple logarithms and symbol-level checks of
//! polylogarithm identities.

pub mod algebra;
pub mod error;
pub mod hyperlog;
pub mod identities;
pub mod mpl;
pub mod reduction;
pub mod symbolic;

pub use error::{Error, Result};
