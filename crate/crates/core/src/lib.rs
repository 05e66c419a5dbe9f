//! Shape optimization for the exterior Bernoulli free boundary problem on
//! annular domains, with P1 finite elements, and numerical audits of the
//! boundedness estimates for the Robin state.

pub mod audit;
pub mod convergence;
pub mod cost;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod optimize;
pub mod state;

pub use error::{Error, Result};
