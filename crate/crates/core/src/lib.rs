#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! First Dirichlet eigenvalues of weighted p-Laplacians on planar domains
//! punctured by length-constrained segment networks, with the explicit
//! bounds, asymptotic densities and optimizers that go with them.

pub mod asymptotics;
pub mod bounds;
pub mod discretize;
pub mod error;
pub mod geometry;
pub mod maxdist;
pub mod optimize;
pub mod spectral;

pub use error::{Error, Result};
