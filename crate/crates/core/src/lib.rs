//! Jet-bundle calculus for hyper-stress theory.
//!
//! The crate evaluates jets of fields through truncated Taylor arithmetic,
//! builds order-one, order-two and non-holonomic stresses on box-shaped
//! bodies, and checks the associated balance (integration by parts)
//! identities numerically with tensor-product Gauss-Legendre quadrature.
//!
//! Axis, component and multi-index positions are zero-based throughout the
//! Rust API.

pub mod balance;
pub mod bundles;
pub mod covariance;
mod error;
pub mod geometry;
pub mod jetcore;
pub mod nonholonomic;
pub mod scenario;
pub mod stress;
pub mod surface;

pub use error::{Error, Result};
