//! Finsler curvature pipeline and an algebraic constant flag curvature test.
//!
//! The pipeline runs `F → g → G → N → R → Φ` at a phase point `(x, y)` with
//! every derivative taken exactly through truncated Taylor arithmetic
//! ([`jets`]). On top of it, [`cfc`] decides constant flag curvature from the
//! algebraic shape of `R`, and [`projective`] transports curvature along a
//! projective change of spray.

pub mod cfc;
pub mod cli;
pub mod error;
pub mod exec;
pub mod expr;
pub mod geometry;
pub mod jets;
pub mod linalg;
pub mod metrics;
pub mod projective;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use metrics::{Domain, MetricDefinition, PhasePoint};
