//! Stochastic localization of log-concave measures, isotropic position of
//! convex bodies, and Monte Carlo estimators for Gaussian-comparison and
//! rotation-containment bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod bodies;
pub mod numkit;
pub mod sampling;
pub mod isotropic;
pub mod localization;
pub mod estimators;

pub use error::{Error, Result};
pub use bodies::{Body, BodySpec};
pub use estimators::{DistanceCertificate, EstimateRecord, ScalarEstimate, TheoryConstants};
pub use numkit::{Matrix, RngStream, SymMatrix, Vector};
