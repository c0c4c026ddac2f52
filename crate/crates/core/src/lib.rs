//! Random polytope approximation of smooth convex bodies.
//!
//! The crate models convex bodies with strictly positive curvature (balls,
//! ellipsoids and planar curves given by a support function), integrates over
//! their boundaries, builds convex hulls of random boundary samples in up to
//! five dimensions and measures how far such polytopes are from the body in
//! the surface-area deviation
//! `Δ_s(K, L) = H(∂(K ∪ L)) − H(∂(K ∩ L))`.
//!
//! Module map:
//!
//! - [`geometry`]: body models, support functions, normals and curvatures.
//! - [`integration`]: sphere sampling, boundary integrals, densities and
//!   rejection sampling on the boundary.
//! - [`affine`]: p-affine surface areas, the affine-optimal density, the
//!   random-hull deficit constant and the shrink factor.
//! - [`hull`]: incremental convex hulls and polytope measures.
//! - [`deviation`]: Monte Carlo estimators of surface-area and volume
//!   deviation.
//! - [`experiments`]: end-to-end studies and identity checks.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod deviation;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod hull;
pub mod integration;
pub mod rng;
pub mod special;
pub mod vector;

pub use error::{Error, Result};
pub use geometry::{Body, BoundaryPoint, Direction, SupportCurve};
pub use hull::{convex_hull, Polytope};
pub use integration::{DensitySpec, IntegrationMethod, MonteCarloEstimate};

/// Version tag written into every JSON document the crate produces.
pub const SCHEMA_VERSION: u32 = 1;
