//! Exact construction and verification of self-dual Ricci-flat-or-Einstein
//! neutral 4-metrics of Petrov type III, built from solutions of a two-plane
//! PDE system over a surface, together with the surface-side solvers.
//!
//! Modules, bottom up:
//! - [`exactfield`]: polynomials and rational functions over Q.
//! - [`tensorcalc`]: Christoffel symbols, curvature, Weyl, numeric mirror.
//! - [`duality`]: Hodge star, self-dual splitting, Petrov type, canonical frames.
//! - [`builder`]: the metric and its octuple fields from solution data.
//! - [`pdesolve`]: the surface PDEs, plane connections, characteristics.
//! - [`verify`]: the end-to-end checks.

// index loops mirror the tensor notation
#![allow(clippy::needless_range_loop)]

pub mod builder;
pub mod duality;
pub mod error;
pub mod exactfield;
pub mod par;
pub mod pdesolve;
pub mod tensorcalc;
pub mod verify;

pub use error::{Error, Result};
