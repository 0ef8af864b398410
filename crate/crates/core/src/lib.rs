//! Numerical laboratory for the short pulse equation
//!
//! ```text
//! u_t − (u³/6)_x = γP,   P_x = u
//! ```
//!
//! written as a conservation law with a nonlocal source. The crate provides
//! the vanishing-viscosity system, the `ε = 0` entropy scheme, and runtime
//! audits of the a-priori bounds and entropy inequalities.

pub mod bounds;
pub mod entropy;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod grid;
pub mod initial;
pub mod io;
pub mod source;

pub use error::{Error, Result};
pub use grid::{BoundaryKind, Field, Grid, Norm};
