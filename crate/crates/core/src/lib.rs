//! Left-invariant sub-Riemannian Engel structures.
//!
//! The crate covers four pieces of computation on 4-dimensional Lie algebras
//! carrying a rank-2 distribution of growth (2, 3, 4) and a metric on it:
//!
//! - [`algebra`]: bracket tables, the Engel growth check, the Levi-form
//!   kernel and the canonical frame with its six invariants `T1..T6`;
//! - [`classify`]: the polynomial restrictions the invariants must satisfy in
//!   the left-invariant case and the five families solving them;
//! - [`flow`]: the normal geodesic (vertical) Hamiltonian flow and its first
//!   integrals;
//! - [`abnormal`]: strictness, the curvature-like quantity `Δ` and conjugate
//!   times of abnormal geodesics.
//!
//! All numerical rank decisions and residual checks share one tolerance,
//! see [`tol`].

pub mod abnormal;
pub mod algebra;
pub mod classify;
mod error;
pub mod flow;
pub mod io;
mod linalg;
pub mod ode;
pub mod tol;

pub use error::{EngelError, Result};

/// A vector in the 4-dimensional Lie algebra, in the coordinates of the
/// basis the bracket table is written in.
pub type Vec4 = nalgebra::Vector4<f64>;
