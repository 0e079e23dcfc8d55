//! Exact-arithmetic construction of the dual-knot surgery small model and its
//! involution over `F2[U, V]`.
//!
//! The crate is organized bottom-up:
//!
//! - [`ring`]: sparse bivariate (Laurent) polynomials over the two-element
//!   field, with the formal derivatives and the variable swap.
//! - [`gf2`]: packed linear algebra over the two-element field.
//! - [`complex`]: free bigraded chain complexes, variance-flagged chain maps,
//!   the exact homotopy solver, minimal-model reduction, and tower
//!   diagnostics.
//! - [`hpl`]: hypercube homological perturbation machinery.
//! - [`smallmodel`]: the closed-form small surgery model, its involution,
//!   truncation, and assembly.
//! - [`oracle`]: brute-force expanded-model re-derivation of every
//!   small-model map, for cross-checking.
//! - [`localclass`]: local models, local-map verification, and the bounded
//!   local-triviality search.
//! - [`catalog`]: built-in example complexes.
//! - [`json`]: the interchange document schema.
//!
//! Determinism: every routine is deterministic; randomized checks live only
//! in tests with fixed seeds.

pub mod catalog;
pub mod complex;
pub mod gf2;
pub mod hpl;
pub mod json;
pub mod localclass;
pub mod oracle;
pub mod ring;
pub mod smallmodel;
