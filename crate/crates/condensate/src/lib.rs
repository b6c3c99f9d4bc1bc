//! Finite-scale toolkit for the combinatorics behind condensates of
//! poset-indexed diagrams.
//!
//! Modules, bottom up:
//! - [`poset`]: finite posets, the ▽ operator, classification, ideals,
//!   norm-coverings, `P⟨K⟩` and the free-map / free-section searches.
//! - [`pscaled`]: finite P-scaled Boolean algebras and their Stone duals.
//! - [`freecover`]: the algebra `F(X)` of a norm-covering.
//! - [`structures`]: finite first-order structures and their congruences.
//! - [`diagrams`]: poset-indexed diagrams and the tensor `B ⊗ D`.
//! - [`metric`]: semilattice-metric spaces and covers, unliftable squares.
//! - [`regring`]: finite regular rings and their lattices of principal right ideals.

pub mod diagrams;
pub mod error;
pub mod freecover;
pub mod metric;
pub mod par;
pub mod poset;
pub mod pscaled;
pub mod regring;
pub mod structures;
mod text;

pub use error::{Error, Result};
