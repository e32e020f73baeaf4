//! Dilation theory for finite-dimensional von Neumann algebras.
//!
//! An algebra is a finite direct sum of full complex matrix algebras and is
//! described by its list of block sizes. Bimodules over a pair of algebras
//! are kept in standard form, i.e. as integer multiplicity matrices, and
//! completely positive maps carry one Choi block per pair of source/target
//! blocks. On top of these the crate provides
//!
//! * construction and minimization of Stinespring representations
//!   `f(a) = V† (a ⊗ id_E) V`, including an independent GNS construction,
//! * Connes fusion of bimodules and intertwiners with exact associator and
//!   unitor permutations,
//! * extremality tests for CP maps with a fixed unit image, together with a
//!   constructive convex decomposition in the non-extremal case,
//! * the category of generating modules whose morphisms are minimal
//!   representations, composed by fusing environments, and
//! * classification of algebras up to Morita equivalence and *-isomorphism
//!   with explicit witnesses.

pub mod acceptance;
pub mod algebra;
pub mod bimodule;
pub mod config;
pub mod cpinf;
pub mod cpmap;
pub mod dilation;
pub mod error;
pub mod extremal;
pub mod json;
pub mod linalg;
pub mod oracles;

pub use algebra::{Algebra, AlgebraElement};
pub use config::Tolerances;
pub use error::{Error, Result};
