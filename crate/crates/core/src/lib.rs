//! Group-covariant minimum-error discrimination and an asymmetry / which-subspace
//! duality relation for finite groups.
//!
//! The modules build on each other bottom-up:
//!
//! - [`numerics`]: dense complex matrices, Jacobi eigensolver, PSD helpers.
//! - [`groups`]: finite groups with complete unitary irrep data, representations.
//! - [`decompose`]: isotypic projectors and component norms.
//! - [`discrimination`]: closed-form orbit success probability, covariant POVMs,
//!   a certified general solver.
//! - [`duality`]: tagged states and the duality report.
//! - [`coherence`]: l1 coherence and the cyclic-group equivalence.
//! - [`verify`]: the invariant suite run by `gasym verify`.

pub mod coherence;
pub mod decompose;
pub mod discrimination;
pub mod duality;
pub mod error;
pub mod groups;
pub mod numerics;
pub mod random;
pub mod verify;

pub use error::{Error, Result};
