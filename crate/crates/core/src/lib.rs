//! Reparametrization-invariant mechanics with Finsler-type Lagrangians built
//! from symmetric tensor fields, plus a Dirac-Nambu-Goto extension to branes.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backgrounds;
pub mod brane;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod jet;
pub mod lagrangian;
pub mod quadrature;
pub mod tensor;

pub use error::{Error, Result};
pub use field::{ScalarField, TensorField};
pub use jet::Jet2;
pub use lagrangian::{CanonicalTerm, Lagrangian, Term, VelocityPotential};
pub use tensor::{contract_full, contract_partial, SymTensor};
