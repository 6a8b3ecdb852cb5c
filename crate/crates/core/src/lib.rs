//! Explicit completely bounded frame for the reduced free-group C*-algebra
//! and the frame-to-basis constructions built on top of it.

// `!(x > 0.0)` is used on purpose so that NaN is rejected as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod basis;
pub mod cli;
pub mod error;
pub mod frame;
pub mod free_group;
pub mod multipliers;
pub mod norms;
pub mod sum;
pub mod verify;

pub use algebra::{CoefficientMap, GroupAlgebraElement, MatrixLevelElement};
pub use error::{Error, Result};
pub use frame::{FrameTerm, FreeGroupFrame};
pub use free_group::{Letter, Word};
pub use multipliers::RadialMultiplier;
pub use norms::{NormConfig, NormEstimate};
