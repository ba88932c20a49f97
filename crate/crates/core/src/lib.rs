//! Numerics for a lossy one-dimensional high-Q cavity.
//!
//! The cavity is a planar stack: a perfect mirror (layer 0), the cavity
//! medium of length `l` (layer 1), a fractionally transparent coupling
//! mirror of thickness `d` (layer 2) and the outside half-space (layer 3).
//! Units: `c = 1`; frequencies are rad per unit time, lengths share the
//! unit of `l`.
//!
//! The crate covers the chain
//! stack → Fresnel coefficients → Green function → complex resonances →
//! loss budget → mode weights (η, ζ) → phase-space output states.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod green_function;
pub mod io_weights;
pub mod optical_stack;
pub mod par;
pub mod phase_space;
pub mod quadrature;
pub mod resonances;
pub mod special;

pub use error::{CavityError, Result};
pub use num_complex::Complex64;
