//! Numerical laboratory for viscous shocks of the 1D hyperbolic–parabolic
//! system
//!
//! ```text
//! ∂t n − ∂x(n q) = ν ∂xx n,
//! ∂t q − ∂x n   = 0,
//! ```
//!
//! the Cole–Hopf image of a Keller–Segel model with singular sensitivity.
//! The crate constructs monotone traveling waves connecting two end states,
//! evolves large perturbations of them with an IMEX moving-frame scheme, and
//! checks at desk scale the computable statements about them: weighted
//! shifted relative-entropy contraction, the relative-entropy inequality
//! suite, De Giorgi truncation energies, a Picard construction of local
//! solutions, and the equivalence with the Keller–Segel system.

// `!(x > 0.0)` style guards are deliberate: they reject NaN along with the
// out-of-domain sign. Index loops over coupled grid arrays stay as loops.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod degiorgi;
pub mod entropy;
pub mod error;
pub mod grid;
pub mod kellersegel;
pub mod lab;
pub mod numerics;
pub mod params;
pub mod solver;
pub mod wave;

pub use error::{Error, Result};
pub use grid::{FieldState, Frame, Grid};
pub use params::{EndStates, TheoremConstants};
pub use wave::WaveProfile;
