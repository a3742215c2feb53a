//! Calculus engine for regulated functions of one real variable.
//!
//! The crate represents functions on a compact interval as a continuous
//! piecewise-smooth part plus an at-most-countable family of jumps (with
//! optional isolated value overrides), and implements the calculus that
//! makes such functions usable numerically:
//!
//! * jump decomposition, one-sided limits, and the right/left saltus split;
//! * total variation with certified enclosures;
//! * Riemann-Stieltjes integration with Darboux certificates;
//! * a jump-aware Stieltjes integral that pairs the continuous parts by
//!   quadrature and sums the jump contributions explicitly, together with
//!   its integration-by-parts, iterated-integral and norm machinery;
//! * mollification of discontinuous functions into absolutely continuous
//!   ramps with convergence reporting;
//! * reduction of n-th order linear differential equations with measure
//!   coefficients to first-order systems with locally integrable right hand
//!   sides, and an adaptive solver for the reduced systems.

pub mod error;
pub mod expr;
pub mod num;
pub mod qde;
pub mod repfunc;
pub mod mollify;
pub mod rs;
pub mod schema;
pub mod star;
pub mod variation;

pub use error::{Error, Result};
pub use repfunc::RepFunc;
