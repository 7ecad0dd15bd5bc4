//! Exact verification of Newton-polygon slopes for the L-functions of
//! `f(x) = x^d + a x^{d-1}` over `F_q` when `p ≡ -1 (mod d)`.
//!
//! Three independent routes are provided:
//!
//! * [`polygons`]: closed-form slope predictions, the Hodge polygon and the
//!   gap criterion;
//! * [`lfunction`]: brute-force exponential sums and the exact L-polynomial
//!   in `Z[ζ_{p^M}]`;
//! * [`dwork`]: the Artin–Hasse splitting function, the nuclear Frobenius
//!   matrix and its Fredholm coefficients.
//!
//! [`lemma`] checks the determinant identities behind the slope formula and
//! [`cli`] ties the routes together into a reproducible report.

pub mod cli;
pub mod cyclotomic;
pub mod dwork;
pub mod error;
pub mod exact;
pub mod finite;
pub mod lemma;
pub mod lfunction;
pub mod linalg;
pub mod parallel;
pub mod polygons;

pub use error::{Error, Result};
pub use exact::{BigRational, ValuationQ};
