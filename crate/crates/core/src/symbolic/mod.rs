//! Multivariate polynomials and sums of polynomials times rational powers of
//! polynomials, enough to carry homogenized integrals and central forces.

mod poly;
mod radexpr;

pub use poly::{Exps, Poly};
pub use radexpr::RadExpr;
