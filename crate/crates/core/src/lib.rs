//! Projective dynamics: exact tensor algebra with Young symmetries, polynomial
//! first integrals, dynamics on screens, and the screen-compatibility test for
//! quadratic integrals.

pub mod exactlin;
pub mod young;
pub mod symbolic;
pub mod screens;
pub mod polyintegrals;
pub mod curvclass;
pub mod compat;
