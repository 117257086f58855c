//! Numerical toolkit for kinetic Fokker–Planck equations: Galilean geometry,
//! kinetic Hölder seminorms, the Kolmogorov Green function, a conservative
//! splitting solver, the nonlinear toy model `∂_t f + v·∇_x f = ρ[f] ∇_v·(∇_v f + v f)`
//! and probe harnesses for a priori constants.

mod error;
pub mod fields;
pub mod geometry;
pub mod green;
pub mod holder;
pub mod numerics;
pub mod probes;
pub mod solver;
pub mod toy;

pub use error::{Error, Result};
pub use fields::{Derivative, Field, Grid, MaxwellianRef, SpatialField};
pub use geometry::{Cylinder, KineticMonomial, KineticPoint, KineticPolynomial};
