//! Numerical toolkit for the "simple equation" of the dilute Bose gas: the
//! constrained convolution PDE
//!
//! ```text
//! (-Lap + 4e + V(x)) u(x) = V(x) + 2 e rho (u * u)(x),
//! e = (rho / 2) Int (1 - u(x)) V(x) dx,
//! ```
//!
//! solved by the constructive monotone iteration with a certified scalar
//! bracket, plus the analysis layer that checks the theory's quantitative
//! predictions at desk scale: the Lee-Huang-Yang dilute expansion, the dense
//! limit e -> (rho/2) Int V, the r^-4 far-field law, and convexity of the
//! energy density.
//!
//! Modules mirror the moving parts: [`grid`] holds radial fields and
//! quadrature, [`potential`] the admissible interactions, [`transform`] the
//! sine-transform pair and spectral convolution, [`operators`] the Yukawa and
//! full resolvents plus the scattering problem, [`solver`] the iteration, and
//! [`analysis`] the curve/asymptotics/decay diagnostics.

pub mod analysis;
pub mod error;
pub mod grid;
pub mod io;
pub mod operators;
pub mod plot;
pub mod potential;
pub mod solver;
pub mod transform;

pub use error::{Result, SimpleqError};
pub use grid::{integrate_radial, l1_distance, pointwise_max_violation, RadialField, RadialGrid};
pub use potential::PotentialSpec;
pub use solver::{solve, IterationTrace, Solution, SolveParams, StopReason};
