//! Hazardous-waste location-routing toolkit.
//!
//! The crate builds a three-objective (cost, risk, emissions) location-routing
//! model for hazardous waste networks as a linear mixed-integer program, solves
//! scalarized versions of it with an embedded simplex / branch-and-bound
//! engine, and sweeps Pareto fronts with the augmented epsilon-constraint
//! method. A brute-force enumerator is included for cross-checking small
//! instances.
//!
//! The model IR and the solver are generic over [`Scalar`] (`f32` or `f64`);
//! the aliases below fix the scalar to `f64`, which is what the instance,
//! formulation and Pareto layers use.

pub mod formulation;
pub mod instance;
pub mod milp;
pub mod moo;
pub mod oracle;
pub mod scalar;
pub mod solver;

pub use scalar::Scalar;

pub type LinearModel = milp::LinearModel<f64>;
pub type LinExpr = milp::LinExpr<f64>;
pub type Assignment = milp::Assignment<f64>;
pub type SolveResult = solver::SolveResult<f64>;
