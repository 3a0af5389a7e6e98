//! Hirota-Kimura discretization of the nonholonomic Suslov problem.
//!
//! The reduced Suslov system (a rigid body fixed at a point whose angular
//! velocity has zero projection on a body-fixed axis) is quadratic in the
//! angular velocity. Replacing every quadratic term by its symmetric bilinear
//! form in two consecutive states gives a map that is linear in the new state,
//! so each step is an explicit, single-valued birational map.
//!
//! Modules:
//!
//! * [`model3`]: the three-dimensional step map, its conserved quantity and the
//!   planar change of coordinates that decouples it.
//! * [`closedform`]: exact hyperbolic-function orbits of the 3D map.
//! * [`modeln`]: the n-dimensional generalization, one dense linear solve per step.
//! * [`reference`]: continuous-time vector fields, RK4/Euler integrators,
//!   double-double evaluation of the step and convergence-order estimation.
//! * [`cli`]: scenario configuration, figure presets and CSV/JSON export.

pub mod cli;
pub mod closedform;
mod error;
pub mod model3;
pub mod modeln;
pub mod reference;

pub use error::{Result, SuslovError};
