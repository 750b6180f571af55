//! IMEX relaxation finite-volume solver for the non-dimensional compressible
//! Euler equations, accurate and stable uniformly in the Mach number.
//!
//! The pressure is split into a slow part, treated explicitly through an
//! approximate Riemann solver, and a fast acoustic part obtained from one
//! linear elliptic solve per stage. First order uses a forward Euler step,
//! second order adds MUSCL reconstruction and a two-stage Runge-Kutta
//! combination.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod config;
pub mod diagnostics;
pub mod eos;
pub mod error;
pub mod explicit;
pub mod grid;
pub mod implicit;
pub mod integrator;
pub mod io;
pub mod linalg;
pub mod reconstruction;
pub mod riemann;
pub mod state;

pub use cases::{CaseKind, CaseSpec, ReferenceScaling, RiemannData};
pub use config::{OutputFormat, Order, RunConfig};
pub use eos::IdealGasEos;
pub use error::{Result, SolverError};
pub use grid::{Boundary, Grid};
pub use integrator::{RunReport, Simulation};
pub use state::{ConservedField, PrimitiveState, RelaxationField};
