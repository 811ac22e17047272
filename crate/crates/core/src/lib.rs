//! Simulation toolkit for adaptive fuzzy excitation control of a synchronous
//! generator tied to a power system through a line with a local consumer.
//!
//! The crate is organised bottom-up:
//!
//! * [`machine`] and [`network`] hold the nonlinear machine model (sixth and
//!   fourth order) and the algebraic stator/network solve.
//! * [`equilibrium`] finds steady operating points by damped Newton.
//! * [`fuzzy`] is the PI fuzzy controller with integration on its output,
//!   [`tuner`] the two-position relay that retunes the singleton scale `c`.
//! * [`linearize`] produces the small-signal model and its discrete
//!   fourth-order transfer function.
//! * [`sim`] runs closed-loop scenarios and computes performance metrics.
//! * [`config`], [`csv`] and [`cli`] form the command-line front end.

pub mod cli;
pub mod config;
pub mod csv;
pub mod equilibrium;
mod error;
pub mod fuzzy;
pub mod integrate;
pub mod linearize;
pub mod machine;
pub mod network;
pub mod sim;
pub mod tuner;

pub use error::{ModelError, ValidationError};
pub use machine::{
    GeneratorParams, GeneratorState, MechanicalInput, ModelKind, PlantState, ReducedState,
};
pub use network::{AlgebraicOutputs, ComplexAdmittance, LineParams, NetworkAdmittance};
