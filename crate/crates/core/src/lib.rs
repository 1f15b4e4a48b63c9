//! Simulator for the quantum information distributor (QID): a fixed circuit of
//! four conditional shifts whose behaviour is programmed by the initial state of
//! two ancilla registers.
//!
//! - [`qudit`]: finite-dimensional states, shift operators, partial traces.
//! - [`network`]: the QID circuit, program states, cloning and covariance checks.
//! - [`cv`]: the continuous-variable limit, with Gaussian states, integral kernels,
//!   Wigner-function grids and the coherent-state cloner.

pub mod cv;
pub mod error;
pub mod format;
pub mod network;
pub mod qudit;
pub mod random;

pub use error::{QidError, Result};
pub use qudit::{Dim, DensityOperator, Operator, PartialTrace, PureState, C64};
