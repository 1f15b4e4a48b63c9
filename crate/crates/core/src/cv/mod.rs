//! Continuous-variable limit of the distributor.
//!
//! Conventions throughout: `ħ = 1`, vacuum quadrature variance 1/2, position
//! kets normalized as `<x|y> = √2π δ(x - y)`, and Wigner functions normalized
//! against the phase-space measure `dx dp / 2π`.

pub mod gaussian;
pub mod kernel;
pub mod quad;
pub mod wavefunction;
pub mod wigner;

pub use gaussian::{
    coherent_cloner, gaussian_fidelity, qid_symplectic, regularized_epr, regularized_p0, regularized_x0,
    symplectic_form, thermal_reduction, CoherentClonerOutput, GaussianState, SqueezingParam,
};
pub use kernel::{cv_norm_constraint, cv_solve_beta, kernel_eval, kernel_wigner, Kernel, KernelTriple};
pub use wigner::{cv_fidelity, output_wigner, GridSpec, WignerGrid};
