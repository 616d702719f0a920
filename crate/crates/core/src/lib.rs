//! Maxwell-Stefan multicomponent diffusion.
//!
//! * [`mixture`]: species, diffusivities, compositions and the zero-sum
//!   vector types for driving forces and fluxes.
//! * [`thermo`]: activity coefficients, the thermodynamic factor Γ and the
//!   Gibbs energy density.
//! * [`mskernel`]: assembly of the MS matrices, inversion of the flux-force
//!   relations and spectral certificates.
//! * [`solver`]: 1-D finite-volume reaction-diffusion with zero-flux walls.
//! * [`verify`]: entropy ledger, the binary filtration-equation oracle,
//!   ternary closed forms and detection of reverse/osmotic diffusion.

pub mod error;
pub mod linalg;
pub mod mixture;
pub mod mskernel;
pub mod solver;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
pub use mixture::{mole_fractions, validate_spec, Composition, DrivingForce, FluxSet, MixtureSpec, SpecViolation};
pub use mskernel::{
    assemble_a, assemble_a_sym, assemble_b, diffusion_operator_spectrum, fick_limit_d,
    solve_fluxes_bordered, solve_fluxes_invariant, solve_fluxes_reduced, spectrum, SpectrumReport,
};

pub use solver::{simulate, step, Checkpoint, Field, Grid1D, Reaction, ReactionNetwork, SimConfig, Simulator, Trajectory};
pub use thermo::{gamma_matrix, ThermoModel};
