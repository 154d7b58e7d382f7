//! Numerical machinery for constants of motion of Lagrangian ODE systems.
//!
//! The crate integrates Euler–Lagrange trajectories with dense output, attaches
//! one-parameter symmetry families (space changes, time changes in both styles,
//! gauge terms) to them, builds the induced conserved quantities — local point
//! functions as well as nonlocal integral expressions — and verifies
//! conservation by measuring drift along the trajectory.
//!
//! Start from the [`catalog`], which ships ready-made systems (oscillators,
//! dissipative motion, Lane–Emden, homogeneous potentials, exponential
//! lattices, Kepler, a superintegrable two-degree family, plane-wave forcing)
//! together with their symmetry triples and expected constants. The runnable
//! examples under `examples/` walk through each capability; the `noether`
//! binary drives the whole catalog and writes machine-readable reports.

pub mod catalog;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod ode;
pub mod quadrature;
pub mod suite;
pub mod systems;
pub mod variation;

pub use constants::{
    alt_full_constant, alternative_to_standard, bh_constant, drift, full_constant,
    nonlocal_constant, simple_constant, single_motion_constant, standard_to_alternative,
    trivialize_bh, trivialize_time, BhTrivialization, ConservedQuantity, ConstantKind,
    ConversionForm, DriftReport, Provenance,
};
pub use dynamics::{integrate, InitialValueProblem, LagrangianSystem, StepControl, Trajectory};
pub use error::{Error, Result};
pub use variation::{
    alt_invariance_residual, check_grid, d_eps_lagrangian, d_eps_space, invariance_residual,
    total_derivative_check, BHFunction, SpaceChange, SpaceForm, SymmetryTriple, TimeChange,
    TimeStyle,
};
