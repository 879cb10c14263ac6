//! Simulation of anisotropy-induced geometric phases for a two-level ion in
//! a two-dimensional Paul trap.
//!
//! The crate is layered bottom-up:
//!
//! * [`numerics`]: dense complex linear algebra
//! * [`fockspace`]: truncated two-mode ⊗ spin space, ladder operators,
//!   bimodal Fock states and the conserved charge
//! * [`trap`]: Paul-trap and laser parameters, validity predicates
//! * [`hamiltonian`]: `H_φ`, `H(t)`, the rotating-frame generator, spectra
//! * [`berry`]: closed-form, connection-integral and Wilson-loop phases
//! * [`propagator`]: exact, stepped and adiabatic evolution over a cycle
//! * [`experiment`]: the sign-flip protocol comparing anisotropic and
//!   isotropic traps

pub mod berry;
pub mod error;
pub mod experiment;
pub mod fockspace;
pub mod hamiltonian;
pub mod numerics;
pub mod propagator;
pub mod trap;

pub use error::{Error, ErrorClass, Result};
