//! Resonance energies and inverse lifetimes from real basis-set expansions.
//!
//! The library locates resonant (Siegert) states of a radial Schrödinger
//! problem with a finite-support potential using only real, square-integrable
//! variational calculations: a Laguerre basis, a barrier-height sweep of the
//! dense symmetric eigenproblem, double-orthogonality localization of the
//! resonance energy, and closed-form width extraction from the boundary
//! probability density. An independent exact solver for piecewise-constant
//! potentials (complex root finding on the outgoing-wave matching condition)
//! serves as the oracle everything is validated against.
//!
//! Atomic units throughout: lengths in Bohr, energies in Hartree.

pub mod basis;
pub mod bessel;
pub mod config;
pub mod exact;
pub mod laguerre;
pub mod linalg;
pub mod pipeline;
pub mod potentials;
pub mod quadrature;
pub mod report;
pub mod stabilization;
pub mod width;

pub use potentials::{well_barrier, PotentialSpec, WellBarrierParams, WellBarrierTemplate};
