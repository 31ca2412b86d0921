//! Density topology, Kato cusp inversion, Hohenberg–Kohn bookkeeping for
//! one-electron systems, and spherical local-scaling maps.
//!
//! Atomic units throughout: bohr for lengths, hartree for energies.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod hk_audit;
pub mod kato;
pub mod lebedev;
pub mod local_scaling;
pub mod potential;
pub mod quadrature;
pub mod spherical;
pub mod topology;

pub use nalgebra;
