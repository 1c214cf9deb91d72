//! Numerical toolkit for the spectra of lambda-parameterized linear ODE
//! systems on truncated intervals.
//!
//! The library traces absolute and asymptotic essential spectra as zero loci
//! of eigenvalue gap functions, propagates boundary subspaces and their
//! Pluecker-coordinate images across the interval, and counts boundary-value
//! eigenvalues in parameter disks through the winding of Evans-type
//! determinants. Growing the interval length exhibits the accumulation of
//! eigenvalues on those loci, for both separated and periodic boundary
//! conditions.
//!
//! Entry points:
//! - [`problems::builtin`] for the catalog of example problems,
//! - [`spectra::trace_locus`] for locus tracing,
//! - [`counting::winding_count`] and [`counting::accumulation_experiment`]
//!   for eigenvalue counts under separated boundary conditions,
//! - [`periodic::periodic_count`] and [`periodic::extrapolated_set_probe`]
//!   for periodic boundary conditions,
//! - [`cli::run`] behind the `absspec` binary.

pub mod cli;
pub mod config;
pub mod counting;
pub mod error;
pub mod expr;
pub mod exterior;
pub mod flow;
pub mod linalg;
pub mod manifest;
pub mod par;
pub mod periodic;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod selftest;
pub mod spectra;

pub use config::Tolerances;
pub use error::{Error, Result};
