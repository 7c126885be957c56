//! Spectroscopy workbench for a coherently driven quantum dot coupled to a
//! photonic-crystal cavity.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the physical parameter types and unit conversions.
//! * [`hilbert`] builds the truncated two-level ⊗ Fock operators.
//! * [`analytic`] evaluates the closed-form polariton and linewidth formulas.
//! * [`lindblad`] assembles the rotating-frame Liouvillian and solves it.
//! * [`scan`] emulates laser-wavelength scans and power sweeps.
//! * [`fit`] extracts linewidths, saturation and broadening parameters.
//! * [`cli`] is the `cqed-scope` command-line front end.
//!
//! Internally every rate and frequency is an angular frequency in rad/ns.
//! Configuration files and CSV output use ordinary frequency in GHz
//! (angular value divided by 2π) and wavelengths in nm.

pub mod analytic;
pub mod cli;
mod error;
pub mod fit;
pub mod hilbert;
pub mod lindblad;
pub mod model;
pub mod scan;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
