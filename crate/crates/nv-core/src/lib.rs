//! Spin dynamics of a single NV⁻ center coupled to a first-shell ¹³C nuclear
//! spin and the host ¹⁴N, in a weak static magnetic field.
//!
//! The electron spin (S = 1), the ¹³C (I = 1/2) and the ¹⁴N (I = 1) span an
//! 18-dimensional product space. This crate builds the full static and drive
//! Hamiltonians on that space and layers the analysis pipelines on top:
//!
//! * [`levels`] — eigen-decomposition, continuity tracking of levels across
//!   field sweeps, and location of level anti-crossings (LACs);
//! * [`transitions`] — transition frequencies, dipole amplitudes
//!   |⟨i|S_α|j⟩|, X/Y/Z selection-rule labels, and ZEFOZ gradients;
//! * [`dynamics`] — lab-frame Ramsey/FID simulation without the rotating-wave
//!   approximation, spectrum synthesis, line extraction, damped-cosine fits;
//! * [`noise`] — quasi-static field noise, inhomogeneous linewidths, T₂*;
//! * [`magnetometry`] — inversion of line amplitudes and Rabi frequencies
//!   into the microwave field vector (η, ζ, B_mw, B_rf).
//!
//! Units throughout: MHz for energies and frequencies (h = 1), Gauss for
//! fields, radians for angles, microseconds for time.

pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod levels;
pub mod magnetometry;
pub mod noise;
pub mod operators;
pub mod params;
pub mod point;
pub mod states;
pub mod transitions;

pub use error::{Error, Result};
pub use params::{DriveField, FieldVector, SpinSystemParams};

use nalgebra::{DMatrix, DVector};

/// Complex scalar used for all quantum-mechanical amplitudes.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix (operators, Hamiltonians, propagators).
pub type CMat = DMatrix<C64>;
/// Dense complex vector (state vectors).
pub type CVec = DVector<C64>;

/// Dimension of the electron ⊗ ¹³C ⊗ ¹⁴N product space.
pub const DIM: usize = 18;
