//! Variational upper bounds on the quantum Fisher information of noisy optical
//! phase estimation.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`]: dense states and operators on truncated single- and two-mode
//!   Fock spaces.
//! * [`channels`]: phase shift, lossy thermal attenuation and phase diffusion
//!   acting on truncated density matrices.
//! * [`oracle`]: brute-force quantum Fisher information, measurement Fisher
//!   information and a simplex minimiser for raw variational expressions.
//! * [`bounds`]: closed-form variational bounds and the exact squeezed-vacuum
//!   results they are compared against.
//! * [`numerics`]: adaptive quadrature, bracketed scalar maximisation and
//!   log-log slope fitting.
//! * [`waveform`]: spectral bounds on the mean-square error of tracking a
//!   stochastically fluctuating phase with a squeezed OPO beam.

pub mod bounds;
pub mod channels;
pub mod error;
pub mod fock;
pub mod numerics;
pub mod oracle;
pub mod waveform;

pub use error::{Error, Result};
pub use fock::{CMatrix, DensityMatrix, FockVector, InputMoments};
pub use num_complex::Complex64;
