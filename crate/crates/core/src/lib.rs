//! Simulation of pulsed-field-gradient diffusion experiments on AM_{N-1}
//! heteronuclear spin systems, with the NOON-state circuit and the
//! single-quantum Hahn echo, plus Stejskal-Tanner estimation of the
//! translational diffusion constant.
//!
//! The crate is organised bottom-up:
//!
//! - [`spin`]: density operators, ideal pulses, J evolution, the parallel
//!   CNOT, coherence-order bookkeeping and stick spectra.
//! - [`diffusion`]: Brownian walker ensembles, gradient phase accumulation
//!   and the closed-form attenuation law.
//! - [`sequence`]: the two pulse sequences as event timelines and a
//!   coherence-pathway executor that couples them to a diffusion model.
//! - [`estimator`]: curve fitting, Stokes-Einstein and parameter scaling.
//! - [`cli`]: experiment descriptors and the `noondiff` command set.

pub mod cli;
pub mod diffusion;
pub mod error;
pub mod estimator;
pub mod sequence;
pub mod spin;

pub use error::{Error, Result};

/// Complex scalar used for all density-matrix arithmetic.
pub type C64 = num_complex::Complex64;
