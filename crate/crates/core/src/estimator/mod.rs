//! Fitting the Stejskal-Tanner law, Stokes-Einstein estimates and the
//! gradient/timing trade-offs of more sensitive coherences.

mod curve;
mod fit;
mod goodness;
mod scaling;
mod stokes;
mod trials;

pub use curve::{AttenuationCurve, CurvePoint};
pub use fit::{fit_diffusion, FitMethod, FitOptions, FitResult};
pub use goodness::{goodness_report, GoodnessReport};
pub use scaling::{equivalent_parameters, EchoParameters, EquivalentParameters, ScaledVariant};
pub use stokes::{stokes_einstein, StokesEinsteinInput, BOLTZMANN};
pub use trials::{noise_coverage, CoverageReport, NoiseTrialConfig};
