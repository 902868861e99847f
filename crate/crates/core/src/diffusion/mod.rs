//! Translational diffusion: Brownian walkers, gradient phase accumulation
//! and the closed-form Stejskal-Tanner law.

mod analytic;
mod mc;
mod model;
mod rng;
pub(crate) mod stats;
mod walkers;

pub use analytic::{b_value, narrow_pulse, stejskal_tanner};
pub use mc::{attenuation_curve, echo_attenuation_mc, linear_sweep, CurveMode, McEstimate};
pub(crate) use model::sinc;
pub use model::{DiffusionModel, GradientSlot, PreparedDiffusion, SampleProfile};
pub use rng::Substream;
pub use walkers::{
    accumulate_phase, brownian_evolve, DiffusionParams, GradientSegment, GradientWaveform,
    WalkerEnsemble,
};
