//! Pulse sequences as event timelines and their execution.

mod build;
mod cycle;
mod event;
mod execute;
mod pathway;

pub use build::{build_hahn_echo, build_noon_diffusion};
pub use cycle::{apply_phase_cycle, cycle_variants, raw_signal, CycleStep, PhaseCycle};
pub use event::{DiffusionTiming, GradientRole, PulseSequence, SequenceEvent};
pub use execute::{
    encode_q_gamma, execute, execute_sweep, expand_pathways, selected_state, ExecutionResult, GradientInfo,
    PathwayExpansion, PathwayTerm,
};
pub use pathway::{pathway_survival, GradientArea, PathwayReport, PathwaySurvival, DEFAULT_SAMPLE_LENGTH};
