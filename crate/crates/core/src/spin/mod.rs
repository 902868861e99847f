//! Spin-system representation and the ideal-pulse gate set.

pub(crate) mod coherence;
mod collective;
pub(crate) mod gates;
mod nuclide;
mod spectrum;
mod state;
mod system;

pub use coherence::{coherence_orders, CoherenceDecomposition, CoherenceEntry};
pub use collective::{multiplet_multiplicity, target_multiplets};
pub use gates::{
    cnot_correction_angle, cnot_parallel, cnot_steps, collective_rotation, j_evolution,
    z_rotation_steps, Axis, Channel, GateStep, Rotation,
};
pub use nuclide::{Nuclide, NuclideTable};
pub use spectrum::{stick_spectrum, SpectrumLine};
pub use state::{
    make_pseudopure, thermal_state, Block, BlockKind, DetectChannel, Label, Polarization,
    StateOperator,
};
pub use system::{Representation, SpinSystemSpec, FULL_TENSOR_MAX_SPINS};
