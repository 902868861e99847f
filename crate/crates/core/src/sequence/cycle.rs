use serde::{Deserialize, Serialize};

use super::event::{PulseSequence, SequenceEvent};
use super::execute::{expand_pathways, PathwayExpansion};
use crate::diffusion::DiffusionModel;
use crate::spin::StateOperator;
use crate::{Error, Result, C64};

/// One step of a phase cycle: pulse phase advance and receiver sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleStep {
    pub quarter_turns: u8,
    pub receiver: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCycle {
    pub pulse_tag: String,
    pub steps: Vec<CycleStep>,
}

impl PhaseCycle {
    /// X̄_M of the first CNOT at 0 and π with the receiver held. The NOON
    /// pathway passes that pulse without changing the target coherence
    /// order, so it adds; pathways with odd target order change there
    /// cancel.
    pub fn noon_default() -> Self {
        Self {
            pulse_tag: "cnot1.xbar_m".into(),
            steps: vec![
                CycleStep {
                    quarter_turns: 0,
                    receiver: 1.0,
                },
                CycleStep {
                    quarter_turns: 2,
                    receiver: 1.0,
                },
            ],
        }
    }
}

/// Sequence variants of every cycle step.
pub fn cycle_variants(seq: &PulseSequence, cycle: &PhaseCycle) -> Result<Vec<(PulseSequence, f64)>> {
    if seq.find_pulses(&cycle.pulse_tag).is_empty() {
        return Err(Error::PulseNotFound(cycle.pulse_tag.clone()));
    }
    Ok(cycle
        .steps
        .iter()
        .map(|step| {
            let mut s = seq.clone();
            for e in &mut s.events {
                if let SequenceEvent::Pulse { axis, tag, .. } = e {
                    if *tag == cycle.pulse_tag {
                        *axis = axis.shifted(step.quarter_turns);
                    }
                }
            }
            (s, step.receiver)
        })
        .collect())
}

/// Mean of the receiver-signed raw signals over the cycle. The result is
/// not normalised, so artifacts can be compared across schemes.
pub fn apply_phase_cycle(
    seq: &PulseSequence,
    rho0: &StateOperator,
    model: &DiffusionModel,
    cycle: &PhaseCycle,
) -> Result<C64> {
    let variants = cycle_variants(seq, cycle)?;
    let mut acc = C64::new(0.0, 0.0);
    for (s, sign) in &variants {
        let exp = expand_pathways(s, rho0)?;
        acc += raw_signal(&exp, model)? * *sign;
    }
    Ok(acc / variants.len() as f64)
}

/// Un-normalised signal of an expansion with its stored gradient strengths.
pub fn raw_signal(exp: &PathwayExpansion, model: &DiffusionModel) -> Result<C64> {
    let prepared = model.prepare(&exp.slots(), 0)?;
    let n: usize = prepared.block_counts().iter().sum();
    Ok(exp.block_signal(&prepared, None).iter().sum::<C64>() / n as f64)
}
