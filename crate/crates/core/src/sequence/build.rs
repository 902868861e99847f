use std::f64::consts::{FRAC_PI_2, PI};

use super::event::{DiffusionTiming, GradientRole, PulseSequence, SequenceEvent};
use crate::spin::{cnot_steps, Axis, Channel, DetectChannel, GateStep, SpinSystemSpec};
use crate::{Error, Result};

fn echo_block(events: &mut Vec<SequenceEvent>, timing: &DiffusionTiming, refocus: Channel) {
    let gap = 0.5 * (timing.big_delta - timing.little_delta);
    events.push(SequenceEvent::gradient(timing.g1, timing.little_delta, 1, GradientRole::Encode));
    events.push(SequenceEvent::Delay { duration: gap });
    events.push(SequenceEvent::pulse(refocus, Axis::Y, PI, "refocus"));
    events.push(SequenceEvent::Delay { duration: gap });
    events.push(SequenceEvent::gradient(timing.g1, timing.little_delta, 1, GradientRole::Encode));
}

fn push_cnot(events: &mut Vec<SequenceEvent>, spec: &SpinSystemSpec, prefix: &str) -> Result<()> {
    for step in cnot_steps(spec)? {
        events.push(match step {
            GateStep::Pulse { rotation, tag } => SequenceEvent::pulse(
                rotation.channel,
                rotation.axis,
                rotation.angle,
                format!("{prefix}.{tag}"),
            ),
            GateStep::Free { duration } => SequenceEvent::Delay { duration },
        });
    }
    Ok(())
}

/// π/2 – G₁ – π – G₁ – acquire on the targets (on the lone spin when the
/// system has no targets). The π pulse sits midway between the gradients.
pub fn build_hahn_echo(spec: &SpinSystemSpec, timing: &DiffusionTiming) -> Result<PulseSequence> {
    spec.validate()?;
    timing.validate()?;
    let (channel, detect) = if spec.n_total >= 2 {
        (Channel::TargetsOnly, DetectChannel::Targets)
    } else {
        (Channel::ControlOnly, DetectChannel::Control)
    };
    let mut events = vec![SequenceEvent::pulse(channel, Axis::Y, FRAC_PI_2, "excite")];
    echo_block(&mut events, timing, channel);
    events.push(SequenceEvent::Acquire { channel: detect });
    let seq = PulseSequence {
        name: "hahn_echo".into(),
        spec: spec.clone(),
        events,
    };
    seq.validate()?;
    Ok(seq)
}

/// Pseudo-Hadamard and CNOT prepare the NOON coherence, a gradient echo
/// encodes diffusion on it, and a second CNOT returns it to control
/// single-quantum coherence. G₂ sits just before the second CNOT and G₃
/// (opposite polarity) just after it; both last δ.
pub fn build_noon_diffusion(spec: &SpinSystemSpec, timing: &DiffusionTiming) -> Result<PulseSequence> {
    spec.validate()?;
    timing.validate()?;
    if spec.n_total < 2 {
        return Err(Error::InvalidSystem(
            "the NOON sequence needs at least one target spin".into(),
        ));
    }
    let mut events = vec![SequenceEvent::pulse(Channel::ControlOnly, Axis::Y, FRAC_PI_2, "pseudo_h")];
    push_cnot(&mut events, spec, "cnot1")?;
    echo_block(&mut events, timing, Channel::Both);
    events.push(SequenceEvent::gradient(timing.g2, timing.little_delta, 1, GradientRole::Select));
    push_cnot(&mut events, spec, "cnot2")?;
    events.push(SequenceEvent::gradient(timing.g3, timing.little_delta, -1, GradientRole::Select));
    events.push(SequenceEvent::Acquire {
        channel: DetectChannel::Control,
    });
    let seq = PulseSequence {
        name: "noon_diffusion".into(),
        spec: spec.clone(),
        events,
    };
    seq.validate()?;
    Ok(seq)
}
