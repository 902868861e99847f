use serde::{Deserialize, Serialize};

use crate::spin::{Axis, Channel, DetectChannel, Rotation, SpinSystemSpec};
use crate::{Error, Result};

/// Whether a gradient encodes diffusion (swept) or selects a coherence
/// pathway (held fixed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientRole {
    Encode,
    Select,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SequenceEvent {
    /// Instantaneous hard pulse; `tag` names it for phase cycling.
    Pulse {
        channel: Channel,
        axis: Axis,
        angle: f64,
        #[serde(default)]
        tag: String,
    },
    Delay {
        duration: f64,
    },
    /// Rectangular gradient of `duration`, on for duration·shape_factor
    /// centred in the window. J evolution continues throughout.
    Gradient {
        amplitude: f64,
        duration: f64,
        shape_factor: f64,
        polarity: i8,
        role: GradientRole,
    },
    Acquire {
        channel: DetectChannel,
    },
}

impl SequenceEvent {
    pub fn pulse(channel: Channel, axis: Axis, angle: f64, tag: impl Into<String>) -> Self {
        SequenceEvent::Pulse {
            channel,
            axis,
            angle,
            tag: tag.into(),
        }
    }

    pub fn gradient(amplitude: f64, duration: f64, polarity: i8, role: GradientRole) -> Self {
        SequenceEvent::Gradient {
            amplitude,
            duration,
            shape_factor: 1.0,
            polarity,
            role,
        }
    }

    pub fn duration(&self) -> f64 {
        match *self {
            SequenceEvent::Delay { duration } | SequenceEvent::Gradient { duration, .. } => duration,
            _ => 0.0,
        }
    }

    pub fn rotation(&self) -> Option<Rotation> {
        match *self {
            SequenceEvent::Pulse {
                channel,
                axis,
                angle,
                ..
            } => Some(Rotation::new(channel, axis, angle)),
            _ => None,
        }
    }
}

/// Delays and gradient strengths of the diffusion sequences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionTiming {
    /// Onset-to-onset separation of the two encode gradients, s.
    #[serde(rename = "big_delta_s")]
    pub big_delta: f64,
    /// Effective gradient duration, s.
    #[serde(rename = "little_delta_s")]
    pub little_delta: f64,
    #[serde(rename = "g1_T_per_m")]
    pub g1: f64,
    #[serde(rename = "g2_T_per_m", default)]
    pub g2: f64,
    #[serde(rename = "g3_T_per_m", default)]
    pub g3: f64,
}

impl DiffusionTiming {
    pub fn new(big_delta: f64, little_delta: f64, g1: f64) -> Self {
        Self {
            big_delta,
            little_delta,
            g1,
            g2: 0.0,
            g3: 0.0,
        }
    }

    /// Sets G₂ and the G₃ that refocuses the NOON pathway onto the control.
    pub fn with_selection(mut self, spec: &SpinSystemSpec, g2: f64) -> Self {
        self.g2 = g2;
        self.g3 = g2 * spec.selection_ratio();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.big_delta, self.little_delta, self.g1, self.g2, self.g3]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidTiming("timing values must be finite".into()));
        }
        if !(self.little_delta > 0.0) {
            return Err(Error::InvalidTiming(format!(
                "δ must be positive, got {}",
                self.little_delta
            )));
        }
        if self.big_delta < self.little_delta {
            return Err(Error::InvalidTiming(format!(
                "Δ = {} s is shorter than δ = {} s",
                self.big_delta, self.little_delta
            )));
        }
        if self.g1 < 0.0 || self.g2 < 0.0 || self.g3 < 0.0 {
            return Err(Error::InvalidTiming(
                "gradient strengths must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// A timeline of pulses, delays and gradients ending in one acquisition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub name: String,
    pub spec: SpinSystemSpec,
    pub events: Vec<SequenceEvent>,
}

impl PulseSequence {
    pub fn validate(&self) -> Result<()> {
        let acquires = self
            .events
            .iter()
            .filter(|e| matches!(e, SequenceEvent::Acquire { .. }))
            .count();
        if acquires != 1 || !matches!(self.events.last(), Some(SequenceEvent::Acquire { .. })) {
            return Err(Error::InvalidTiming(
                "a sequence needs exactly one acquisition, as its last event".into(),
            ));
        }
        for e in &self.events {
            match *e {
                SequenceEvent::Delay { duration } if !(duration >= 0.0) || !duration.is_finite() => {
                    return Err(Error::InvalidTiming(format!("invalid delay {duration}")));
                }
                SequenceEvent::Gradient {
                    amplitude,
                    duration,
                    shape_factor,
                    polarity,
                    ..
                } => {
                    if !(duration > 0.0) || !duration.is_finite() || !amplitude.is_finite() {
                        return Err(Error::InvalidTiming(format!(
                            "invalid gradient ({amplitude} T/m for {duration} s)"
                        )));
                    }
                    if !(shape_factor > 0.0 && shape_factor <= 1.0) {
                        return Err(Error::InvalidTiming(format!(
                            "shape factor must lie in (0, 1], got {shape_factor}"
                        )));
                    }
                    if polarity != 1 && polarity != -1 {
                        return Err(Error::InvalidTiming(format!(
                            "polarity must be ±1, got {polarity}"
                        )));
                    }
                }
                SequenceEvent::Pulse { angle, .. } if !angle.is_finite() => {
                    return Err(Error::InvalidTiming(format!("invalid pulse angle {angle}")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.events.iter().map(SequenceEvent::duration).sum()
    }

    pub fn acquire_channel(&self) -> Option<DetectChannel> {
        self.events.iter().find_map(|e| match e {
            SequenceEvent::Acquire { channel } => Some(*channel),
            _ => None,
        })
    }

    pub fn gradient_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, SequenceEvent::Gradient { .. }))
            .count()
    }

    /// Copy with every encode gradient set to `g`.
    pub fn with_encode_amplitude(&self, g: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.events {
            if let SequenceEvent::Gradient {
                amplitude,
                role: GradientRole::Encode,
                ..
            } = e
            {
                *amplitude = g;
            }
        }
        out
    }

    /// Indices of the pulses carrying `tag`.
    pub fn find_pulses(&self, tag: &str) -> Vec<usize> {
        self.events
            .iter()
            .enumerate()
            .filter_map(|(i, e)| match e {
                SequenceEvent::Pulse { tag: t, .. } if t == tag => Some(i),
                _ => None,
            })
            .collect()
    }

    /// Copy with the flip angle of every pulse whose tag starts with
    /// `prefix` scaled by (1 + fraction).
    pub fn with_flip_error(&self, prefix: &str, fraction: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.events {
            if let SequenceEvent::Pulse { angle, tag, .. } = e {
                if tag.starts_with(prefix) {
                    *angle *= 1.0 + fraction;
                }
            }
        }
        out
    }
}
