//! Sequence execution by coherence-pathway expansion.
//!
//! The density matrix is carried as a set of components, one per history of
//! (Δa, Δm) flip differences seen at each gradient. Pulses and J evolution
//! act on every component; a gradient splits each component by the flip
//! difference of its elements. Because the quantum propagation does not
//! depend on gradient strengths, one expansion serves a whole sweep.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::event::{GradientRole, PulseSequence, SequenceEvent};
use crate::diffusion::stats::{bootstrap_sd, BOOTSTRAP_RESAMPLES};
use crate::diffusion::{DiffusionModel, GradientSlot, PreparedDiffusion, Substream};
use crate::spin::coherence::{flip_delta, q_gamma};
use crate::spin::gates::apply_step;
use crate::spin::{DetectChannel, GateStep, Rotation, SpinSystemSpec, StateOperator};
use crate::{Error, Result, C64};

/// Components whose Frobenius norm falls below this fraction of the input
/// deviation are dropped.
const PRUNE: f64 = 1e-14;

/// A gradient event as seen by the executor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientInfo {
    pub slot: GradientSlot,
    pub amplitude: f64,
    pub polarity: i8,
    pub role: GradientRole,
}

/// One coherence pathway and its detected amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathwayTerm {
    /// (Δa, Δm) during each gradient, bra minus ket flip counts.
    pub deltas: Vec<(i32, i32)>,
    /// Gradient-weighted order during each gradient, rad s^-1 T^-1.
    pub q_gamma: Vec<f64>,
    /// Tr(ρ_pathway · I+) with every gradient off.
    pub amplitude: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathwayExpansion {
    pub spec: SpinSystemSpec,
    pub channel: DetectChannel,
    pub gradients: Vec<GradientInfo>,
    pub terms: Vec<PathwayTerm>,
}

/// Normalised signal of one execution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    /// Signal divided by the reference with encode gradients off.
    pub signal: C64,
    pub raw: C64,
    pub reference: C64,
    /// Block-bootstrap standard error of |signal| (Monte Carlo only).
    pub stderr: Option<f64>,
}

fn add_into(dst: &mut StateOperator, src: &StateOperator) {
    for (d, s) in dst.blocks_mut().iter_mut().zip(src.blocks()) {
        d.matrix += &s.matrix;
    }
}

fn split(state: &StateOperator) -> BTreeMap<(i32, i32), StateOperator> {
    let mut parts: BTreeMap<(i32, i32), StateOperator> = BTreeMap::new();
    for (bi, block) in state.blocks().iter().enumerate() {
        let dim = block.dim();
        for r in 0..dim {
            for c in 0..dim {
                let v = block.matrix[(r, c)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let key = flip_delta(&block.labels[r], &block.labels[c]);
                let part = parts
                    .entry(key)
                    .or_insert_with(|| StateOperator::zeros(state.spec()));
                part.blocks_mut()[bi].matrix[(r, c)] = v;
            }
        }
    }
    parts
}

type Components = Vec<(Vec<(i32, i32)>, StateOperator)>;

fn propagate(seq: &PulseSequence, rho0: &StateOperator) -> Result<(Vec<GradientInfo>, Components, DetectChannel)> {
    seq.validate()?;
    if rho0.spec() != &seq.spec {
        return Err(Error::BasisMismatch);
    }
    let dev = rho0.deviation();
    let cutoff = PRUNE * dev.frobenius_sq().sqrt();
    let mut comps: Components = vec![(Vec::new(), dev)];
    let mut gradients = Vec::new();
    let mut channel = DetectChannel::Control;
    let mut t = 0.0;

    for event in &seq.events {
        match event {
            SequenceEvent::Pulse {
                channel: ch,
                axis,
                angle,
                ..
            } => {
                let step = GateStep::Pulse {
                    rotation: Rotation::new(*ch, *axis, *angle),
                    tag: "",
                };
                comps.par_iter_mut().for_each(|(_, s)| apply_step(s, &step));
            }
            SequenceEvent::Delay { duration } => {
                let step = GateStep::Free {
                    duration: *duration,
                };
                comps.par_iter_mut().for_each(|(_, s)| apply_step(s, &step));
                t += duration;
            }
            SequenceEvent::Gradient {
                amplitude,
                duration,
                shape_factor,
                polarity,
                role,
            } => {
                let step = GateStep::Free {
                    duration: *duration,
                };
                let eff = duration * shape_factor;
                gradients.push(GradientInfo {
                    slot: GradientSlot {
                        start: t + 0.5 * (duration - eff),
                        duration: eff,
                    },
                    amplitude: *amplitude,
                    polarity: *polarity,
                    role: *role,
                });
                t += duration;
                let pieces: Vec<Vec<(Vec<(i32, i32)>, StateOperator)>> = comps
                    .par_iter_mut()
                    .map(|(hist, s)| {
                        apply_step(s, &step);
                        split(s)
                            .into_iter()
                            .filter(|(_, p)| p.frobenius_sq().sqrt() > cutoff)
                            .map(|(key, p)| {
                                let mut h = hist.clone();
                                h.push(key);
                                (h, p)
                            })
                            .collect()
                    })
                    .collect();
                let mut merged: BTreeMap<Vec<(i32, i32)>, StateOperator> = BTreeMap::new();
                for (h, p) in pieces.into_iter().flatten() {
                    match merged.get_mut(&h) {
                        Some(acc) => add_into(acc, &p),
                        None => {
                            merged.insert(h, p);
                        }
                    }
                }
                comps = merged.into_iter().collect();
            }
            SequenceEvent::Acquire { channel: ch } => channel = *ch,
        }
    }
    Ok((gradients, comps, channel))
}

/// Propagates `rho0` through the sequence and records every pathway that
/// reaches the receiver.
pub fn expand_pathways(seq: &PulseSequence, rho0: &StateOperator) -> Result<PathwayExpansion> {
    let spec = &seq.spec;
    let (gradients, comps, channel) = propagate(seq, rho0)?;
    let terms = comps
        .par_iter()
        .filter_map(|(hist, s)| {
            let amplitude = s.detect(channel);
            (amplitude.norm() > 0.0).then(|| PathwayTerm {
                q_gamma: hist.iter().map(|&d| q_gamma(spec, d)).collect(),
                deltas: hist.clone(),
                amplitude,
            })
        })
        .collect();
    Ok(PathwayExpansion {
        spec: spec.clone(),
        channel,
        gradients,
        terms,
    })
}

impl PathwayExpansion {
    pub fn slots(&self) -> Vec<GradientSlot> {
        self.gradients.iter().map(|g| g.slot).collect()
    }

    /// Signed gradient strengths, with encode gradients replaced by
    /// `encode` when given.
    pub fn amplitudes(&self, encode: Option<f64>) -> Vec<f64> {
        self.gradients
            .iter()
            .map(|g| {
                let a = match (g.role, encode) {
                    (GradientRole::Encode, Some(e)) => e,
                    _ => g.amplitude,
                };
                a * g.polarity as f64
            })
            .collect()
    }

    /// Per-term phase weights q_e·G_e.
    pub fn weights(&self, term: &PathwayTerm, amplitudes: &[f64]) -> Vec<f64> {
        term.q_gamma.iter().zip(amplitudes).map(|(q, g)| q * g).collect()
    }

    /// Per-block detected signal sums for the given gradient strengths.
    pub fn block_signal(&self, prepared: &PreparedDiffusion, encode: Option<f64>) -> Vec<C64> {
        let amps = self.amplitudes(encode);
        let mut out = vec![C64::new(0.0, 0.0); prepared.n_blocks()];
        for term in &self.terms {
            let w = self.weights(term, &amps);
            for (o, p) in out.iter_mut().zip(prepared.block_phasors(&w)) {
                *o += term.amplitude * p;
            }
        }
        out
    }

    /// Signal normalised to the same sequence with encode gradients off.
    /// `point` selects the Monte Carlo substream.
    pub fn evaluate(&self, model: &DiffusionModel, encode: Option<f64>, point: u64) -> Result<ExecutionResult> {
        let prepared = model.prepare(&self.slots(), point)?;
        let counts = prepared.block_counts();
        let n: f64 = counts.iter().sum::<usize>() as f64;
        let sig = self.block_signal(&prepared, encode);
        let refb = self.block_signal(&prepared, Some(0.0));
        let raw = sig.iter().sum::<C64>() / n;
        let reference = refb.iter().sum::<C64>() / n;
        let scale = self.terms.iter().map(|t| t.amplitude.norm()).sum::<f64>();
        if !(reference.norm() > 1e-12 * scale) || scale == 0.0 {
            return Err(Error::Domain(
                "the sequence produces no reference signal on this channel".into(),
            ));
        }
        let stderr = match model {
            DiffusionModel::MonteCarlo { params, .. } => {
                let mut rng = Substream::new(params.seed, point).auxiliary(1);
                Some(bootstrap_sd(sig.len(), BOOTSTRAP_RESAMPLES, &mut rng, |idx| {
                    let s: C64 = idx.iter().map(|&i| sig[i]).sum();
                    let r: C64 = idx.iter().map(|&i| refb[i]).sum();
                    (s / r).norm()
                }))
            }
            DiffusionModel::Analytic { .. } => None,
        };
        Ok(ExecutionResult {
            signal: raw / reference,
            raw,
            reference,
            stderr,
        })
    }
}

/// Deviation at acquisition after ensemble averaging: every pathway
/// component weighted by its diffusion phasor.
pub fn selected_state(seq: &PulseSequence, rho0: &StateOperator, model: &DiffusionModel) -> Result<StateOperator> {
    let (gradients, comps, _) = propagate(seq, rho0)?;
    let slots: Vec<GradientSlot> = gradients.iter().map(|g| g.slot).collect();
    let prepared = model.prepare(&slots, 0)?;
    let amps: Vec<f64> = gradients.iter().map(|g| g.amplitude * g.polarity as f64).collect();
    let mut out = StateOperator::zeros(&seq.spec);
    for (hist, state) in &comps {
        let w: Vec<f64> = hist
            .iter()
            .zip(&amps)
            .map(|(&d, a)| q_gamma(&seq.spec, d) * a)
            .collect();
        let f = prepared.phasor(&w);
        if f.norm() == 0.0 {
            continue;
        }
        for (o, b) in out.blocks_mut().iter_mut().zip(state.blocks()) {
            o.matrix += &b.matrix * f;
        }
    }
    Ok(out)
}

/// Runs the sequence with its own gradient strengths.
pub fn execute(seq: &PulseSequence, rho0: &StateOperator, model: &DiffusionModel) -> Result<ExecutionResult> {
    expand_pathways(seq, rho0)?.evaluate(model, None, 0)
}

/// Runs the sequence at each encode strength in `g_list`; Monte Carlo
/// points use the substream of their index.
pub fn execute_sweep(
    seq: &PulseSequence,
    rho0: &StateOperator,
    model: &DiffusionModel,
    g_list: &[f64],
) -> Result<Vec<ExecutionResult>> {
    let exp = expand_pathways(seq, rho0)?;
    g_list
        .iter()
        .enumerate()
        .map(|(i, &g)| exp.evaluate(model, Some(g), i as u64))
        .collect()
}

/// The gradient-weighted order that the encode gradients act on: γ_eff for
/// the NOON sequence, the detected nucleus' γ for the Hahn echo.
pub fn encode_q_gamma(seq: &PulseSequence) -> f64 {
    if seq.name == "noon_diffusion" {
        seq.spec.gamma_eff()
    } else {
        match seq.acquire_channel() {
            Some(DetectChannel::Targets) => seq.spec.target.gamma,
            _ => seq.spec.control.gamma,
        }
    }
}
