use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analytic::stejskal_tanner;
use super::rng::Substream;
use super::stats::{block_ranges, bootstrap_sd, BlockSums, BOOTSTRAP_RESAMPLES, DEFAULT_BLOCKS};
use super::walkers::{
    accumulate_phase, brownian_evolve, DiffusionParams, GradientSegment, GradientWaveform,
    WalkerEnsemble,
};
use crate::estimator::{AttenuationCurve, CurvePoint};
use crate::sequence::DiffusionTiming;
use crate::{Result, C64};

/// Walker-averaged attenuation with its bootstrap standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// Phasor block sums of the ensemble's phases.
pub(crate) fn phasor_blocks(phase: &[f64]) -> BlockSums {
    let ranges = block_ranges(phase.len(), DEFAULT_BLOCKS);
    let sums = ranges
        .par_iter()
        .map(|r| phase[r.clone()].iter().map(|&p| C64::from_polar(1.0, p)).sum())
        .collect();
    BlockSums {
        sums,
        counts: ranges.iter().map(|r| r.len()).collect(),
    }
}

/// Modulus of the mean phasor and its block-bootstrap standard error.
pub(crate) fn modulus_estimate(blocks: &BlockSums, stream: &Substream) -> McEstimate {
    let value = blocks.mean().norm();
    let mut rng = stream.auxiliary(0);
    let stderr = bootstrap_sd(blocks.sums.len(), BOOTSTRAP_RESAMPLES, &mut rng, |idx| {
        let s: C64 = idx.iter().map(|&i| blocks.sums[i]).sum();
        let n: usize = idx.iter().map(|&i| blocks.counts[i]).sum();
        (s / n as f64).norm()
    });
    McEstimate { value, stderr }
}

/// Monte Carlo Hahn-echo attenuation: encode with G₁ for δ, diffuse, apply
/// the refocusing pulse as phase conjugation midway, diffuse, encode again
/// with the same G₁. Gradient onsets are Δ apart. `point` selects the random
/// substream (e.g. the sweep index).
pub fn echo_attenuation_mc(
    timing: &DiffusionTiming,
    q_gamma: f64,
    params: &DiffusionParams,
    point: u64,
) -> Result<McEstimate> {
    timing.validate()?;
    params.validate()?;
    let stream = Substream::new(params.seed, point);
    let delta = timing.little_delta;
    let half_gap = 0.5 * (timing.big_delta - delta);
    let pulse = GradientWaveform::new(vec![GradientSegment::rectangular(timing.g1, delta)])?;

    let mut ens = WalkerEnsemble::at_origin(params.n_walkers);
    ens = accumulate_phase(ens, &pulse, q_gamma, params, &stream)?;
    ens = brownian_evolve(ens, half_gap, params, &stream)?;
    ens.conjugate_phases();
    ens = brownian_evolve(ens, half_gap, params, &stream)?;
    ens = accumulate_phase(ens, &pulse, q_gamma, params, &stream)?;

    let blocks = phasor_blocks(&ens.phase);
    Ok(modulus_estimate(&blocks, &stream))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMode {
    Analytic,
    MonteCarlo,
}

/// S/S₀ over a list of encode gradients. Monte Carlo points use
/// independent substreams keyed by their index in `g_list`.
pub fn attenuation_curve(
    timing: &DiffusionTiming,
    q_gamma: f64,
    params: &DiffusionParams,
    g_list: &[f64],
    mode: CurveMode,
) -> Result<AttenuationCurve> {
    timing.validate()?;
    if g_list.is_empty() {
        return Err(crate::Error::InvalidCurve("gradient list is empty".into()));
    }
    let points = g_list
        .iter()
        .enumerate()
        .map(|(i, &g)| match mode {
            CurveMode::Analytic => Ok(CurvePoint {
                g,
                s: stejskal_tanner(g, timing.little_delta, timing.big_delta, params.d_const, q_gamma)?,
                sigma: None,
            }),
            CurveMode::MonteCarlo => {
                let t = DiffusionTiming { g1: g, ..*timing };
                let est = echo_attenuation_mc(&t, q_gamma, params, i as u64)?;
                Ok(CurvePoint {
                    g,
                    s: est.value,
                    sigma: Some(est.stderr),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AttenuationCurve {
        points,
        little_delta: timing.little_delta,
        big_delta: timing.big_delta,
        q_gamma,
    })
}

/// Evenly spaced gradients 0..=g_max.
pub fn linear_sweep(g_max: f64, n_points: usize) -> Vec<f64> {
    match n_points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n_points)
            .map(|i| g_max * i as f64 / (n_points - 1) as f64)
            .collect(),
    }
}
