//! Ensemble-averaged gradient phase factors for coherence pathways.
//!
//! A pathway that carries gradient-weighted order q_e through gradient
//! window e picks up the phase Σ_e q_e G_e ∫_e z(t) dt. The executor asks
//! for the ensemble average of that phasor given the per-window weights
//! w_e = q_e G_e (rad s^-1 m^-1).

use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::Substream;
use super::stats::{block_ranges, DEFAULT_BLOCKS};
use super::walkers::{bridge_step, free_step, gradient_sub_steps, DiffusionParams};
use crate::{Error, Result, C64};

/// Spatial extent of the sample along the gradient axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleProfile {
    /// Infinitely long sample: any pathway with a nonzero net wavenumber
    /// averages to zero.
    #[default]
    Ideal,
    /// Uniform slab of the given length, m.
    Slab { length_m: f64 },
}

impl SampleProfile {
    /// Average of e^{i k z} over the initial positions. `scale` is the
    /// magnitude of the wavenumbers that summed to `k`, used to tell an
    /// exact cancellation from rounding.
    pub fn spatial_factor(&self, k: f64, scale: f64) -> f64 {
        match *self {
            SampleProfile::Ideal => {
                if k.abs() <= 1e-9 * scale {
                    1.0
                } else {
                    0.0
                }
            }
            SampleProfile::Slab { length_m } => sinc(0.5 * k * length_m),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SampleProfile::Slab { length_m } if !(length_m > 0.0) => Err(Error::Domain(format!(
                "sample length must be positive, got {length_m}"
            ))),
            _ => Ok(()),
        }
    }
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Effective gradient window: the field is on from `start` for `duration`
/// seconds. Times are measured from the first window's onset or any fixed
/// origin; only differences matter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSlot {
    pub start: f64,
    pub duration: f64,
}

/// How gradient phases are averaged over the spin ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffusionModel {
    /// Closed-form Gaussian propagator average.
    Analytic {
        d_const: f64,
        #[serde(default)]
        profile: SampleProfile,
    },
    /// Explicit Brownian walkers.
    MonteCarlo {
        params: DiffusionParams,
        #[serde(default)]
        profile: SampleProfile,
    },
}

impl DiffusionModel {
    pub fn analytic(d_const: f64) -> Self {
        DiffusionModel::Analytic {
            d_const,
            profile: SampleProfile::Ideal,
        }
    }

    pub fn monte_carlo(params: DiffusionParams) -> Self {
        DiffusionModel::MonteCarlo {
            params,
            profile: SampleProfile::Ideal,
        }
    }

    pub fn profile(&self) -> SampleProfile {
        match self {
            DiffusionModel::Analytic { profile, .. } | DiffusionModel::MonteCarlo { profile, .. } => {
                *profile
            }
        }
    }

    pub fn d_const(&self) -> f64 {
        match self {
            DiffusionModel::Analytic { d_const, .. } => *d_const,
            DiffusionModel::MonteCarlo { params, .. } => params.d_const,
        }
    }

    pub fn with_profile(mut self, p: SampleProfile) -> Self {
        match &mut self {
            DiffusionModel::Analytic { profile, .. } | DiffusionModel::MonteCarlo { profile, .. } => {
                *profile = p
            }
        }
        self
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(self, DiffusionModel::MonteCarlo { .. })
    }

    pub fn validate(&self) -> Result<()> {
        self.profile().validate()?;
        match self {
            DiffusionModel::Analytic { d_const, .. } => {
                if !(*d_const >= 0.0) || !d_const.is_finite() {
                    return Err(Error::Domain(format!(
                        "diffusion constant must be finite and non-negative, got {d_const}"
                    )));
                }
                Ok(())
            }
            DiffusionModel::MonteCarlo { params, .. } => params.validate(),
        }
    }

    /// Fixes the gradient windows. Monte Carlo models draw their walkers
    /// here from the substream selected by `point`.
    pub fn prepare(&self, slots: &[GradientSlot], point: u64) -> Result<PreparedDiffusion> {
        self.validate()?;
        check_slots(slots)?;
        let walkers = match self {
            DiffusionModel::Analytic { .. } => None,
            DiffusionModel::MonteCarlo { params, profile } => {
                Some(WalkerIntegrals::draw(slots, params, *profile, point))
            }
        };
        Ok(PreparedDiffusion {
            slots: slots.to_vec(),
            d_const: self.d_const(),
            profile: self.profile(),
            walkers,
        })
    }
}

fn check_slots(slots: &[GradientSlot]) -> Result<()> {
    let mut end = f64::NEG_INFINITY;
    for s in slots {
        if !(s.duration > 0.0) || !s.start.is_finite() {
            return Err(Error::InvalidTiming(format!(
                "gradient window at {} s has non-positive length {}",
                s.start, s.duration
            )));
        }
        if s.start < end - 1e-15 {
            return Err(Error::InvalidTiming(
                "gradient windows overlap or are out of order".into(),
            ));
        }
        end = s.start + s.duration;
    }
    Ok(())
}

/// Per-walker displacement integrals ∫_e (z(t) - z₀) dt for every window.
#[derive(Clone, Debug)]
struct WalkerIntegrals {
    n_slots: usize,
    z0: Vec<f64>,
    integrals: Vec<f64>,
    blocks: Vec<Range<usize>>,
}

impl WalkerIntegrals {
    fn draw(slots: &[GradientSlot], params: &DiffusionParams, profile: SampleProfile, point: u64) -> Self {
        let n = params.n_walkers;
        let k = slots.len();
        let stream = Substream::new(params.seed, point);
        let d = params.d_const;
        let plan: Vec<(f64, f64, usize)> = slots
            .iter()
            .scan(slots.first().map_or(0.0, |s| s.start), |t, s| {
                let gap = (s.start - *t).max(0.0);
                *t = s.start + s.duration;
                let sub = gradient_sub_steps(s.duration, params);
                Some((gap, s.duration / sub as f64, sub))
            })
            .collect();
        let mut z0 = vec![0.0; n];
        let mut integrals = vec![0.0; n * k];
        z0.par_iter_mut()
            .zip(integrals.par_chunks_mut(k.max(1)))
            .enumerate()
            .for_each(|(i, (start, row))| {
                let mut rng = stream.walker(i as u64, 0);
                if let SampleProfile::Slab { length_m } = profile {
                    *start = length_m * (rng.random::<f64>() - 0.5);
                }
                // Displacement from the start; gaps are single exact draws.
                let mut w = 0.0;
                for (e, &(gap, h, sub)) in plan.iter().enumerate() {
                    free_step(&mut rng, &mut w, d, gap);
                    let mut acc = 0.0;
                    for _ in 0..sub {
                        acc += bridge_step(&mut rng, &mut w, d, h);
                    }
                    row[e] = acc;
                }
            });
        Self {
            n_slots: k,
            z0,
            integrals,
            blocks: block_ranges(n, DEFAULT_BLOCKS),
        }
    }
}

/// A diffusion model bound to a fixed set of gradient windows.
#[derive(Clone, Debug)]
pub struct PreparedDiffusion {
    slots: Vec<GradientSlot>,
    d_const: f64,
    profile: SampleProfile,
    walkers: Option<WalkerIntegrals>,
}

impl PreparedDiffusion {
    pub fn slots(&self) -> &[GradientSlot] {
        &self.slots
    }

    pub fn is_monte_carlo(&self) -> bool {
        self.walkers.is_some()
    }

    /// Number of statistical blocks in `block_phasors` output.
    pub fn n_blocks(&self) -> usize {
        self.walkers.as_ref().map_or(1, |w| w.blocks.len())
    }

    /// Walker counts per block (1 for the analytic model).
    pub fn block_counts(&self) -> Vec<usize> {
        match &self.walkers {
            Some(w) => w.blocks.iter().map(|r| r.len()).collect(),
            None => vec![1],
        }
    }

    fn net_wavenumber(&self, weights: &[f64]) -> (f64, f64) {
        let mut k = 0.0;
        let mut scale = 0.0;
        for (w, s) in weights.iter().zip(&self.slots) {
            k += w * s.duration;
            scale += (w * s.duration).abs();
        }
        (k, scale)
    }

    /// exp(-D ∫ K(s)² ds) with K(s) the wavenumber still to be acquired
    /// after time s.
    fn gaussian_factor(&self, weights: &[f64]) -> f64 {
        if self.d_const == 0.0 {
            return 1.0;
        }
        let (k_f, _) = self.net_wavenumber(weights);
        let mut k = 0.0;
        let mut integral = 0.0;
        let mut t = self.slots.first().map_or(0.0, |s| s.start);
        for (w, s) in weights.iter().zip(&self.slots) {
            let gap = s.start - t;
            integral += (k_f - k).powi(2) * gap;
            let a = k_f - k;
            k += w * s.duration;
            let b = k_f - k;
            integral += s.duration * (a * a + a * b + b * b) / 3.0;
            t = s.start + s.duration;
        }
        (-self.d_const * integral).exp()
    }

    /// Ensemble-averaged phasor for window weights w_e = q_e G_e.
    pub fn phasor(&self, weights: &[f64]) -> C64 {
        let blocks = self.block_phasors(weights);
        let n: usize = self.block_counts().iter().sum();
        blocks.iter().sum::<C64>() / n as f64
    }

    /// Per-block phasor sums (un-normalised). For the analytic model a
    /// single block holding the exact average.
    pub fn block_phasors(&self, weights: &[f64]) -> Vec<C64> {
        assert_eq!(weights.len(), self.slots.len(), "one weight per gradient window");
        let (k_f, scale) = self.net_wavenumber(weights);
        match &self.walkers {
            None => {
                let f = self.profile.spatial_factor(k_f, scale) * self.gaussian_factor(weights);
                vec![C64::new(f, 0.0)]
            }
            Some(w) => {
                let ideal = matches!(self.profile, SampleProfile::Ideal);
                if ideal && self.profile.spatial_factor(k_f, scale) == 0.0 {
                    return vec![C64::new(0.0, 0.0); w.blocks.len()];
                }
                if weights.iter().all(|&x| x == 0.0) {
                    return w.blocks.iter().map(|r| C64::new(r.len() as f64, 0.0)).collect();
                }
                let k0 = if ideal { 0.0 } else { k_f };
                w.blocks
                    .par_iter()
                    .map(|r| {
                        r.clone()
                            .map(|i| {
                                let row = &w.integrals[i * w.n_slots..(i + 1) * w.n_slots];
                                let phase = k0 * w.z0[i]
                                    + row.iter().zip(weights).map(|(x, g)| x * g).sum::<f64>();
                                C64::from_polar(1.0, phase)
                            })
                            .sum()
                    })
                    .collect()
            }
        }
    }
}
