use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::Substream;
use crate::{Error, Result};

/// Settings for Brownian walker simulations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    /// Translational diffusion constant, m² s^-1.
    pub d_const: f64,
    pub n_walkers: usize,
    /// Integration step, s. Gradient pulses are split into at least
    /// `sub_steps_per_gradient` steps regardless of `dt`.
    pub dt: f64,
    pub seed: u64,
    pub sub_steps_per_gradient: usize,
}

impl DiffusionParams {
    pub fn new(d_const: f64, n_walkers: usize, seed: u64) -> Self {
        Self {
            d_const,
            n_walkers,
            dt: 1e-4,
            seed,
            sub_steps_per_gradient: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_const >= 0.0) || !self.d_const.is_finite() {
            return Err(Error::Domain(format!(
                "diffusion constant must be finite and non-negative, got {}",
                self.d_const
            )));
        }
        if self.n_walkers == 0 {
            return Err(Error::Domain("at least one walker is required".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        if self.sub_steps_per_gradient < 4 {
            return Err(Error::Domain(format!(
                "sub_steps_per_gradient must be at least 4, got {}",
                self.sub_steps_per_gradient
            )));
        }
        Ok(())
    }
}

/// One piecewise-constant gradient segment. The field is on for the
/// effective duration `duration·shape_factor`, centred in the segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSegment {
    /// Signed amplitude (polarity included), T/m.
    pub amplitude: f64,
    pub duration: f64,
    pub shape_factor: f64,
}

impl GradientSegment {
    pub fn rectangular(amplitude: f64, duration: f64) -> Self {
        Self {
            amplitude,
            duration,
            shape_factor: 1.0,
        }
    }

    pub fn effective_duration(&self) -> f64 {
        self.duration * self.shape_factor
    }

    /// G·δ·shape, T s m^-1.
    pub fn area(&self) -> f64 {
        self.amplitude * self.effective_duration()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GradientWaveform {
    pub segments: Vec<GradientSegment>,
}

impl GradientWaveform {
    pub fn new(segments: Vec<GradientSegment>) -> Result<Self> {
        for s in &segments {
            if !(s.duration > 0.0) {
                return Err(Error::Domain(format!(
                    "gradient segment duration must be positive, got {}",
                    s.duration
                )));
            }
            if !(s.shape_factor > 0.0 && s.shape_factor <= 1.0) {
                return Err(Error::Domain(format!(
                    "shape factor must lie in (0, 1], got {}",
                    s.shape_factor
                )));
            }
        }
        Ok(Self { segments })
    }
}

/// Walker positions (m) and accumulated phases (rad).
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerEnsemble {
    pub z: Vec<f64>,
    pub phase: Vec<f64>,
    pub time: f64,
    /// Number of evolution calls so far; selects fresh random streams.
    pub epoch: u64,
}

impl WalkerEnsemble {
    pub fn at_origin(n_walkers: usize) -> Self {
        Self::from_positions(vec![0.0; n_walkers])
    }

    pub fn from_positions(z: Vec<f64>) -> Self {
        let n = z.len();
        Self {
            z,
            phase: vec![0.0; n],
            time: 0.0,
            epoch: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Phase conjugation φ -> -φ, the action of an ideal refocusing pulse.
    pub fn conjugate_phases(&mut self) {
        self.phase.iter_mut().for_each(|p| *p = -*p);
    }
}

/// Free Wiener step of length `h`: z += sqrt(2 D h)·n.
#[inline]
pub(crate) fn free_step<R: Rng>(rng: &mut R, z: &mut f64, d_const: f64, h: f64) {
    if d_const > 0.0 {
        let n: f64 = rng.sample(StandardNormal);
        *z += (2.0 * d_const * h).sqrt() * n;
    }
}

/// Exact joint draw of the displacement and the time integral of z over a
/// step of length `h`. Returns ∫ z dt over the step.
#[inline]
pub(crate) fn bridge_step<R: Rng>(rng: &mut R, z: &mut f64, d_const: f64, h: f64) -> f64 {
    if d_const == 0.0 {
        return *z * h;
    }
    let n1: f64 = rng.sample(StandardNormal);
    let n2: f64 = rng.sample(StandardNormal);
    let dw = (2.0 * d_const * h).sqrt() * n1;
    // Var[∫W | W(h)] = 2D h³/12 around the trapezoid.
    let integral = *z * h + 0.5 * h * dw + (2.0 * d_const * h * h * h / 12.0).sqrt() * n2;
    *z += dw;
    integral
}

/// Advances every walker by `duration` in steps of at most `params.dt`.
pub fn brownian_evolve(
    mut ensemble: WalkerEnsemble,
    duration: f64,
    params: &DiffusionParams,
    stream: &Substream,
) -> Result<WalkerEnsemble> {
    if !(duration >= 0.0) {
        return Err(Error::Domain(format!(
            "evolution time must be non-negative, got {duration}"
        )));
    }
    params.validate()?;
    if duration > 0.0 && params.d_const > 0.0 {
        let steps = (duration / params.dt).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        let epoch = ensemble.epoch;
        let d = params.d_const;
        ensemble.z.par_iter_mut().enumerate().for_each(|(i, z)| {
            let mut rng = stream.walker(i as u64, epoch);
            for _ in 0..steps {
                free_step(&mut rng, z, d, h);
            }
        });
    }
    ensemble.time += duration;
    ensemble.epoch += 1;
    Ok(ensemble)
}

/// Sub-steps used to resolve a gradient of effective length `eff`.
pub(crate) fn gradient_sub_steps(eff: f64, params: &DiffusionParams) -> usize {
    params
        .sub_steps_per_gradient
        .max((eff / params.dt).ceil() as usize)
}

/// Diffuses walkers through a waveform while integrating
/// phase += q_γ·G(t)·z(t)·dt during the gradient-on parts.
pub fn accumulate_phase(
    mut ensemble: WalkerEnsemble,
    waveform: &GradientWaveform,
    q_gamma: f64,
    params: &DiffusionParams,
    stream: &Substream,
) -> Result<WalkerEnsemble> {
    params.validate()?;
    let epoch = ensemble.epoch;
    let d = params.d_const;
    let plan: Vec<(f64, f64, usize, f64)> = waveform
        .segments
        .iter()
        .map(|s| {
            let eff = s.effective_duration();
            let lead = 0.5 * (s.duration - eff);
            let n = gradient_sub_steps(eff, params);
            (lead, eff, n, s.amplitude)
        })
        .collect();
    ensemble
        .z
        .par_iter_mut()
        .zip(ensemble.phase.par_iter_mut())
        .enumerate()
        .for_each(|(i, (z, phase))| {
            let mut rng = stream.walker(i as u64, epoch);
            for &(lead, eff, n, g) in &plan {
                free_step(&mut rng, z, d, lead);
                let h = eff / n as f64;
                let mut integral = 0.0;
                for _ in 0..n {
                    integral += bridge_step(&mut rng, z, d, h);
                }
                *phase += q_gamma * g * integral;
                free_step(&mut rng, z, d, lead);
            }
        });
    ensemble.time += waveform.segments.iter().map(|s| s.duration).sum::<f64>();
    ensemble.epoch += 1;
    Ok(ensemble)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_walkers_do_not_move() {
        let p = DiffusionParams::new(0.0, 100, 1);
        let ens = WalkerEnsemble::from_positions((0..100).map(|i| i as f64 * 1e-4).collect());
        let out = brownian_evolve(ens.clone(), 0.3, &p, &Substream::new(1, 0)).unwrap();
        assert_eq!(out.z, ens.z);
        assert!((out.time - 0.3).abs() < 1e-15);
    }

    #[test]
    fn wiener_second_moment() {
        let n = 100_000;
        let d = 1e-9;
        let t = 0.1;
        let mut p = DiffusionParams::new(d, n, 11);
        p.dt = 1e-3;
        let out = brownian_evolve(WalkerEnsemble::at_origin(n), t, &p, &Substream::new(11, 0))
            .unwrap();
        let z2: Vec<f64> = out.z.iter().map(|z| z * z).collect();
        let mean_z2 = z2.iter().sum::<f64>() / n as f64;
        let var_z2 = z2.iter().map(|v| (v - mean_z2).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var_z2 / n as f64).sqrt();
        assert!((mean_z2 - 2.0 * d * t).abs() < 3.0 * se, "{mean_z2} vs {}", 2.0 * d * t);

        let mean = out.z.iter().sum::<f64>() / n as f64;
        let se_mean = (mean_z2 / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se_mean);
    }

    #[test]
    fn zero_gradient_leaves_phase() {
        let p = DiffusionParams::new(1e-9, 50, 3);
        let w = GradientWaveform::new(vec![GradientSegment::rectangular(0.0, 1e-3)]).unwrap();
        let out =
            accumulate_phase(WalkerEnsemble::at_origin(50), &w, 2.675e8, &p, &Substream::new(3, 0))
                .unwrap();
        assert!(out.phase.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn frozen_walker_phase_is_product() {
        let p = DiffusionParams::new(0.0, 1, 0);
        let w = GradientWaveform::new(vec![GradientSegment::rectangular(0.1, 1e-3)]).unwrap();
        let out = accumulate_phase(
            WalkerEnsemble::from_positions(vec![1e-3]),
            &w,
            2.675e8,
            &p,
            &Substream::new(0, 0),
        )
        .unwrap();
        assert!((out.phase[0] - 26.75).abs() < 1e-10, "{}", out.phase[0]);
    }

    #[test]
    fn equal_and_opposite_areas_cancel_for_frozen_walkers() {
        let p = DiffusionParams::new(0.0, 10, 0);
        let w = GradientWaveform::new(vec![
            GradientSegment::rectangular(0.2, 2e-3),
            GradientSegment::rectangular(0.0, 10e-3),
            GradientSegment::rectangular(-0.2, 2e-3),
        ])
        .unwrap();
        let ens = WalkerEnsemble::from_positions((0..10).map(|i| (i as f64 - 5.0) * 1e-3).collect());
        let out = accumulate_phase(ens, &w, 2.675e8, &p, &Substream::new(0, 0)).unwrap();
        for ph in out.phase {
            assert!(ph.abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(GradientWaveform::new(vec![GradientSegment::rectangular(0.1, 0.0)]).is_err());
        let mut p = DiffusionParams::new(1e-9, 10, 0);
        p.sub_steps_per_gradient = 2;
        assert!(p.validate().is_err());
        let p = DiffusionParams::new(-1.0, 10, 0);
        assert!(p.validate().is_err());
    }
}
