use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{AttenuationCurve, CurvePoint};
use super::fit::{fit_diffusion, FitMethod, FitOptions};
use crate::diffusion::{b_value, linear_sweep, Substream};
use crate::Result;

/// Repeated fits of noisy synthetic curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseTrialConfig {
    pub d_true: f64,
    pub q_gamma: f64,
    pub little_delta: f64,
    pub big_delta: f64,
    pub g_max: f64,
    pub n_points: usize,
    /// Standard deviation of the multiplicative Gaussian noise.
    pub noise_fraction: f64,
    pub trials: usize,
    pub seed: u64,
    pub method: FitMethod,
    pub bootstrap_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub trials: usize,
    pub fitted: usize,
    /// Fits with |d_fit - d_true| <= 3·d_sigma.
    pub covered: usize,
    pub coverage: f64,
    pub mean_relative_sigma: f64,
}

impl NoiseTrialConfig {
    /// Noisy curve of one trial.
    pub fn curve(&self, trial: u64) -> AttenuationCurve {
        let mut rng = Substream::new(self.seed, trial).auxiliary(0x6e6f);
        let points = linear_sweep(self.g_max, self.n_points)
            .into_iter()
            .map(|g| {
                let b = b_value(g, self.little_delta, self.big_delta, self.q_gamma);
                let n: f64 = rng.sample(StandardNormal);
                CurvePoint {
                    g,
                    s: (-b * self.d_true).exp() * (1.0 + self.noise_fraction * n),
                    sigma: None,
                }
            })
            .collect();
        AttenuationCurve {
            points,
            little_delta: self.little_delta,
            big_delta: self.big_delta,
            q_gamma: self.q_gamma,
        }
    }
}

/// Fraction of trials whose ±3σ interval covers the true D.
pub fn noise_coverage(cfg: &NoiseTrialConfig) -> Result<CoverageReport> {
    let fits: Vec<_> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let opts = FitOptions {
                method: cfg.method,
                bootstrap_samples: cfg.bootstrap_samples,
                seed: cfg.seed ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            };
            fit_diffusion(&cfg.curve(t), &opts).ok()
        })
        .collect();
    let ok: Vec<_> = fits.into_iter().flatten().collect();
    let covered = ok
        .iter()
        .filter(|f| (f.d_fit - cfg.d_true).abs() <= 3.0 * f.d_sigma)
        .count();
    let mean_relative_sigma = ok.iter().map(|f| f.d_sigma / f.d_fit).sum::<f64>() / ok.len().max(1) as f64;
    Ok(CoverageReport {
        trials: cfg.trials,
        fitted: ok.len(),
        covered,
        coverage: covered as f64 / cfg.trials.max(1) as f64,
        mean_relative_sigma,
    })
}
