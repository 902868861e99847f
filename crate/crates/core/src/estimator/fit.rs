use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::AttenuationCurve;
use crate::diffusion::Substream;
use crate::{Error, Result};

/// Relative parameter change that ends the Levenberg-Marquardt iteration.
const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 200;
/// b_max·D below which a fit counts as showing no attenuation.
const DEGENERATE_ATTENUATION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// Straight line through ln s against b.
    LogLinear,
    /// Least squares on s = S₀ exp(-bD), started from the log-linear fit.
    #[default]
    NonlinearLs,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub method: FitMethod,
    /// Point-resampling bootstrap trials; 0 disables the bootstrap.
    pub bootstrap_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(rename = "d_fit_m2_per_s")]
    pub d_fit: f64,
    /// Larger of the covariance and bootstrap standard errors.
    #[serde(rename = "d_sigma_m2_per_s")]
    pub d_sigma: f64,
    pub s0_fit: f64,
    pub residual_rms: f64,
    pub method: FitMethod,
    pub bootstrap_samples: usize,
    #[serde(rename = "covariance_sigma_m2_per_s")]
    pub covariance_sigma: f64,
    #[serde(rename = "bootstrap_sigma_m2_per_s")]
    pub bootstrap_sigma: Option<f64>,
    pub iterations: usize,
    /// The curve shows no resolvable attenuation.
    pub degenerate: bool,
}

/// Fit inputs scaled to unit signal and unit maximum b.
struct Scaled {
    x: Vec<f64>,
    s: Vec<f64>,
    w: Vec<f64>,
    weighted: bool,
    b_max: f64,
    s_scale: f64,
}

fn scaled(curve: &AttenuationCurve, resampled: bool) -> Result<Scaled> {
    if !resampled {
        curve.validate()?;
    }
    if curve.len() < 3 {
        return Err(Error::InvalidCurve(format!(
            "need at least 3 points, got {}",
            curve.len()
        )));
    }
    let mut nonzero: Vec<f64> = curve.points.iter().map(|p| p.g).filter(|&g| g > 0.0).collect();
    nonzero.sort_by(f64::total_cmp);
    nonzero.dedup();
    if nonzero.len() < 2 {
        return Err(Error::InvalidCurve(
            "need at least 2 points with distinct nonzero gradients".into(),
        ));
    }
    let b = curve.b_values();
    let b_max = b.iter().cloned().fold(0.0, f64::max);
    let s_scale = curve.points.iter().map(|p| p.s.abs()).fold(0.0, f64::max);
    if s_scale == 0.0 {
        return Err(Error::InvalidCurve("every signal is zero".into()));
    }
    let s: Vec<f64> = curve.points.iter().map(|p| p.s / s_scale).collect();
    // Inverse-variance weights when every point carries an error; zero
    // errors are floored at the smallest positive one.
    let sig: Option<Vec<f64>> = curve.points.iter().map(|p| p.sigma).collect();
    let floor = sig
        .as_ref()
        .and_then(|v| v.iter().cloned().filter(|&x| x > 0.0).reduce(f64::min));
    let (w, weighted) = match (sig, floor) {
        (Some(v), Some(f)) => (
            v.iter().map(|&x| (s_scale / x.max(f)).powi(2)).collect(),
            true,
        ),
        _ => (vec![1.0; s.len()], false),
    };
    Ok(Scaled {
        x: b.iter().map(|v| v / b_max).collect(),
        s,
        w,
        weighted,
        b_max,
        s_scale,
    })
}

/// (ln S₀, D̃, var D̃) by weighted regression of ln s on x.
fn log_linear(d: &Scaled, clip: bool) -> Result<(f64, f64, f64)> {
    let min_pos = d.s.iter().cloned().filter(|&v| v > 0.0).reduce(f64::min);
    let y: Vec<f64> = match min_pos {
        Some(m) if clip => d.s.iter().map(|&v| v.max(m).ln()).collect(),
        _ => {
            if let Some(v) = d.s.iter().find(|&&v| !(v > 0.0)) {
                return Err(Error::Domain(format!(
                    "log-linear fit needs positive signals, got {}",
                    v * d.s_scale
                )));
            }
            d.s.iter().map(|v| v.ln()).collect()
        }
    };
    // var(ln s) ≈ σ²/s²
    let w: Vec<f64> = d.w.iter().zip(&d.s).map(|(w, s)| if d.weighted { w * s * s } else { *w }).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&d.x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&d.x).map(|(w, x)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = w.iter().zip(d.x.iter().zip(&y)).map(|(w, (x, y))| w * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = w
        .iter()
        .zip(d.x.iter().zip(&y))
        .map(|(w, (x, y))| w * (y - intercept - slope * x).powi(2))
        .sum();
    let dof = (d.x.len() - 2) as f64;
    let s2 = if d.weighted { (rss / dof).max(1.0) } else { rss / dof };
    Ok((intercept, -slope, s2 / sxx))
}

fn model(p: [f64; 2], x: f64) -> f64 {
    p[0] * (-p[1] * x).exp()
}

fn rss(d: &Scaled, p: [f64; 2]) -> f64 {
    d.x.iter()
        .zip(&d.s)
        .zip(&d.w)
        .map(|((&x, &s), &w)| w * (s - model(p, x)).powi(2))
        .sum()
}

/// JᵀWJ and JᵀW r for r = s - model.
fn normal_equations(d: &Scaled, p: [f64; 2]) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut a = [[0.0; 2]; 2];
    let mut g = [0.0; 2];
    for ((&x, &s), &w) in d.x.iter().zip(&d.s).zip(&d.w) {
        let e = (-p[1] * x).exp();
        let j = [e, -p[0] * x * e];
        let r = s - p[0] * e;
        for i in 0..2 {
            g[i] += w * j[i] * r;
            for k in 0..2 {
                a[i][k] += w * j[i] * j[k];
            }
        }
    }
    (a, g)
}

fn solve2(a: [[f64; 2]; 2], g: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([
        (g[0] * a[1][1] - g[1] * a[0][1]) / det,
        (a[0][0] * g[1] - a[1][0] * g[0]) / det,
    ])
}

/// Levenberg-Marquardt with Marquardt's diagonal scaling. Returns the
/// optimum, var D̃ and the iteration count.
fn nonlinear(d: &Scaled, start: [f64; 2]) -> Result<([f64; 2], f64, usize)> {
    let mut p = start;
    let mut cur = rss(d, p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = cur == 0.0;
    while !converged {
        if iterations == MAX_ITERATIONS {
            return Err(Error::FitNonConvergence {
                iterations,
                last_step: f64::NAN,
                rss: cur,
            });
        }
        iterations += 1;
        let (a, g) = normal_equations(d, p);
        loop {
            let damped = [
                [a[0][0] * (1.0 + lambda), a[0][1]],
                [a[1][0], a[1][1] * (1.0 + lambda)],
            ];
            let step = solve2(damped, g);
            let trial = step.map(|s| [p[0] + s[0], p[1] + s[1]]);
            match trial {
                Some(t) if rss(d, t) <= cur => {
                    let s = step.unwrap();
                    let change = (s[0].abs() / p[0].abs().max(1e-12)).max(s[1].abs() / p[1].abs().max(1e-12));
                    p = t;
                    cur = rss(d, t);
                    lambda = (lambda / 10.0).max(1e-15);
                    converged = change < TOLERANCE || cur == 0.0;
                    break;
                }
                _ => {
                    lambda *= 10.0;
                    if lambda > 1e16 {
                        // no descent direction left at machine precision
                        converged = true;
                        break;
                    }
                }
            }
        }
    }
    let (a, _) = normal_equations(d, p);
    let dof = (d.x.len() - 2) as f64;
    let s2 = if d.weighted { (cur / dof).max(1.0) } else { cur / dof };
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let var_d = if det > 0.0 { s2 * a[0][0] / det } else { f64::INFINITY };
    Ok((p, var_d, iterations))
}

fn fit_core(curve: &AttenuationCurve, method: FitMethod, resampled: bool) -> Result<FitResult> {
    let d = scaled(curve, resampled)?;
    let (p, var_d, iterations) = match method {
        FitMethod::LogLinear => {
            let (ln_s0, dt, var) = log_linear(&d, false)?;
            ([ln_s0.exp(), dt], var, 0)
        }
        FitMethod::NonlinearLs => {
            let (ln_s0, dt, _) = log_linear(&d, true)?;
            nonlinear(&d, [ln_s0.exp(), dt])?
        }
    };
    let b = curve.b_values();
    let s0 = p[0] * d.s_scale;
    let d_fit = p[1] / d.b_max;
    let residual_rms = (curve
        .points
        .iter()
        .zip(&b)
        .map(|(pt, &b)| (pt.s - s0 * (-b * d_fit).exp()).powi(2))
        .sum::<f64>()
        / curve.len() as f64)
        .sqrt();
    let covariance_sigma = var_d.max(0.0).sqrt() / d.b_max;
    Ok(FitResult {
        d_fit,
        d_sigma: covariance_sigma,
        s0_fit: s0,
        residual_rms,
        method,
        bootstrap_samples: 0,
        covariance_sigma,
        bootstrap_sigma: None,
        iterations,
        degenerate: p[1] <= DEGENERATE_ATTENUATION,
    })
}

/// Fits S = S₀ exp(-bD) to the curve.
pub fn fit_diffusion(curve: &AttenuationCurve, options: &FitOptions) -> Result<FitResult> {
    let mut out = fit_core(curve, options.method, false)?;
    if options.bootstrap_samples == 0 {
        return Ok(out);
    }
    let n = curve.len();
    let fits: Vec<f64> = (0..options.bootstrap_samples as u64)
        .into_par_iter()
        .filter_map(|trial| {
            let mut rng = Substream::new(options.seed, trial).auxiliary(0xB007);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            fit_core(&curve.resample(&idx), options.method, true).ok().map(|f| f.d_fit)
        })
        .collect();
    out.bootstrap_samples = options.bootstrap_samples;
    if fits.len() >= 2 {
        let m = fits.iter().sum::<f64>() / fits.len() as f64;
        let sd = (fits.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (fits.len() - 1) as f64).sqrt();
        out.bootstrap_sigma = Some(sd);
        out.d_sigma = out.covariance_sigma.max(sd);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::CurvePoint;

    fn synthetic(d: f64, s0: f64, q: f64) -> AttenuationCurve {
        let (delta, big) = (2e-3, 50e-3);
        let points = (0..21)
            .map(|i| {
                let g = 0.3325 * i as f64 / 20.0;
                let b = (q * g * delta).powi(2) * (big - delta / 3.0);
                CurvePoint { g, s: s0 * (-b * d).exp(), sigma: None }
            })
            .collect();
        AttenuationCurve { points, little_delta: delta, big_delta: big, q_gamma: q }
    }

    #[test]
    fn recovers_noiseless_reference_value() {
        let c = synthetic(6.24e-10, 1.0, 2.6752218744e8);
        for method in [FitMethod::LogLinear, FitMethod::NonlinearLs] {
            let f = fit_diffusion(&c, &FitOptions { method, ..Default::default() }).unwrap();
            assert!(((f.d_fit - 6.24e-10) / 6.24e-10).abs() < 1e-9, "{method:?} {}", f.d_fit);
            assert!(f.residual_rms < 1e-12);
            assert!(!f.degenerate);
        }
    }

    #[test]
    fn flat_curve_is_degenerate() {
        let c = synthetic(0.0, 1.0, 2.675e8);
        let f = fit_diffusion(&c, &FitOptions::default()).unwrap();
        assert!(f.degenerate);
        assert!(f.d_fit.abs() < 1e-20);
    }

    #[test]
    fn preconditions() {
        let mut c = synthetic(6e-10, 1.0, 2.675e8);
        c.points.truncate(2);
        assert!(fit_diffusion(&c, &FitOptions::default()).is_err());
        let mut c = synthetic(6e-10, 1.0, 2.675e8);
        c.points[3].s = -0.1;
        let ll = FitOptions { method: FitMethod::LogLinear, ..Default::default() };
        assert!(matches!(fit_diffusion(&c, &ll), Err(Error::Domain(_))));
        // the nonlinear fit clips its starting point instead
        assert!(fit_diffusion(&c, &FitOptions::default()).is_ok());
        let mut c = synthetic(6e-10, 1.0, 2.675e8);
        c.points[5].g = c.points[4].g;
        assert!(fit_diffusion(&c, &FitOptions::default()).is_err());
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let mut c = synthetic(6.24e-10, 1.0, 2.675e8);
        for (i, p) in c.points.iter_mut().enumerate() {
            p.s *= 1.0 + 0.01 * ((i * 7 % 5) as f64 - 2.0);
        }
        let o = FitOptions { bootstrap_samples: 64, seed: 9, ..Default::default() };
        let a = fit_diffusion(&c, &o).unwrap();
        let b = fit_diffusion(&c, &o).unwrap();
        assert_eq!(a, b);
        assert!(a.bootstrap_sigma.unwrap() > 0.0);
        assert!(a.d_sigma >= a.covariance_sigma);
    }
}
