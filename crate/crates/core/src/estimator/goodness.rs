use serde::{Deserialize, Serialize};

use super::curve::AttenuationCurve;
use super::fit::FitResult;

/// Residual diagnostics of a fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    /// s - S₀exp(-bD) per point.
    pub residuals: Vec<f64>,
    /// R² of ln s against G² over the positive points.
    pub r_squared_log: f64,
    pub runs: usize,
    pub expected_runs: f64,
    /// Wald-Wolfowitz statistic; strongly negative means too few sign changes.
    pub runs_z: f64,
    /// Residual signs cluster more than chance allows (z < -1.96).
    pub structured: bool,
}

/// Residuals smaller than this fraction of the largest signal count as
/// rounding and carry no sign.
const NOISE_FLOOR: f64 = 1e-9;

pub fn goodness_report(curve: &AttenuationCurve, fit: &FitResult) -> GoodnessReport {
    let b = curve.b_values();
    let residuals: Vec<f64> = curve
        .points
        .iter()
        .zip(&b)
        .map(|(p, &b)| p.s - fit.s0_fit * (-b * fit.d_fit).exp())
        .collect();

    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.s > 0.0)
        .map(|p| (p.g * p.g, p.s.ln()))
        .collect();
    let r_squared_log = r_squared(&pts);

    let scale = curve.points.iter().map(|p| p.s.abs()).fold(0.0, f64::max);
    let signs: Vec<bool> = residuals
        .iter()
        .filter(|r| r.abs() > NOISE_FLOOR * scale)
        .map(|&r| r > 0.0)
        .collect();
    let n1 = signs.iter().filter(|&&s| s).count() as f64;
    let n2 = signs.len() as f64 - n1;
    let runs = if signs.is_empty() {
        0
    } else {
        1 + signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    let n = n1 + n2;
    let (expected_runs, runs_z) = if n1 > 0.0 && n2 > 0.0 {
        let mu = 2.0 * n1 * n2 / n + 1.0;
        let var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
        (mu, if var > 0.0 { (runs as f64 - mu) / var.sqrt() } else { 0.0 })
    } else {
        (runs as f64, 0.0)
    };
    GoodnessReport {
        residuals,
        r_squared_log,
        runs,
        expected_runs,
        runs_z,
        structured: runs_z < -1.96,
    }
}

fn r_squared(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if n < 2.0 {
        return 1.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if syy == 0.0 || sxx == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{fit_diffusion, CurvePoint, FitOptions};

    fn curve(f: impl Fn(f64) -> f64) -> AttenuationCurve {
        let (q, delta, big) = (2.675e8, 2e-3, 50e-3);
        let points = (0..21)
            .map(|i| {
                let g = 0.3325 * i as f64 / 20.0;
                let b = (q * g * delta).powi(2) * (big - delta / 3.0);
                CurvePoint { g, s: f(b), sigma: None }
            })
            .collect();
        AttenuationCurve { points, little_delta: delta, big_delta: big, q_gamma: q }
    }

    #[test]
    fn noiseless_curve_is_clean() {
        let c = curve(|b| (-b * 6.24e-10).exp());
        let f = fit_diffusion(&c, &FitOptions::default()).unwrap();
        let g = goodness_report(&c, &f);
        assert!((g.r_squared_log - 1.0).abs() < 1e-12);
        assert!(!g.structured);
        assert_eq!(g.residuals.len(), 21);
    }

    #[test]
    fn two_component_decay_is_flagged() {
        let c = curve(|b| 0.5 * (-b * 2e-9).exp() + 0.5 * (-b * 2e-10).exp());
        let f = fit_diffusion(&c, &FitOptions::default()).unwrap();
        let g = goodness_report(&c, &f);
        assert!(g.structured, "runs {} z {}", g.runs, g.runs_z);
        assert!(g.r_squared_log < 0.999);
    }
}
