use serde::{Deserialize, Serialize};

use super::execute::PathwayExpansion;
use crate::diffusion::sinc;
use crate::{Error, Result};

/// Active sample length assumed when none is given, m.
pub const DEFAULT_SAMPLE_LENGTH: f64 = 0.01;

/// A gradient for area bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientArea {
    pub amplitude: f64,
    pub duration: f64,
    pub shape_factor: f64,
    pub polarity: i8,
}

impl GradientArea {
    pub fn new(amplitude: f64, duration: f64, polarity: i8) -> Self {
        Self {
            amplitude,
            duration,
            shape_factor: 1.0,
            polarity,
        }
    }

    /// polarity·G·δ·shape, T s m^-1.
    pub fn signed_area(&self) -> f64 {
        self.polarity as f64 * self.amplitude * self.duration * self.shape_factor
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathwaySurvival {
    pub q_gamma: Vec<f64>,
    /// Net wavenumber Σ q·polarity·G·δ·shape, rad m^-1.
    pub net_area: f64,
    pub survival: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathwayReport {
    pub sample_length: f64,
    pub pathways: Vec<PathwaySurvival>,
}

impl PathwayReport {
    /// Survival of the pathway with the given orders, if listed.
    pub fn find(&self, q_gamma: &[f64]) -> Option<&PathwaySurvival> {
        self.pathways.iter().find(|p| p.q_gamma == q_gamma)
    }
}

/// Net area of one pathway. Sums that cancel to rounding (relative 1e-12 of
/// the summed magnitudes) count as exactly refocused.
fn net_area(gradients: &[GradientArea], q: &[f64]) -> f64 {
    let terms: Vec<f64> = gradients.iter().zip(q).map(|(g, q)| q * g.signed_area()).collect();
    let sum: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if sum.abs() <= 1e-12 * scale {
        0.0
    } else {
        sum
    }
}

/// |sinc(A L/2)| for each pathway over a uniform sample of length L.
pub fn pathway_survival(
    gradients: &[GradientArea],
    pathways: &[Vec<f64>],
    sample_length: f64,
) -> Result<PathwayReport> {
    if !(sample_length > 0.0) {
        return Err(Error::Domain(format!(
            "sample length must be positive, got {sample_length}"
        )));
    }
    let pathways = pathways
        .iter()
        .map(|q| {
            if q.len() != gradients.len() {
                return Err(Error::Domain(format!(
                    "pathway lists {} orders for {} gradients",
                    q.len(),
                    gradients.len()
                )));
            }
            let a = net_area(gradients, q);
            let survival = if a == 0.0 {
                1.0
            } else {
                sinc(0.5 * a * sample_length).abs().min(1.0 - f64::EPSILON)
            };
            Ok(PathwaySurvival {
                q_gamma: q.clone(),
                net_area: a,
                survival,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PathwayReport {
        sample_length,
        pathways,
    })
}

impl PathwayExpansion {
    /// Survival of every detected pathway under the expansion's gradients.
    pub fn survival_report(&self, sample_length: f64) -> Result<PathwayReport> {
        let grads: Vec<GradientArea> = self
            .gradients
            .iter()
            .map(|g| GradientArea {
                amplitude: g.amplitude,
                duration: g.slot.duration,
                shape_factor: 1.0,
                polarity: g.polarity,
            })
            .collect();
        let q: Vec<Vec<f64>> = self.terms.iter().map(|t| t.q_gamma.clone()).collect();
        pathway_survival(&grads, &q, sample_length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::SpinSystemSpec;

    #[test]
    fn zero_area_survives() {
        let g = [GradientArea::new(0.1, 1e-3, 1), GradientArea::new(0.1, 1e-3, -1)];
        let r = pathway_survival(&g, &[vec![2.675e8, 2.675e8]], 0.01).unwrap();
        assert_eq!(r.pathways[0].net_area, 0.0);
        assert_eq!(r.pathways[0].survival, 1.0);
    }

    #[test]
    fn am9_selection_ratio_refocuses_noon_pathway() {
        let spec = SpinSystemSpec::trimethylphosphite();
        let ratio = spec.selection_ratio();
        let g2 = 0.1 / 1e-3;
        let g = [GradientArea::new(g2, 1e-3, 1), GradientArea::new(g2 * ratio, 1e-3, -1)];
        // -N during G₂, -1 on the control during G₃
        let q = vec![-spec.gamma_eff(), -spec.control.gamma];
        let r = pathway_survival(&g, &[q], DEFAULT_SAMPLE_LENGTH).unwrap();
        assert_eq!(r.pathways[0].survival, 1.0);
    }

    #[test]
    fn mismatched_ratio_is_suppressed() {
        let spec = SpinSystemSpec::trimethylphosphite();
        let g2 = 0.1 / 1e-3;
        let g = [GradientArea::new(g2, 1e-3, 1), GradientArea::new(10.0 * g2, 1e-3, -1)];
        let q = vec![-spec.gamma_eff(), -spec.control.gamma];
        let r = pathway_survival(&g, &[q.clone()], 0.01).unwrap();
        // oracle: A = 0.1·(γ_A·10 - γ_eff), survival = |sin(A L/2)/(A L/2)|
        let a = 0.1 * (10.0 * spec.control.gamma - spec.gamma_eff());
        let x = a * 0.005;
        assert!((r.pathways[0].survival - (x.sin() / x).abs()).abs() < 1e-15);
        assert!(r.pathways[0].survival < 0.01);
    }

    #[test]
    fn survival_ignores_gradient_order() {
        let g = [
            GradientArea::new(0.2, 1e-3, 1),
            GradientArea::new(0.05, 2e-3, -1),
            GradientArea::new(0.3, 1e-3, 1),
        ];
        let q = vec![1e8, -3e8, 2e8];
        let a = pathway_survival(&g, &[q.clone()], 0.01).unwrap();
        let gr = [g[2], g[0], g[1]];
        let qr = vec![q[2], q[0], q[1]];
        let b = pathway_survival(&gr, &[qr], 0.01).unwrap();
        assert!((a.pathways[0].survival - b.pathways[0].survival).abs() < 1e-15);
    }

    #[test]
    fn rejects_inconsistent_lists() {
        let g = [GradientArea::new(0.1, 1e-3, 1)];
        assert!(pathway_survival(&g, &[vec![1.0, 2.0]], 0.01).is_err());
    }
}
