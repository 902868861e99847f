use serde::{Deserialize, Serialize};

use crate::diffusion::b_value;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(rename = "g_T_per_m")]
    pub g: f64,
    #[serde(rename = "s_norm")]
    pub s: f64,
    #[serde(rename = "s_stderr")]
    pub sigma: Option<f64>,
}

/// Echo signal against encode gradient strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttenuationCurve {
    pub points: Vec<CurvePoint>,
    #[serde(rename = "little_delta_s")]
    pub little_delta: f64,
    #[serde(rename = "big_delta_s")]
    pub big_delta: f64,
    #[serde(rename = "q_gamma_rad_per_s_per_T")]
    pub q_gamma: f64,
}

impl AttenuationCurve {
    pub fn validate(&self) -> Result<()> {
        if !(self.little_delta > 0.0) || self.big_delta < self.little_delta {
            return Err(Error::InvalidTiming(format!(
                "need Δ >= δ > 0, got Δ = {}, δ = {}",
                self.big_delta, self.little_delta
            )));
        }
        if !(self.q_gamma != 0.0 && self.q_gamma.is_finite()) {
            return Err(Error::InvalidCurve(format!("invalid q_γ {}", self.q_gamma)));
        }
        for (i, p) in self.points.iter().enumerate() {
            if !(p.g >= 0.0) || !p.g.is_finite() {
                return Err(Error::InvalidCurve(format!("point {i}: gradient {} is not a non-negative number", p.g)));
            }
            if !p.s.is_finite() {
                return Err(Error::InvalidCurve(format!("point {i}: signal {} is not finite", p.s)));
            }
            if let Some(s) = p.sigma {
                if !(s >= 0.0) || !s.is_finite() {
                    return Err(Error::InvalidCurve(format!("point {i}: invalid standard error {s}")));
                }
            }
        }
        let mut g: Vec<f64> = self.points.iter().map(|p| p.g).collect();
        g.sort_by(f64::total_cmp);
        if g.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidCurve("gradient values must be distinct".into()));
        }
        Ok(())
    }

    /// b = q_γ² G² δ² (Δ - δ/3) per point, s m^-2.
    pub fn b_values(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| b_value(p.g, self.little_delta, self.big_delta, self.q_gamma))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points taken at the given indices (repeats allowed).
    pub(crate) fn resample(&self, idx: &[usize]) -> Self {
        Self {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            ..self.clone()
        }
    }
}
