use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Gradient strength and timing of a gradient echo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoParameters {
    #[serde(rename = "g_T_per_m")]
    pub g: f64,
    #[serde(rename = "little_delta_s")]
    pub little_delta: f64,
    #[serde(rename = "big_delta_s")]
    pub big_delta: f64,
}

impl EchoParameters {
    /// G² δ² (Δ - δ/3) times the squared gyromagnetic factor `gamma_scale`.
    pub fn weighting(&self, gamma_scale: f64) -> f64 {
        (gamma_scale * self.g * self.little_delta).powi(2) * (self.big_delta - self.little_delta / 3.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledVariant {
    pub name: String,
    pub parameters: EchoParameters,
    /// Relative change of the weighting against the baseline.
    pub b_mismatch: f64,
    /// False when the scaled Δ falls below δ.
    pub realisable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalentParameters {
    pub lopsidedness: f64,
    pub baseline: EchoParameters,
    pub variants: Vec<ScaledVariant>,
    /// Baseline Δ over the delay-scaled Δ; tends to l² as δ/Δ → 0.
    pub delay_reduction: f64,
    /// Baseline Δ - δ/3 over the delay-scaled Δ - δ/3; exactly l².
    pub diffusion_time_reduction: f64,
}

/// Parameter sets that give a coherence l times more gradient-sensitive the
/// same attenuation as the baseline gives a single-quantum coherence.
pub fn equivalent_parameters(l: f64, baseline: EchoParameters) -> Result<EquivalentParameters> {
    if !(l >= 1.0) || !l.is_finite() {
        return Err(Error::Domain(format!("lopsidedness must be at least 1, got {l}")));
    }
    let EchoParameters { g, little_delta: d, big_delta: bd } = baseline;
    if !(d > 0.0) || bd < d {
        return Err(Error::InvalidTiming(format!("need Δ >= δ > 0, got Δ = {bd}, δ = {d}")));
    }
    let reference = baseline.weighting(1.0);
    let sets = [
        ("weaker_gradient", EchoParameters { g: g / l, ..baseline }),
        (
            "shorter_pulse",
            EchoParameters {
                little_delta: d / l,
                big_delta: bd - d / 3.0 + d / (3.0 * l),
                g,
            },
        ),
        (
            "shorter_delay",
            EchoParameters {
                big_delta: (bd - d / 3.0) / (l * l) + d / 3.0,
                ..baseline
            },
        ),
    ];
    let variants: Vec<ScaledVariant> = sets
        .into_iter()
        .map(|(name, p)| ScaledVariant {
            name: name.into(),
            b_mismatch: if reference == 0.0 {
                0.0
            } else {
                p.weighting(l) / reference - 1.0
            },
            realisable: p.big_delta >= p.little_delta,
            parameters: p,
        })
        .collect();
    Ok(EquivalentParameters {
        lopsidedness: l,
        baseline,
        delay_reduction: bd / variants[2].parameters.big_delta,
        diffusion_time_reduction: (bd - d / 3.0) / (variants[2].parameters.big_delta - d / 3.0),
        variants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: EchoParameters = EchoParameters {
        g: 0.3325,
        little_delta: 2e-3,
        big_delta: 50e-3,
    };

    #[test]
    fn unit_lopsidedness_is_identity() {
        let e = equivalent_parameters(1.0, BASE).unwrap();
        for v in &e.variants {
            assert!((v.parameters.g - BASE.g).abs() < 1e-15);
            assert!((v.parameters.little_delta - BASE.little_delta).abs() < 1e-15);
            assert!((v.parameters.big_delta - BASE.big_delta).abs() < 1e-15);
        }
    }

    #[test]
    fn every_variant_keeps_the_weighting() {
        for l in [1.5, 2.0, 9.405, 30.0] {
            let e = equivalent_parameters(l, BASE).unwrap();
            for v in &e.variants {
                assert!(v.b_mismatch.abs() < 1e-12, "{} at l = {l}", v.name);
            }
        }
    }

    #[test]
    fn am9_factors() {
        let l = 9.405;
        let e = equivalent_parameters(l, BASE).unwrap();
        assert!((BASE.g / e.variants[0].parameters.g - l).abs() < 1e-12);
        // δ ≪ Δ: reduction approaches l²
        let narrow = EchoParameters { little_delta: 1e-5, ..BASE };
        let e = equivalent_parameters(l, narrow).unwrap();
        assert!((e.delay_reduction / (l * l) - 1.0).abs() < 0.01, "{}", e.delay_reduction);
        assert!((e.delay_reduction - 88.0).abs() < 1.0);
        let e = equivalent_parameters(l, BASE).unwrap();
        assert!((e.diffusion_time_reduction / (l * l) - 1.0).abs() < 1e-12);
        assert!(e.delay_reduction < e.diffusion_time_reduction);
        assert!(equivalent_parameters(0.5, BASE).is_err());
    }
}
