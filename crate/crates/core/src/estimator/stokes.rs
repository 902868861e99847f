use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// CODATA 2018 Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesEinsteinInput {
    #[serde(rename = "temperature_K")]
    pub temperature: f64,
    #[serde(rename = "viscosity_Pa_s")]
    pub viscosity: f64,
    #[serde(rename = "stokes_radius_m")]
    pub stokes_radius: f64,
    #[serde(rename = "boltzmann_J_per_K", default = "default_boltzmann")]
    pub boltzmann: f64,
}

fn default_boltzmann() -> f64 {
    BOLTZMANN
}

impl StokesEinsteinInput {
    pub fn new(temperature: f64, viscosity: f64, stokes_radius: f64) -> Self {
        Self {
            temperature,
            viscosity,
            stokes_radius,
            boltzmann: BOLTZMANN,
        }
    }

    /// 6πηr_s, the friction coefficient of a sphere, kg/s.
    pub fn friction_coefficient(&self) -> f64 {
        6.0 * std::f64::consts::PI * self.viscosity * self.stokes_radius
    }
}

/// D = kT / (6πηr_s).
pub fn stokes_einstein(input: &StokesEinsteinInput) -> Result<f64> {
    for (name, v) in [
        ("temperature", input.temperature),
        ("viscosity", input.viscosity),
        ("Stokes radius", input.stokes_radius),
        ("Boltzmann constant", input.boltzmann),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(input.boltzmann * input.temperature / input.friction_coefficient())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn water_like_nanometre_sphere() {
        let d = stokes_einstein(&StokesEinsteinInput::new(300.0, 1e-3, 1e-9)).unwrap();
        // 1.380649e-23·300 / (6π·1e-3·1e-9) = 4.141947e-21 / 1.8849556e-11
        let hand = 2.19738e-10;
        assert!(((d - hand) / hand).abs() < 1e-5, "{d}");
    }

    #[test]
    fn scaling_and_limits() {
        let base = StokesEinsteinInput::new(298.0, 0.89e-3, 0.5e-9);
        let d = stokes_einstein(&base).unwrap();
        let thick = StokesEinsteinInput { viscosity: 2.0 * base.viscosity, ..base };
        assert!((stokes_einstein(&thick).unwrap() - d / 2.0).abs() < 1e-24);
        let huge = StokesEinsteinInput { stokes_radius: 1e30, ..base };
        assert!(stokes_einstein(&huge).unwrap() < 1e-40);
        let bad = StokesEinsteinInput { temperature: 0.0, ..base };
        assert!(stokes_einstein(&bad).is_err());
    }
}
