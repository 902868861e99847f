use crate::{Error, Result};

/// Stejskal-Tanner echo attenuation
/// S/S₀ = exp(-q_γ² G² δ² D (Δ - δ/3)).
pub fn stejskal_tanner(g: f64, delta: f64, big_delta: f64, d_const: f64, q_gamma: f64) -> Result<f64> {
    if !(delta >= 0.0) || big_delta < delta {
        return Err(Error::Domain(format!(
            "need Δ >= δ >= 0, got Δ = {big_delta}, δ = {delta}"
        )));
    }
    Ok((-b_value(g, delta, big_delta, q_gamma) * d_const).exp())
}

/// Diffusion weighting b = q_γ² G² δ² (Δ - δ/3), s m^-2.
pub fn b_value(g: f64, delta: f64, big_delta: f64, q_gamma: f64) -> f64 {
    (q_gamma * g * delta).powi(2) * (big_delta - delta / 3.0)
}

/// Narrow-pulse limit exp(-(q_γ G δ)² D Δ) with Δ the centre-to-centre delay.
pub fn narrow_pulse(g: f64, delta: f64, centre_delay: f64, d_const: f64, q_gamma: f64) -> f64 {
    (-(q_gamma * g * delta).powi(2) * d_const * centre_delay).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_limits() {
        assert_eq!(stejskal_tanner(0.0, 2e-3, 50e-3, 6.24e-10, 2.675e8).unwrap(), 1.0);
        assert_eq!(stejskal_tanner(0.3, 2e-3, 50e-3, 0.0, 2.675e8).unwrap(), 1.0);
        assert!(stejskal_tanner(0.3, 2e-3, 1e-3, 1e-9, 2.675e8).is_err());
    }

    #[test]
    fn reference_maximum_gradient_value() {
        let s = stejskal_tanner(0.3325, 2e-3, 50e-3, 6.24e-10, 2.675e8).unwrap();
        // direct evaluation: (2.675e8·0.3325·2e-3)² · 6.24e-10 · (0.05 - 2e-3/3)
        let arg = (2.675e8_f64 * 0.3325 * 2e-3).powi(2) * 6.24e-10 * (0.05 - 2e-3 / 3.0);
        assert!((s - (-arg).exp()).abs() < 1e-15);
        assert!((s - 0.378).abs() < 0.001, "{s}");
    }

    #[test]
    fn monotone_in_every_argument() {
        let base = (0.2, 2e-3, 40e-3, 5e-10, 2.675e8);
        let s0 = stejskal_tanner(base.0, base.1, base.2, base.3, base.4).unwrap();
        assert!(stejskal_tanner(0.25, base.1, base.2, base.3, base.4).unwrap() <= s0);
        assert!(stejskal_tanner(base.0, 3e-3, base.2, base.3, base.4).unwrap() <= s0);
        assert!(stejskal_tanner(base.0, base.1, 60e-3, base.3, base.4).unwrap() <= s0);
        assert!(stejskal_tanner(base.0, base.1, base.2, 7e-10, base.4).unwrap() <= s0);
    }
}
