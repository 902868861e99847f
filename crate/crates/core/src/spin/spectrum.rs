use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::state::{DetectChannel, StateOperator};
use super::Nuclide;
use crate::{Error, Result, C64};

/// One stick of a single-quantum spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    /// Offset from the channel's Larmor frequency, Hz.
    pub offset_hz: f64,
    /// Complex amplitude of the observable coherences at this offset.
    pub amplitude: C64,
}

/// Single-quantum lines of the given nuclide's channel. Lines are grouped by
/// J-multiplet offset (the spectator configuration fixes the offset) and
/// sorted by offset. Every allowed offset appears, even with zero amplitude.
pub fn stick_spectrum(state: &StateOperator, channel: &Nuclide) -> Result<Vec<SpectrumLine>> {
    let spec = state.spec();
    let detect = if *channel == spec.control {
        DetectChannel::Control
    } else if *channel == spec.target && spec.n_total > 1 {
        DetectChannel::Targets
    } else {
        return Err(Error::Domain(format!(
            "nuclide {} is not a channel of this spin system",
            channel.label
        )));
    };
    // Offsets are integer multiples of J/2; key on twice the offset in units of J.
    let mut lines: BTreeMap<i64, C64> = BTreeMap::new();
    for block in state.blocks() {
        for (c, r, v) in block.detection_entries(detect) {
            let (lr, lc) = (&block.labels[r], &block.labels[c]);
            // element |r><c| evolves as exp(-i(E_r - E_c)t); offset (E_c - E_r)/2π
            let twice = 2.0
                * (lc.control_mz() * lc.target_mz() - lr.control_mz() * lr.target_mz());
            let key = twice.round() as i64;
            *lines.entry(key).or_insert(C64::new(0.0, 0.0)) +=
                block.matrix[(r, c)] * v * block.multiplicity;
        }
    }
    Ok(lines
        .into_iter()
        .map(|(k, amplitude)| SpectrumLine {
            offset_hz: k as f64 * 0.5 * spec.j_coupling,
            amplitude,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::spin::{
        collective_rotation, make_pseudopure, thermal_state, Axis, Channel, Polarization,
        Representation, SpinSystemSpec,
    };

    #[test]
    fn single_spin_gives_one_line_at_zero() {
        let s = SpinSystemSpec::new(
            Nuclide::phosphorus(),
            Nuclide::proton(),
            1,
            0.0,
            Representation::DickeSubspace,
        )
        .unwrap();
        let rho = thermal_state(&s, Polarization { control: 1e-5, target: 0.0 }).unwrap();
        let rho = collective_rotation(&rho, Channel::ControlOnly, Axis::Y, FRAC_PI_2);
        let lines = stick_spectrum(&rho, &s.control).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].offset_hz, 0.0);
        assert!(lines[0].amplitude.re > 0.0);
    }

    #[test]
    fn am9_phosphorus_multiplet_is_binomial() {
        let binom = [1.0, 9.0, 36.0, 84.0, 126.0, 126.0, 84.0, 36.0, 9.0, 1.0];
        for rep in [Representation::DickeSubspace, Representation::FullTensor] {
            let s = SpinSystemSpec::trimethylphosphite().with_representation(rep).unwrap();
            let rho =
                thermal_state(&s, Polarization::equilibrium(&s, 1e-5, s.target.gamma)).unwrap();
            let rho = collective_rotation(&rho, Channel::ControlOnly, Axis::Y, FRAC_PI_2);
            let lines = stick_spectrum(&rho, &s.control).unwrap();
            assert_eq!(lines.len(), 10);
            for w in lines.windows(2) {
                assert!((w[1].offset_hz - w[0].offset_hz - 11.0).abs() < 1e-12);
            }
            let unit = lines[0].amplitude.re;
            for (line, b) in lines.iter().zip(binom) {
                assert!((line.amplitude.re / unit - b).abs() < 1e-9);
                assert!(line.amplitude.im.abs() < 1e-12 * unit);
            }
        }
    }

    #[test]
    fn proton_spectrum_of_am9_is_a_doublet() {
        let s = SpinSystemSpec::trimethylphosphite();
        let rho = thermal_state(&s, Polarization::equilibrium(&s, 1e-5, s.target.gamma)).unwrap();
        let rho = collective_rotation(&rho, Channel::TargetsOnly, Axis::Y, FRAC_PI_2);
        let lines = stick_spectrum(&rho, &s.target).unwrap();
        assert_eq!(lines.len(), 2);
        assert!((lines[1].offset_hz - lines[0].offset_hz - 11.0).abs() < 1e-12);
        assert!((lines[0].amplitude - lines[1].amplitude).norm() < 1e-18);
    }

    #[test]
    fn pure_control_coherence_lines_up_with_spectators() {
        let s = SpinSystemSpec::trimethylphosphite();
        let plus = (StateOperator::ket(&s, 0, 0) + StateOperator::ket(&s, 1, 0))
            * C64::new(0.5f64.sqrt(), 0.0);
        let rho = make_pseudopure(&s, &plus, 1e-5).unwrap();
        let lines = stick_spectrum(&rho, &s.control).unwrap();
        let top = lines.iter().max_by(|a, b| a.amplitude.norm().total_cmp(&b.amplitude.norm())).unwrap();
        assert_eq!(top.offset_hz, 4.5 * 11.0);
        let others = lines.iter().filter(|l| l.offset_hz != top.offset_hz);
        for l in others {
            assert!(l.amplitude.norm() < 1e-18);
        }
    }
}
