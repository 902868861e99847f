use serde::{Deserialize, Serialize};

use super::Nuclide;
use crate::{Error, Result};

/// Largest spin count accepted by [`Representation::FullTensor`]; the density
/// matrix grows as 4^N complex entries.
pub const FULL_TENSOR_MAX_SPINS: usize = 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Collective basis: the target spins are decomposed into total-spin
    /// multiplets, each carried once with its degeneracy as a weight. The
    /// fully symmetric multiplet holds the |a>|m flipped> Dicke basis.
    #[default]
    DickeSubspace,
    /// Plain 2^N computational basis, control qubit most significant.
    FullTensor,
}

/// An AM_{N-1} system: one control (A) spin J-coupled to N-1 magnetically
/// equivalent target (M) spins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSystemSpec {
    pub control: Nuclide,
    pub target: Nuclide,
    pub n_total: usize,
    /// Scalar coupling in Hz.
    pub j_coupling: f64,
    #[serde(default)]
    pub representation: Representation,
}

impl SpinSystemSpec {
    pub fn new(
        control: Nuclide,
        target: Nuclide,
        n_total: usize,
        j_coupling: f64,
        representation: Representation,
    ) -> Result<Self> {
        let spec = Self {
            control,
            target,
            n_total,
            j_coupling,
            representation,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The ³¹P{¹H₉} system of trimethylphosphite with J = 11 Hz.
    pub fn trimethylphosphite() -> Self {
        Self::new(
            Nuclide::phosphorus(),
            Nuclide::proton(),
            10,
            11.0,
            Representation::DickeSubspace,
        )
        .expect("valid built-in system")
    }

    pub fn validate(&self) -> Result<()> {
        for nuc in [&self.control, &self.target] {
            if nuc.gamma == 0.0 || !nuc.gamma.is_finite() {
                return Err(Error::InvalidSystem(format!(
                    "nuclide {} has invalid gyromagnetic ratio {}",
                    nuc.label, nuc.gamma
                )));
            }
        }
        if self.n_total < 1 {
            return Err(Error::InvalidSystem("n_total must be at least 1".into()));
        }
        if !self.j_coupling.is_finite() || self.j_coupling < 0.0 {
            return Err(Error::InvalidSystem(format!(
                "J coupling must be finite and non-negative, got {}",
                self.j_coupling
            )));
        }
        if self.n_total >= 2 && self.j_coupling <= 0.0 {
            return Err(Error::InvalidSystem(
                "J coupling must be positive when targets are present".into(),
            ));
        }
        if self.representation == Representation::FullTensor
            && self.n_total > FULL_TENSOR_MAX_SPINS
        {
            return Err(Error::InvalidSystem(format!(
                "full tensor representation limited to {FULL_TENSOR_MAX_SPINS} spins, got {}",
                self.n_total
            )));
        }
        Ok(())
    }

    pub fn with_representation(&self, representation: Representation) -> Result<Self> {
        let mut spec = self.clone();
        spec.representation = representation;
        spec.validate()?;
        Ok(spec)
    }

    pub fn n_targets(&self) -> usize {
        self.n_total - 1
    }

    /// Gradient sensitivity of the N-quantum coherence: γ_A + (N-1)·γ_M.
    pub fn gamma_eff(&self) -> f64 {
        self.control.gamma + self.n_targets() as f64 * self.target.gamma
    }

    /// γ_eff expressed in units of a reference nuclide's γ.
    pub fn lopsidedness(&self, reference: &Nuclide) -> f64 {
        self.gamma_eff() / reference.gamma
    }

    /// G3/G2 ratio that refocuses the ±N pathway after decoding onto the
    /// control: (N-1)·γ_M/γ_A + 1.
    pub fn selection_ratio(&self) -> f64 {
        self.gamma_eff() / self.control.gamma
    }

    /// True when two specs share the same Hilbert space layout and constants.
    pub fn same_layout(&self, other: &SpinSystemSpec) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn am9_constants() -> SpinSystemSpec {
        SpinSystemSpec::new(
            Nuclide::new("31P", 1.0839e8).unwrap(),
            Nuclide::new("1H", 2.6752e8).unwrap(),
            10,
            11.0,
            Representation::DickeSubspace,
        )
        .unwrap()
    }

    #[test]
    fn single_spin_gamma_eff_is_control_gamma() {
        let spec = SpinSystemSpec::new(
            Nuclide::phosphorus(),
            Nuclide::proton(),
            1,
            0.0,
            Representation::DickeSubspace,
        )
        .unwrap();
        assert_eq!(spec.gamma_eff(), spec.control.gamma);
        assert_eq!(spec.lopsidedness(&spec.control), 1.0);
    }

    #[test]
    fn homonuclear_pair_has_lopsidedness_two() {
        let h = Nuclide::proton();
        let spec =
            SpinSystemSpec::new(h.clone(), h.clone(), 2, 7.0, Representation::FullTensor).unwrap();
        assert_eq!(spec.lopsidedness(&h), 2.0);
    }

    #[test]
    fn am9_lopsidedness_and_selection_ratio() {
        let spec = am9_constants();
        let l = spec.lopsidedness(&spec.target);
        assert!((l - 9.4).abs() < 0.05, "l = {l}");
        let ratio = spec.selection_ratio();
        assert!(((ratio - 23.23) / 23.23).abs() < 0.005, "ratio = {ratio}");

        let bundled = SpinSystemSpec::trimethylphosphite();
        assert!(((bundled.selection_ratio() - 23.23) / 23.23).abs() < 0.005);
    }

    #[test]
    fn rejects_bad_systems() {
        let p = Nuclide::phosphorus();
        let h = Nuclide::proton();
        assert!(SpinSystemSpec::new(p.clone(), h.clone(), 0, 11.0, Default::default()).is_err());
        assert!(SpinSystemSpec::new(p.clone(), h.clone(), 3, 0.0, Default::default()).is_err());
        assert!(
            SpinSystemSpec::new(p.clone(), h.clone(), 13, 11.0, Representation::FullTensor)
                .is_err()
        );
        assert!(Nuclide::new("X", 0.0).is_err());
        assert!(SpinSystemSpec::new(p, h, 40, 11.0, Representation::DickeSubspace).is_ok());
    }
}
