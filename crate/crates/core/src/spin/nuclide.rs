use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const BUNDLED_TABLE: &str = include_str!("../../data/nuclides.json");

/// A spin-1/2 nuclide with its gyromagnetic ratio in rad s^-1 T^-1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nuclide {
    pub label: String,
    pub gamma: f64,
}

impl Nuclide {
    pub fn new(label: impl Into<String>, gamma: f64) -> Result<Self> {
        let label = label.into();
        if gamma == 0.0 || !gamma.is_finite() {
            return Err(Error::InvalidSystem(format!(
                "nuclide {label}: gyromagnetic ratio must be finite and nonzero, got {gamma}"
            )));
        }
        Ok(Self { label, gamma })
    }

    /// ¹H from the bundled table.
    pub fn proton() -> Self {
        NuclideTable::bundled().get("1H").expect("bundled table has 1H")
    }

    /// ³¹P from the bundled table.
    pub fn phosphorus() -> Self {
        NuclideTable::bundled().get("31P").expect("bundled table has 31P")
    }
}

/// Reference gyromagnetic ratios keyed by nuclide label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NuclideTable {
    gamma_rad_per_s_per_t: BTreeMap<String, f64>,
}

impl NuclideTable {
    pub fn bundled() -> Self {
        serde_json::from_str(BUNDLED_TABLE).expect("bundled nuclide table is valid JSON")
    }

    pub fn bundled_json() -> &'static str {
        BUNDLED_TABLE
    }

    pub fn get(&self, label: &str) -> Option<Nuclide> {
        self.gamma_rad_per_s_per_t.get(label).map(|&gamma| Nuclide {
            label: label.to_string(),
            gamma,
        })
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.gamma_rad_per_s_per_t.keys().map(String::as_str)
    }
}
