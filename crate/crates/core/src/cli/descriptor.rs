//! Experiment descriptor: the JSON input of the command-line tool. Field
//! names carry their SI units.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CliError, Mode};
use crate::diffusion::{DiffusionParams, SampleProfile};
use crate::estimator::{FitMethod, FitOptions};
use crate::spin::{Nuclide, NuclideTable, Representation, SpinSystemSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuclideDescriptor {
    pub label: String,
    /// Taken from the bundled table when omitted.
    #[serde(rename = "gamma_rad_per_s_per_T", default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDescriptor {
    pub control: NuclideDescriptor,
    pub target: NuclideDescriptor,
    pub n_total: usize,
    #[serde(rename = "j_coupling_Hz")]
    pub j_coupling: f64,
    #[serde(default)]
    pub representation: Representation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    SingleQuantum,
    Noon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingDescriptor {
    pub big_delta_s: f64,
    pub little_delta_s: f64,
    /// First selection gradient of the NOON sequence.
    #[serde(rename = "g2_T_per_m", default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<f64>,
    /// Defaults to G₂ times the refocusing ratio γ_eff/γ_control.
    #[serde(rename = "g3_T_per_m", default, skip_serializing_if = "Option::is_none")]
    pub g3: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDescriptor {
    #[serde(rename = "g_max_T_per_m")]
    pub g_max: f64,
    #[serde(default = "default_points")]
    pub n_points: usize,
}

fn default_points() -> usize {
    21
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionDescriptor {
    /// Diffusion constant used to synthesise the data.
    #[serde(rename = "d_true_m2_per_s")]
    pub d_true: f64,
    #[serde(default = "default_walkers")]
    pub n_walkers: usize,
    #[serde(rename = "dt_s", default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_sub_steps")]
    pub sub_steps_per_gradient: usize,
    /// Uniform sample length for pathway selection; an infinite sample
    /// when omitted.
    #[serde(rename = "sample_length_m", default, skip_serializing_if = "Option::is_none")]
    pub sample_length: Option<f64>,
}

fn default_walkers() -> usize {
    100_000
}

fn default_dt() -> f64 {
    1e-4
}

fn default_sub_steps() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitDescriptor {
    #[serde(default)]
    pub method: FitMethod,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_samples: usize,
}

impl Default for FitDescriptor {
    fn default() -> Self {
        Self {
            method: FitMethod::default(),
            bootstrap_samples: default_bootstrap(),
        }
    }
}

fn default_bootstrap() -> usize {
    200
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// High-temperature equilibrium of both channels.
    #[default]
    Thermal,
    /// Pseudopure |0…0>.
    Pseudopure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDescriptor {
    pub system: SystemDescriptor,
    pub sequence: SequenceKind,
    pub timing: TimingDescriptor,
    pub sweep: SweepDescriptor,
    pub diffusion: DiffusionDescriptor,
    #[serde(default)]
    pub fit: FitDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentDescriptor {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::input(format!("invalid JSON: {e}")))?;
        // A run report carries its descriptor under "descriptor".
        let desc = if value.get("descriptor").is_some() {
            from_value_with_path(&value["descriptor"], "descriptor.")?
        } else {
            from_value_with_path(&value, "")?
        };
        desc.validate()?;
        Ok(desc)
    }

    /// Schema-level checks; physics checks happen when the run is built.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.sweep.n_points < 3 {
            return Err(CliError::input(format!(
                "sweep.n_points must be at least 3, got {}",
                self.sweep.n_points
            )));
        }
        if self.diffusion.n_walkers == 0 {
            return Err(CliError::input("diffusion.n_walkers must be at least 1"));
        }
        if self.diffusion.sub_steps_per_gradient < 4 {
            return Err(CliError::input("diffusion.sub_steps_per_gradient must be at least 4"));
        }
        if !(self.diffusion.dt > 0.0) {
            return Err(CliError::input("diffusion.dt_s must be positive"));
        }
        if self.system.n_total == 0 {
            return Err(CliError::input("system.n_total must be at least 1"));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<SpinSystemSpec, CliError> {
        let table = NuclideTable::bundled();
        let nuclide = |d: &NuclideDescriptor, field: &str| -> Result<Nuclide, CliError> {
            let gamma = match d.gamma {
                Some(g) => g,
                None => table.get(&d.label).map(|n| n.gamma).ok_or_else(|| {
                    CliError::input(format!(
                        "system.{field}: unknown nuclide `{}` and no gamma_rad_per_s_per_T given",
                        d.label
                    ))
                })?,
            };
            Nuclide::new(&d.label, gamma).map_err(CliError::physics)
        };
        SpinSystemSpec::new(
            nuclide(&self.system.control, "control")?,
            nuclide(&self.system.target, "target")?,
            self.system.n_total,
            self.system.j_coupling,
            self.system.representation,
        )
        .map_err(CliError::physics)
    }

    /// Gradient-weighted order that the encode gradients act on.
    pub fn q_gamma(&self) -> Result<f64, CliError> {
        let spec = self.spec()?;
        Ok(match self.sequence {
            SequenceKind::Noon => spec.gamma_eff(),
            SequenceKind::SingleQuantum if spec.n_total >= 2 => spec.target.gamma,
            SequenceKind::SingleQuantum => spec.control.gamma,
        })
    }

    pub fn profile(&self) -> SampleProfile {
        match self.diffusion.sample_length {
            Some(length_m) => SampleProfile::Slab { length_m },
            None => SampleProfile::Ideal,
        }
    }

    pub fn diffusion_params(&self, seed: u64) -> DiffusionParams {
        DiffusionParams {
            d_const: self.diffusion.d_true,
            n_walkers: self.diffusion.n_walkers,
            dt: self.diffusion.dt,
            seed,
            sub_steps_per_gradient: self.diffusion.sub_steps_per_gradient,
        }
    }

    pub fn fit_options(&self, seed: u64) -> FitOptions {
        FitOptions {
            method: self.fit.method,
            bootstrap_samples: self.fit.bootstrap_samples,
            seed,
        }
    }
}

fn from_value_with_path(value: &serde_json::Value, prefix: &str) -> Result<ExperimentDescriptor, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::input(format!("{prefix}{path}: {}", e.inner()))
    })
}
