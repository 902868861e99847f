use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::descriptor::{ExperimentDescriptor, InitialState, SequenceKind};
use super::io::{read_curve_csv, write_curve_csv, write_dat, write_text};
use super::{CliError, Mode};
use crate::diffusion::{linear_sweep, DiffusionModel, SampleProfile};
use crate::estimator::{
    equivalent_parameters, fit_diffusion, goodness_report, stokes_einstein, AttenuationCurve, CurvePoint,
    EchoParameters, EquivalentParameters, FitMethod, FitOptions, FitResult, GoodnessReport, StokesEinsteinInput,
};
use crate::sequence::{
    build_hahn_echo, build_noon_diffusion, execute_sweep, expand_pathways, selected_state, DiffusionTiming,
    PulseSequence,
};
use crate::spin::{
    collective_rotation, make_pseudopure, stick_spectrum, thermal_state, Axis, Channel, Polarization, SpectrumLine,
    SpinSystemSpec, StateOperator,
};
use crate::{Error, C64};

/// G₂ used when the descriptor leaves it out, T/m.
const DEFAULT_G2: f64 = 0.01;
/// Deviation of the most polarised channel in thermal starting states.
const THERMAL_EPSILON: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub mode: Mode,
    /// Seconds since the epoch, from SOURCE_DATE_EPOCH; null otherwise so
    /// that reruns stay byte-identical.
    pub timestamp: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Input descriptor with the seed and mode actually used.
    pub descriptor: ExperimentDescriptor,
    pub curve: AttenuationCurve,
    pub fit: FitResult,
    pub goodness: GoodnessReport,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveComparison {
    #[serde(rename = "g_T_per_m")]
    pub g: f64,
    pub s_noon: f64,
    /// Single-quantum echo at l·G.
    pub s_sq_scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LScalingCheck {
    pub lopsidedness: f64,
    pub max_abs_difference: f64,
    pub points: Vec<CurveComparison>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub first: RunReport,
    pub second: RunReport,
    /// |D₁ - D₂| / D₁.
    pub relative_difference: f64,
    #[serde(rename = "combined_sigma_m2_per_s")]
    pub combined_sigma: f64,
    /// Within 2% in analytic mode, within 3 combined σ in Monte Carlo mode.
    pub agree: bool,
    pub l_scaling: Option<LScalingCheck>,
    pub equivalent_parameters: EquivalentParameters,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumStage {
    /// π/2 on the control from thermal equilibrium.
    Thermal,
    /// Control signal after the decoding CNOT, pathway-selected.
    AfterNoonDecode,
}

pub(super) enum TimingSource {
    Descriptor(PathBuf),
    Flags {
        little_delta: f64,
        big_delta: f64,
        q_gamma: f64,
    },
}

fn timestamp() -> Option<u64> {
    std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()
}

fn resolve_seed(flag: Option<u64>, desc: &ExperimentDescriptor) -> Result<u64, CliError> {
    flag.or(desc.seed)
        .ok_or_else(|| CliError::input("seed: missing; set `seed` in the descriptor or pass --seed"))
}

fn timing(desc: &ExperimentDescriptor, spec: &SpinSystemSpec, g1: f64) -> DiffusionTiming {
    let mut t = DiffusionTiming::new(desc.timing.big_delta_s, desc.timing.little_delta_s, g1);
    if desc.sequence == SequenceKind::Noon {
        t = t.with_selection(spec, desc.timing.g2.unwrap_or(DEFAULT_G2));
        if let Some(g3) = desc.timing.g3 {
            t.g3 = g3;
        }
    }
    t
}

fn build_sequence(desc: &ExperimentDescriptor, spec: &SpinSystemSpec, g1: f64) -> Result<PulseSequence, CliError> {
    let t = timing(desc, spec, g1);
    Ok(match desc.sequence {
        SequenceKind::SingleQuantum => build_hahn_echo(spec, &t)?,
        SequenceKind::Noon => build_noon_diffusion(spec, &t)?,
    })
}

fn initial_state(kind: InitialState, spec: &SpinSystemSpec) -> Result<StateOperator, CliError> {
    Ok(match kind {
        InitialState::Thermal => thermal_state(spec, thermal_polarization(spec))?,
        InitialState::Pseudopure => make_pseudopure(spec, &StateOperator::ket(spec, 0, 0), THERMAL_EPSILON)?,
    })
}

fn thermal_polarization(spec: &SpinSystemSpec) -> Polarization {
    let reference = spec.control.gamma.abs().max(spec.target.gamma.abs());
    Polarization::equilibrium(spec, THERMAL_EPSILON, reference)
}

fn model(desc: &ExperimentDescriptor, mode: Mode, seed: u64, profile: SampleProfile) -> DiffusionModel {
    match mode {
        Mode::Analytic => DiffusionModel::analytic(desc.diffusion.d_true),
        Mode::Mc => DiffusionModel::monte_carlo(desc.diffusion_params(seed)),
    }
    .with_profile(profile)
}

/// Runs the gradient sweep of a descriptor and fits it. `mode` and `seed`
/// override the descriptor.
pub fn simulate(desc: &ExperimentDescriptor, mode: Option<Mode>, seed: Option<u64>) -> Result<RunReport, CliError> {
    desc.validate()?;
    let seed = resolve_seed(seed, desc)?;
    let mode = mode.or(desc.mode).unwrap_or_default();
    let spec = desc.spec()?;
    let g_max = desc.sweep.g_max;
    let seq = build_sequence(desc, &spec, g_max)?;
    if !(g_max > 0.0) {
        return Err(Error::InvalidCurve(format!(
            "the sweep needs distinct gradient values; g_max_T_per_m = {g_max} repeats G = 0"
        ))
        .into());
    }
    let m = model(desc, mode, seed, desc.profile());
    m.validate()?;
    let rho0 = initial_state(desc.initial_state, &spec)?;
    let g_list = linear_sweep(g_max, desc.sweep.n_points);
    let results = execute_sweep(&seq, &rho0, &m, &g_list)?;
    let curve = AttenuationCurve {
        points: g_list
            .iter()
            .zip(&results)
            .map(|(&g, r)| CurvePoint {
                g,
                s: r.signal.norm(),
                sigma: r.stderr,
            })
            .collect(),
        little_delta: desc.timing.little_delta_s,
        big_delta: desc.timing.big_delta_s,
        q_gamma: desc.q_gamma()?,
    };
    curve.validate()?;
    let fit = checked_fit(&curve, &desc.fit_options(seed))?;
    let goodness = goodness_report(&curve, &fit);
    let mut echo = desc.clone();
    echo.seed = Some(seed);
    echo.mode = Some(mode);
    Ok(RunReport {
        descriptor: echo,
        curve,
        fit,
        goodness,
        provenance: Provenance {
            tool: "noondiff".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            mode,
            timestamp: timestamp(),
        },
    })
}

fn checked_fit(curve: &AttenuationCurve, options: &FitOptions) -> Result<FitResult, CliError> {
    let fit = fit_diffusion(curve, options)?;
    if fit.degenerate {
        return Err(Error::DegenerateCurve(
            "the curve shows no resolvable attenuation; D cannot be estimated".into(),
        )
        .into());
    }
    Ok(fit)
}

/// Fits a curve CSV with the given timing and gradient-weighted order.
pub fn fit_csv(
    path: &Path,
    little_delta: f64,
    big_delta: f64,
    q_gamma: f64,
    options: &FitOptions,
) -> Result<(AttenuationCurve, FitResult), CliError> {
    let curve = read_curve_csv(path)?.into_curve(little_delta, big_delta, q_gamma);
    curve.validate()?;
    let fit = checked_fit(&curve, options)?;
    Ok((curve, fit))
}

fn display_d(label: &str, d: f64, sigma: f64) -> String {
    format!(
        "{label}D = {d:.6e} ± {sigma:.2e} m^2/s = ({:.4} ± {:.4}) x 10^-10 m^2/s",
        d * 1e10,
        sigma * 1e10
    )
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))
}

fn curve_rows(curve: &AttenuationCurve) -> Vec<(f64, f64)> {
    curve.points.iter().map(|p| (p.g, p.s)).collect()
}

pub(super) fn cmd_simulate(
    descriptor: &Path,
    output: &Path,
    mode: Option<Mode>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let desc = ExperimentDescriptor::load(descriptor)?;
    let report = simulate(&desc, mode, seed)?;
    ensure_dir(output)?;
    write_curve_csv(&output.join("curve.csv"), &report.curve)?;
    write_dat(&output.join("curve.dat"), "g_T_per_m s_norm", &curve_rows(&report.curve))?;
    write_text(&output.join("report.json"), &to_json(&report))?;
    println!("{}", display_d("", report.fit.d_fit, report.fit.d_sigma));
    if report.goodness.structured {
        println!("warning: residuals show structure; the single-exponential model may not fit");
    }
    Ok(())
}

pub(super) fn cmd_fit(
    csv: &Path,
    source: TimingSource,
    method: Option<FitMethod>,
    bootstrap: Option<usize>,
    seed: Option<u64>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let (little_delta, big_delta, q_gamma, options) = match source {
        TimingSource::Descriptor(path) => {
            let desc = ExperimentDescriptor::load(&path)?;
            let bootstrap_samples = bootstrap.unwrap_or(desc.fit.bootstrap_samples);
            let seed = if bootstrap_samples > 0 {
                resolve_seed(seed, &desc)?
            } else {
                seed.or(desc.seed).unwrap_or(0)
            };
            let options = FitOptions {
                method: method.unwrap_or(desc.fit.method),
                bootstrap_samples,
                seed,
            };
            (desc.timing.little_delta_s, desc.timing.big_delta_s, desc.q_gamma()?, options)
        }
        TimingSource::Flags {
            little_delta,
            big_delta,
            q_gamma,
        } => {
            let bootstrap_samples = bootstrap.unwrap_or(200);
            let seed = match (seed, bootstrap_samples) {
                (Some(s), _) => s,
                (None, 0) => 0,
                (None, _) => return Err(CliError::input("--seed is required when bootstrapping")),
            };
            let options = FitOptions {
                method: method.unwrap_or_default(),
                bootstrap_samples,
                seed,
            };
            (little_delta, big_delta, q_gamma, options)
        }
    };
    let (_, fit) = fit_csv(csv, little_delta, big_delta, q_gamma, &options)?;
    println!("{}", display_d("", fit.d_fit, fit.d_sigma));
    match output {
        Some(dir) => {
            ensure_dir(dir)?;
            write_text(&dir.join("fit.json"), &to_json(&fit))?;
        }
        None => print!("{}", to_json(&fit)),
    }
    Ok(())
}

/// Analytic NOON curve against the single-quantum echo of the targets at
/// l·G, both on the NOON descriptor's system and timing.
fn l_scaling(desc: &ExperimentDescriptor) -> Result<LScalingCheck, CliError> {
    let spec = desc.spec()?;
    let l = spec.lopsidedness(&spec.target);
    let noon = expand_pathways(&build_sequence(desc, &spec, 0.0)?, &initial_state(desc.initial_state, &spec)?)?;
    let sq_seq = build_hahn_echo(&spec, &DiffusionTiming::new(desc.timing.big_delta_s, desc.timing.little_delta_s, 0.0))?;
    let sq = expand_pathways(&sq_seq, &initial_state(InitialState::Thermal, &spec)?)?;
    let m = DiffusionModel::analytic(desc.diffusion.d_true);
    let mut points = Vec::new();
    let mut max_abs_difference: f64 = 0.0;
    for g in linear_sweep(desc.sweep.g_max, desc.sweep.n_points) {
        let a = noon.evaluate(&m, Some(g), 0)?.signal;
        let b = sq.evaluate(&m, Some(l * g), 0)?.signal;
        max_abs_difference = max_abs_difference.max((a - b).norm());
        points.push(CurveComparison {
            g,
            s_noon: a.norm(),
            s_sq_scaled: b.norm(),
        });
    }
    Ok(LScalingCheck {
        lopsidedness: l,
        max_abs_difference,
        points,
    })
}

/// Runs and fits both descriptors, then checks the agreement of D, the
/// l-scaling identity and the equivalent single-quantum parameters.
pub fn compare(
    first: &ExperimentDescriptor,
    second: &ExperimentDescriptor,
    mode: Option<Mode>,
    seed: Option<u64>,
) -> Result<CompareReport, CliError> {
    if first.diffusion.d_true != second.diffusion.d_true {
        return Err(CliError::input(format!(
            "diffusion.d_true_m2_per_s differs between the descriptors ({:e} vs {:e})",
            first.diffusion.d_true, second.diffusion.d_true
        )));
    }
    let a = simulate(first, mode, seed)?;
    let b = simulate(second, mode, seed)?;
    let (da, db) = (a.fit.d_fit, b.fit.d_fit);
    let relative_difference = (da - db).abs() / da.abs();
    let combined_sigma = a.fit.d_sigma.hypot(b.fit.d_sigma);
    let mc = a.provenance.mode == Mode::Mc || b.provenance.mode == Mode::Mc;
    let agree = if mc {
        (da - db).abs() <= 3.0 * combined_sigma
    } else {
        relative_difference < 0.02
    };
    let noon = [first, second].into_iter().find(|d| d.sequence == SequenceKind::Noon);
    let sq = [first, second]
        .into_iter()
        .find(|d| d.sequence == SequenceKind::SingleQuantum)
        .unwrap_or(first);
    let l_scaling = noon.map(l_scaling).transpose()?;
    let l_desc = noon.unwrap_or(first);
    let l_spec = l_desc.spec()?;
    let equivalent_parameters = equivalent_parameters(
        l_spec.lopsidedness(&l_spec.target),
        EchoParameters {
            g: sq.sweep.g_max,
            little_delta: sq.timing.little_delta_s,
            big_delta: sq.timing.big_delta_s,
        },
    )?;
    Ok(CompareReport {
        first: a,
        second: b,
        relative_difference,
        combined_sigma,
        agree,
        l_scaling,
        equivalent_parameters,
    })
}

pub(super) fn cmd_compare(
    first: &Path,
    second: &Path,
    output: Option<&Path>,
    mode: Option<Mode>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let a = ExperimentDescriptor::load(first)?;
    let b = ExperimentDescriptor::load(second)?;
    let report = compare(&a, &b, mode, seed)?;
    println!("{}", display_d("first:  ", report.first.fit.d_fit, report.first.fit.d_sigma));
    println!("{}", display_d("second: ", report.second.fit.d_fit, report.second.fit.d_sigma));
    println!(
        "relative difference {:.3e} ({})",
        report.relative_difference,
        if report.agree { "agree" } else { "disagree" }
    );
    if let Some(l) = &report.l_scaling {
        println!(
            "l = {:.4}: max |S_noon(G) - S_sq(l G)| = {:.3e}",
            l.lopsidedness, l.max_abs_difference
        );
    }
    println!(
        "same attenuation with Δ shortened {:.2}x (Δ - δ/3 shortened {:.2}x)",
        report.equivalent_parameters.delay_reduction, report.equivalent_parameters.diffusion_time_reduction
    );
    match output {
        Some(dir) => {
            ensure_dir(dir)?;
            write_text(&dir.join("compare.json"), &to_json(&report))?;
            write_dat(&dir.join("first.dat"), "g_T_per_m s_norm", &curve_rows(&report.first.curve))?;
            write_dat(&dir.join("second.dat"), "g_T_per_m s_norm", &curve_rows(&report.second.curve))?;
            if let Some(l) = &report.l_scaling {
                let rows: Vec<(f64, f64)> = l.points.iter().map(|p| (l.lopsidedness * p.g, p.s_noon)).collect();
                write_dat(&dir.join("noon_scaled.dat"), "l*g_T_per_m s_noon", &rows)?;
            }
        }
        None => print!("{}", to_json(&report)),
    }
    Ok(())
}

/// Stick spectrum of the control channel, zero-order phased so that the
/// strongest line is real and positive.
pub fn spectrum(desc: &ExperimentDescriptor, stage: SpectrumStage) -> Result<Vec<SpectrumLine>, CliError> {
    let spec = desc.spec()?;
    let state = match stage {
        SpectrumStage::Thermal => {
            let rho = thermal_state(&spec, thermal_polarization(&spec))?;
            collective_rotation(&rho, Channel::ControlOnly, Axis::Y, FRAC_PI_2)
        }
        SpectrumStage::AfterNoonDecode => {
            if spec.n_total < 2 {
                return Err(Error::InvalidSystem("the NOON sequence needs at least one target spin".into()).into());
            }
            let mut noon = desc.clone();
            noon.sequence = SequenceKind::Noon;
            let seq = build_sequence(&noon, &spec, 0.0)?;
            let rho0 = initial_state(desc.initial_state, &spec)?;
            let m = DiffusionModel::analytic(desc.diffusion.d_true).with_profile(desc.profile());
            selected_state(&seq, &rho0, &m)?
        }
    };
    let mut lines = stick_spectrum(&state, &spec.control)?;
    let phase = lines
        .iter()
        .map(|l| l.amplitude)
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .filter(|a| a.norm() > 0.0)
        .map(|a| a.conj() / a.norm())
        .unwrap_or(C64::new(1.0, 0.0));
    for l in &mut lines {
        l.amplitude *= phase;
    }
    Ok(lines)
}

pub(super) fn cmd_spectrum(descriptor: &Path, stage: SpectrumStage, output: Option<&Path>) -> Result<(), CliError> {
    let desc = ExperimentDescriptor::load(descriptor)?;
    let lines = spectrum(&desc, stage)?;
    let mut text = String::from("offset_Hz,intensity\n");
    for l in &lines {
        text.push_str(&format!("{},{:e}\n", l.offset_hz, l.amplitude.re));
    }
    match output {
        Some(dir) => {
            ensure_dir(dir)?;
            write_text(&dir.join("spectrum.csv"), &text)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub(super) fn cmd_stokes(temperature: f64, viscosity: f64, radius: f64) -> Result<(), CliError> {
    for (name, v) in [("--temperature", temperature), ("--viscosity", viscosity), ("--radius", radius)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(CliError::input(format!("{name} must be positive, got {v}")));
        }
    }
    let d = stokes_einstein(&StokesEinsteinInput::new(temperature, viscosity, radius))?;
    println!("D = {d:.6e} m^2/s = {:.4} x 10^-10 m^2/s", d * 1e10);
    Ok(())
}
