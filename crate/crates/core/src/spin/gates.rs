//! Ideal pulses, free J evolution and the parallel CNOT composite.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::collective::rotation;
use super::state::{Block, BlockKind, StateOperator};
use super::SpinSystemSpec;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    ControlOnly,
    TargetsOnly,
    Both,
}

impl Channel {
    fn hits_control(self) -> bool {
        matches!(self, Channel::ControlOnly | Channel::Both)
    }

    fn hits_targets(self) -> bool {
        matches!(self, Channel::TargetsOnly | Channel::Both)
    }
}

/// Rotation axis in the transverse plane; the pulse phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    #[serde(rename = "-X")]
    NegX,
    #[serde(rename = "-Y")]
    NegY,
}

impl Axis {
    pub fn quarter_turns(self) -> u8 {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::NegX => 2,
            Axis::NegY => 3,
        }
    }

    pub fn from_quarter_turns(q: u8) -> Self {
        match q % 4 {
            0 => Axis::X,
            1 => Axis::Y,
            2 => Axis::NegX,
            _ => Axis::NegY,
        }
    }

    pub fn phase(self) -> f64 {
        self.quarter_turns() as f64 * FRAC_PI_2
    }

    /// Axis advanced by `q` quarter turns of pulse phase.
    pub fn shifted(self, q: u8) -> Self {
        Self::from_quarter_turns(self.quarter_turns() + q)
    }
}

/// exp(-i·angle·(cos φ I_x + sin φ I_y)) on every spin of a channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub channel: Channel,
    pub axis: Axis,
    pub angle: f64,
}

impl Rotation {
    pub fn new(channel: Channel, axis: Axis, angle: f64) -> Self {
        Self {
            channel,
            axis,
            angle,
        }
    }
}

/// One element of a gate-level program.
#[derive(Clone, Debug, PartialEq)]
pub enum GateStep {
    Pulse {
        rotation: Rotation,
        tag: &'static str,
    },
    /// Free evolution under the J coupling for the given number of seconds.
    Free { duration: f64 },
}

fn single_spin(phase: f64, angle: f64) -> [[C64; 2]; 2] {
    let c = C64::new((angle / 2.0).cos(), 0.0);
    let s = (angle / 2.0).sin();
    let mi = C64::new(0.0, -1.0);
    [
        [c, mi * s * C64::from_polar(1.0, -phase)],
        [mi * s * C64::from_polar(1.0, phase), c],
    ]
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Left multiplication of a tensor-basis matrix by a one-qubit gate.
fn left_qubit(m: &mut DMatrix<C64>, mask: usize, u: &[[C64; 2]; 2]) {
    let dim = m.nrows();
    for col in 0..m.ncols() {
        for i in 0..dim {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            let (a, b) = (m[(i, col)], m[(j, col)]);
            m[(i, col)] = u[0][0] * a + u[0][1] * b;
            m[(j, col)] = u[1][0] * a + u[1][1] * b;
        }
    }
}

fn j_energies(block: &Block, spec: &SpinSystemSpec) -> Vec<f64> {
    block
        .labels
        .iter()
        .map(|l| TAU * spec.j_coupling * l.control_mz() * l.target_mz())
        .collect()
}

/// Applies a gate step from the left (M -> U M) to a matrix in `block`'s basis.
pub(crate) fn left_apply(block: &Block, spec: &SpinSystemSpec, m: &mut DMatrix<C64>, step: &GateStep) {
    match step {
        GateStep::Free { duration } => {
            for (r, e) in j_energies(block, spec).into_iter().enumerate() {
                let f = C64::from_polar(1.0, -e * duration);
                m.row_mut(r).iter_mut().for_each(|x| *x *= f);
            }
        }
        GateStep::Pulse { rotation: rot, .. } => match block.kind {
            BlockKind::Collective { j2 } => {
                let u = block_rotation(j2, rot);
                *m = u * &*m;
            }
            BlockKind::Tensor { n_targets } => {
                let u = single_spin(rot.axis.phase(), rot.angle);
                if rot.channel.hits_control() {
                    left_qubit(m, 1 << n_targets, &u);
                }
                if rot.channel.hits_targets() {
                    for b in 0..n_targets {
                        left_qubit(m, 1 << b, &u);
                    }
                }
            }
        },
    }
}

fn block_rotation(j2: u32, rot: &Rotation) -> DMatrix<C64> {
    let phase = rot.axis.phase();
    let uc = if rot.channel.hits_control() {
        rotation(1, phase, rot.angle)
    } else {
        DMatrix::identity(2, 2)
    };
    let ut = if rot.channel.hits_targets() {
        rotation(j2, phase, rot.angle)
    } else {
        DMatrix::identity(j2 as usize + 1, j2 as usize + 1)
    };
    kron(&uc, &ut)
}

/// ρ -> U ρ U† for one step, block by block.
pub(crate) fn apply_step(state: &mut StateOperator, step: &GateStep) {
    let spec = state.spec().clone();
    for block in state.blocks_mut() {
        match (step, block.kind) {
            (GateStep::Free { duration }, _) => {
                let e = j_energies(block, &spec);
                let dim = block.dim();
                for r in 0..dim {
                    for c in 0..dim {
                        if r != c {
                            block.matrix[(r, c)] *= C64::from_polar(1.0, -(e[r] - e[c]) * duration);
                        }
                    }
                }
            }
            (GateStep::Pulse { rotation: rot, .. }, BlockKind::Collective { j2 }) => {
                let u = block_rotation(j2, rot);
                block.matrix = &u * &block.matrix * u.adjoint();
            }
            (GateStep::Pulse { .. }, BlockKind::Tensor { .. }) => {
                let mut m = block.matrix.clone();
                left_apply(block, &spec, &mut m, step);
                let mut t = m.adjoint();
                left_apply(block, &spec, &mut t, step);
                block.matrix = t.adjoint();
            }
        }
    }
}

/// Product of single-spin rotations on the named channel. In the collective
/// representation the targets rotate through their total-spin operators.
pub fn collective_rotation(
    state: &StateOperator,
    channel: Channel,
    axis: Axis,
    angle: f64,
) -> StateOperator {
    let mut out = state.clone();
    apply_step(
        &mut out,
        &GateStep::Pulse {
            rotation: Rotation::new(channel, axis, angle),
            tag: "",
        },
    );
    out
}

/// Evolution under H_J = 2πJ I_z^A Σ I_z^M for `duration` seconds.
pub fn j_evolution(state: &StateOperator, duration: f64) -> Result<StateOperator> {
    if !(duration >= 0.0) {
        return Err(Error::Domain(format!(
            "evolution time must be non-negative, got {duration}"
        )));
    }
    let mut out = state.clone();
    apply_step(&mut out, &GateStep::Free { duration });
    Ok(out)
}

/// Ideal z rotation of a channel built from transverse pulses:
/// X̄, Y(θ), X in time order.
pub fn z_rotation_steps(channel: Channel, angle: f64, tag: &'static str) -> Vec<GateStep> {
    vec![
        GateStep::Pulse {
            rotation: Rotation::new(channel, Axis::NegX, FRAC_PI_2),
            tag,
        },
        GateStep::Pulse {
            rotation: Rotation::new(channel, Axis::Y, angle),
            tag,
        },
        GateStep::Pulse {
            rotation: Rotation::new(channel, Axis::X, FRAC_PI_2),
            tag,
        },
    ]
}

/// Residual control phase of the bare composite for N spins is
/// exp(i(N-2)π/2) on |1>; the correction rotates it away. Zero whenever
/// N ≡ 2 (mod 4).
pub fn cnot_correction_angle(n_total: usize) -> f64 {
    let quarter = (4 - (n_total + 2) % 4) % 4;
    quarter as f64 * FRAC_PI_2
}

/// Time-ordered steps of the parallel CNOT (control A, all M targets):
/// X̄_M, Ȳ_M, Y_A, X̄_A, Ȳ_A, τ, Y²_{A,M}, τ, Ȳ_M, Y²_A with τ = 1/(4J),
/// followed by a control phase correction when N ≢ 2 (mod 4).
pub fn cnot_steps(spec: &SpinSystemSpec) -> Result<Vec<GateStep>> {
    if spec.n_total < 2 {
        return Err(Error::InvalidSystem(
            "CNOT needs at least one target spin".into(),
        ));
    }
    let tau = 1.0 / (4.0 * spec.j_coupling);
    let pulse = |channel, axis, angle, tag| GateStep::Pulse {
        rotation: Rotation::new(channel, axis, angle),
        tag,
    };
    use Axis::*;
    use Channel::*;
    let mut steps = vec![
        pulse(TargetsOnly, NegX, FRAC_PI_2, "xbar_m"),
        pulse(TargetsOnly, NegY, FRAC_PI_2, "ybar_m"),
        pulse(ControlOnly, Y, FRAC_PI_2, "y_a"),
        pulse(ControlOnly, NegX, FRAC_PI_2, "xbar_a"),
        pulse(ControlOnly, NegY, FRAC_PI_2, "ybar_a"),
        GateStep::Free { duration: tau },
        pulse(Both, Y, PI, "y2_am"),
        GateStep::Free { duration: tau },
        pulse(TargetsOnly, NegY, FRAC_PI_2, "ybar_m_2"),
        pulse(ControlOnly, Y, PI, "y2_a"),
    ];
    let corr = cnot_correction_angle(spec.n_total);
    if corr != 0.0 {
        steps.extend(z_rotation_steps(ControlOnly, corr, "zcorr_a"));
    }
    Ok(steps)
}

/// Applies the parallel CNOT composite to a state.
pub fn cnot_parallel(state: &StateOperator) -> Result<StateOperator> {
    let steps = cnot_steps(state.spec())?;
    let mut out = state.clone();
    for s in &steps {
        apply_step(&mut out, s);
    }
    Ok(out)
}

/// Unitary of a step program on the primary block basis.
#[cfg(test)]
pub(crate) fn program_unitary(spec: &SpinSystemSpec, steps: &[GateStep]) -> DMatrix<C64> {
    let probe = StateOperator::zeros(spec);
    let block = &probe.blocks()[0];
    let mut u = DMatrix::<C64>::identity(block.dim(), block.dim());
    for s in steps {
        left_apply(block, spec, &mut u, s);
    }
    u
}
