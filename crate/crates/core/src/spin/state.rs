use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::collective::{j_plus, multiplet_embeddings, multiplet_multiplicity, target_multiplets};
use super::{Representation, SpinSystemSpec, FULL_TENSOR_MAX_SPINS};
use crate::{Error, Result, C64};

/// Quantum numbers of one basis state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Label {
    /// 0 for the control in |0> (m = +1/2), 1 for |1>.
    pub control: u8,
    /// Total number of flipped target spins.
    pub flips: u32,
    /// Twice the total target J_z.
    pub target_m2: i32,
}

impl Label {
    /// Control I_z eigenvalue.
    pub fn control_mz(&self) -> f64 {
        0.5 - self.control as f64
    }

    pub fn target_mz(&self) -> f64 {
        self.target_m2 as f64 / 2.0
    }

    /// Total flipped-spin count, control included.
    pub fn total_flips(&self) -> i32 {
        self.control as i32 + self.flips as i32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// One target multiplet of total spin j2/2, index = control*(j2+1) + m.
    Collective { j2: u32 },
    /// Full product basis, index = control*2^n + target bits.
    Tensor { n_targets: usize },
}

/// An invariant subspace of the collective dynamics together with the number
/// of identical copies it stands for.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub kind: BlockKind,
    pub multiplicity: f64,
    pub labels: Vec<Label>,
    pub matrix: DMatrix<C64>,
}

impl Block {
    fn empty(kind: BlockKind, multiplicity: f64, n_targets: usize) -> Self {
        let labels: Vec<Label> = match kind {
            BlockKind::Collective { j2 } => {
                let offset = (n_targets as u32 - j2) / 2;
                (0..2u8)
                    .flat_map(|a| {
                        (0..=j2).map(move |m| Label {
                            control: a,
                            flips: offset + m,
                            target_m2: j2 as i32 - 2 * m as i32,
                        })
                    })
                    .collect()
            }
            BlockKind::Tensor { n_targets } => (0..2u8)
                .flat_map(|a| {
                    (0..1usize << n_targets).map(move |t| Label {
                        control: a,
                        flips: t.count_ones(),
                        target_m2: n_targets as i32 - 2 * t.count_ones() as i32,
                    })
                })
                .collect(),
        };
        let dim = labels.len();
        Self {
            kind,
            multiplicity,
            labels,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Nonzero entries (col, row, value) of a detection operator D such that
    /// the block's contribution to Tr(ρD) is Σ value·ρ[row, col].
    pub fn detection_entries(&self, channel: DetectChannel) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        match (self.kind, channel) {
            (BlockKind::Collective { j2 }, DetectChannel::Control) => {
                let half = j2 as usize + 1;
                for m in 0..half {
                    out.push((m, half + m, 1.0));
                }
            }
            (BlockKind::Collective { j2 }, DetectChannel::Targets) => {
                let half = j2 as usize + 1;
                let jp = j_plus(j2);
                for a in 0..2 {
                    for m in 1..half {
                        out.push((a * half + m - 1, a * half + m, jp[(m - 1, m)]));
                    }
                }
            }
            (BlockKind::Tensor { n_targets }, DetectChannel::Control) => {
                let half = 1usize << n_targets;
                for t in 0..half {
                    out.push((t, half + t, 1.0));
                }
            }
            (BlockKind::Tensor { n_targets }, DetectChannel::Targets) => {
                let half = 1usize << n_targets;
                for a in 0..2 {
                    for t in 0..half {
                        for b in 0..n_targets {
                            if t & (1 << b) != 0 {
                                out.push((a * half + (t & !(1 << b)), a * half + t, 1.0));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Receiver channel: raising operator I+ summed over the channel's spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectChannel {
    Control,
    Targets,
}

/// Density operator of an AM_{N-1} system.
///
/// In the Dicke representation the operator is block diagonal over target
/// multiplets; the symmetric multiplet (first block) carries the 2N-state
/// |a>|m> basis and every block is weighted by its degeneracy. In the full
/// representation there is a single 2^N block.
#[derive(Clone, Debug, PartialEq)]
pub struct StateOperator {
    spec: SpinSystemSpec,
    blocks: Vec<Block>,
}

impl StateOperator {
    /// All-zero operator with the block layout of `spec`.
    pub fn zeros(spec: &SpinSystemSpec) -> Self {
        let n = spec.n_targets();
        let blocks = match spec.representation {
            Representation::DickeSubspace => target_multiplets(n)
                .into_iter()
                .map(|j2| {
                    Block::empty(
                        BlockKind::Collective { j2 },
                        multiplet_multiplicity(n, j2) as f64,
                        n,
                    )
                })
                .collect(),
            Representation::FullTensor => {
                vec![Block::empty(BlockKind::Tensor { n_targets: n }, 1.0, n)]
            }
        };
        Self {
            spec: spec.clone(),
            blocks,
        }
    }

    pub fn maximally_mixed(spec: &SpinSystemSpec) -> Self {
        let mut out = Self::zeros(spec);
        let v = 0.5f64.powi(spec.n_total as i32);
        for b in &mut out.blocks {
            b.matrix.fill_with_identity();
            b.matrix *= C64::new(v, 0.0);
        }
        out
    }

    pub fn spec(&self) -> &SpinSystemSpec {
        &self.spec
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [Block] {
        &mut self.blocks
    }

    /// Dimension of the basis the primary (symmetric) block spans.
    pub fn primary_dim(&self) -> usize {
        self.blocks[0].dim()
    }

    /// Basis ket |a> ⊗ |m flipped targets> of the symmetric subspace,
    /// expressed in the primary block's basis.
    pub fn ket(spec: &SpinSystemSpec, control: u8, flips: usize) -> DVector<C64> {
        let n = spec.n_targets();
        assert!(control < 2 && flips <= n, "ket out of range");
        match spec.representation {
            Representation::DickeSubspace => {
                let mut v = DVector::zeros(2 * (n + 1));
                v[control as usize * (n + 1) + flips] = C64::new(1.0, 0.0);
                v
            }
            Representation::FullTensor => {
                let half = 1usize << n;
                let mut v = DVector::zeros(2 * half);
                let members: Vec<usize> =
                    (0..half).filter(|t| t.count_ones() as usize == flips).collect();
                let amp = 1.0 / (members.len() as f64).sqrt();
                for t in members {
                    v[control as usize * half + t] = C64::new(amp, 0.0);
                }
                v
            }
        }
    }

    /// (|0…0> + |1…1>)/√2.
    pub fn noon_ket(spec: &SpinSystemSpec) -> DVector<C64> {
        let n = spec.n_targets();
        (Self::ket(spec, 0, 0) + Self::ket(spec, 1, n)) * C64::new(0.5f64.sqrt(), 0.0)
    }

    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .map(|b| b.matrix.trace() * b.multiplicity)
            .sum()
    }

    /// Largest |ρ - ρ†| entry.
    pub fn hermiticity_error(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (&b.matrix - b.matrix.adjoint()).camax())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues with their degeneracy weight, sorted ascending.
    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .blocks
            .iter()
            .flat_map(|b| {
                let herm = (&b.matrix + b.matrix.adjoint()) * C64::new(0.5, 0.0);
                let eig = SymmetricEigen::new(herm);
                let mult = b.multiplicity;
                eig.eigenvalues.iter().map(move |&e| (e, mult)).collect::<Vec<_>>()
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().map(|e| e.0).unwrap_or(0.0)
    }

    /// Squared Frobenius norm of the equivalent full-space operator.
    pub fn frobenius_sq(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.multiplicity * b.matrix.norm_squared())
            .sum()
    }

    /// Frobenius distance between two states of the same layout.
    pub fn distance(&self, other: &StateOperator) -> f64 {
        assert!(self.same_layout(other), "distance between different layouts");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.multiplicity * (&a.matrix - &b.matrix).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn same_layout(&self, other: &StateOperator) -> bool {
        self.spec.same_layout(&other.spec)
    }

    /// Traceless part ρ - Tr(ρ)/2^N · 1.
    pub fn deviation(&self) -> StateOperator {
        let shift = self.trace() * 0.5f64.powi(self.spec.n_total as i32);
        let mut out = self.clone();
        for b in &mut out.blocks {
            for i in 0..b.dim() {
                b.matrix[(i, i)] -= shift;
            }
        }
        out
    }

    /// <ψ|ρ|ψ> for a ket in the primary block basis.
    pub fn expectation(&self, psi: &DVector<C64>) -> C64 {
        let m = &self.blocks[0].matrix;
        assert_eq!(psi.len(), m.nrows(), "ket dimension mismatch");
        (psi.adjoint() * m * psi)[(0, 0)]
    }

    /// Overlap |<ψ|φ>|² of the state with ψ, where the state is taken to be
    /// a pseudopure mixture of the identity and a pure φ of unknown purity.
    /// Equals <ψ|ρ|ψ> for ε = 1.
    pub fn pseudopure_fidelity(&self, psi: &DVector<C64>) -> f64 {
        let dev = self.deviation();
        let d = 2f64.powi(self.spec.n_total as i32);
        let eps = (dev.frobenius_sq() / (1.0 - 1.0 / d)).sqrt();
        if eps == 0.0 {
            return 1.0 / d;
        }
        dev.expectation(psi).re / eps + 1.0 / d
    }

    /// Tr(ρ · Σ I+) over the channel's spins.
    pub fn detect(&self, channel: DetectChannel) -> C64 {
        self.blocks
            .iter()
            .map(|b| {
                b.detection_entries(channel)
                    .into_iter()
                    .map(|(c, r, v)| b.matrix[(r, c)] * v)
                    .sum::<C64>()
                    * b.multiplicity
            })
            .sum()
    }

    /// The equivalent operator on the 2^N product space (control most
    /// significant bit). Limited to the full-tensor size guard.
    pub fn to_full(&self) -> Result<DMatrix<C64>> {
        let n = self.spec.n_targets();
        if self.spec.n_total > FULL_TENSOR_MAX_SPINS {
            return Err(Error::InvalidSystem(format!(
                "cannot expand {} spins into the full basis",
                self.spec.n_total
            )));
        }
        let half = 1usize << n;
        let mut out = DMatrix::<C64>::zeros(2 * half, 2 * half);
        for b in &self.blocks {
            match b.kind {
                BlockKind::Tensor { .. } => out += &b.matrix,
                BlockKind::Collective { j2 } => {
                    let sub = j2 as usize + 1;
                    for emb in multiplet_embeddings(n, j2) {
                        // V = |a> ⊗ emb, ρ_full += V ρ_block V†
                        let mut v = DMatrix::<C64>::zeros(2 * half, 2 * sub);
                        for a in 0..2 {
                            for m in 0..sub {
                                for t in 0..half {
                                    v[(a * half + t, a * sub + m)] =
                                        C64::new(emb[(t, m)], 0.0);
                                }
                            }
                        }
                        out += &v * &b.matrix * v.adjoint();
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Polarisation deviations of the control and target channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polarization {
    pub control: f64,
    pub target: f64,
}

impl Polarization {
    /// High-temperature equilibrium: deviations proportional to γ, scaled so
    /// that a nucleus with γ = `reference_gamma` has deviation `epsilon`.
    pub fn equilibrium(spec: &SpinSystemSpec, epsilon: f64, reference_gamma: f64) -> Self {
        Self {
            control: epsilon * spec.control.gamma / reference_gamma,
            target: epsilon * spec.target.gamma / reference_gamma,
        }
    }

    /// Polarisation transfer from the targets to the control: the control
    /// deviation is scaled by |γ_M/γ_A|.
    pub fn inept(self, spec: &SpinSystemSpec) -> Self {
        Self {
            control: self.control * (spec.target.gamma / spec.control.gamma).abs(),
            target: self.target,
        }
    }
}

/// 1/2^N + ε_A I_z^A + ε_M Σ I_z^M.
pub fn thermal_state(spec: &SpinSystemSpec, pol: Polarization) -> Result<StateOperator> {
    for (name, eps) in [("control", pol.control), ("target", pol.target)] {
        if !eps.is_finite() || eps.abs() > 1e-3 {
            return Err(Error::Domain(format!(
                "{name} polarisation {eps} outside the high-temperature range |ε| <= 1e-3"
            )));
        }
    }
    let mut out = StateOperator::zeros(spec);
    let base = 0.5f64.powi(spec.n_total as i32);
    for b in &mut out.blocks {
        for (i, l) in b.labels.iter().enumerate() {
            let v = base + pol.control * l.control_mz() + pol.target * l.target_mz();
            b.matrix[(i, i)] = C64::new(v, 0.0);
        }
    }
    Ok(out)
}

/// (1-ε)/2^N · 1 + ε|ψ><ψ| with ψ given in the primary block basis.
pub fn make_pseudopure(
    spec: &SpinSystemSpec,
    psi: &DVector<C64>,
    epsilon: f64,
) -> Result<StateOperator> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!(
            "purity ε must lie in [0, 1], got {epsilon}"
        )));
    }
    let mut out = StateOperator::maximally_mixed(spec);
    let dim = out.primary_dim();
    if psi.len() != dim {
        return Err(Error::Domain(format!(
            "ket has dimension {}, expected {dim}",
            psi.len()
        )));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("ket is not normalised (norm {norm})")));
    }
    for b in &mut out.blocks {
        b.matrix *= C64::new(1.0 - epsilon, 0.0);
    }
    out.blocks[0].matrix += psi * psi.adjoint() * C64::new(epsilon, 0.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::Nuclide;

    fn spec(n: usize, rep: Representation) -> SpinSystemSpec {
        SpinSystemSpec::new(Nuclide::phosphorus(), Nuclide::proton(), n, 11.0, rep).unwrap()
    }

    #[test]
    fn pseudopure_limits() {
        for rep in [Representation::DickeSubspace, Representation::FullTensor] {
            let s = spec(3, rep);
            let psi = StateOperator::ket(&s, 0, 0);
            let pure = make_pseudopure(&s, &psi, 1.0).unwrap();
            assert!((pure.expectation(&psi).re - 1.0).abs() < 1e-14);
            assert!((pure.trace().re - 1.0).abs() < 1e-14);
            let mixed = make_pseudopure(&s, &psi, 0.0).unwrap();
            assert!(mixed.distance(&StateOperator::maximally_mixed(&s)) < 1e-15);
            assert!(make_pseudopure(&s, &psi, 1.5).is_err());
            assert!(make_pseudopure(&s, &psi, -0.1).is_err());
        }
    }

    #[test]
    fn pseudopure_eigenvalue_structure() {
        let eps = 1e-5;
        for rep in [Representation::DickeSubspace, Representation::FullTensor] {
            let s = spec(4, rep);
            let rho = make_pseudopure(&s, &StateOperator::noon_ket(&s), eps).unwrap();
            let d = 16.0;
            let low = (1.0 - eps) / d;
            let eig = rho.eigenvalues();
            let count_low: f64 = eig
                .iter()
                .filter(|(e, _)| (e - low).abs() < 1e-15)
                .map(|(_, m)| m)
                .sum();
            assert_eq!(count_low, d - 1.0);
            let top = eig.last().unwrap();
            assert!((top.0 - (low + eps)).abs() < 1e-15);
            assert_eq!(top.1, 1.0);
        }
    }

    #[test]
    fn thermal_state_is_unit_trace_and_diagonal() {
        for rep in [Representation::DickeSubspace, Representation::FullTensor] {
            let s = spec(4, rep);
            let rho = thermal_state(&s, Polarization { control: 2e-5, target: 5e-5 }).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-14);
            assert!(rho.hermiticity_error() == 0.0);
        }
        let s = spec(2, Representation::DickeSubspace);
        assert!(thermal_state(&s, Polarization { control: 0.1, target: 0.0 }).is_err());
    }

    #[test]
    fn inept_scales_control_by_gamma_ratio() {
        let s = SpinSystemSpec::trimethylphosphite();
        let pol = Polarization::equilibrium(&s, 1e-5, s.target.gamma);
        let enhanced = pol.inept(&s);
        let factor = enhanced.control / pol.control;
        // independent: γ_H/γ_P from the bundled table values
        assert!((factor - 2.6752218744e8 / 1.08394e8).abs() < 1e-12);
        assert!((factor - 2.47).abs() < 0.01);
        assert!((enhanced.control - pol.target).abs() < 1e-20);
    }

    #[test]
    fn dicke_thermal_maps_to_full_thermal() {
        let pol = Polarization { control: 3e-5, target: -7e-5 };
        let d = thermal_state(&spec(4, Representation::DickeSubspace), pol).unwrap();
        let f = thermal_state(&spec(4, Representation::FullTensor), pol).unwrap();
        let diff = (d.to_full().unwrap() - f.to_full().unwrap()).camax();
        assert!(diff < 1e-15, "diff {diff}");
    }
}
