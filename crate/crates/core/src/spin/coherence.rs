use std::collections::BTreeMap;

use super::state::{Label, StateOperator};
use super::SpinSystemSpec;
use crate::C64;

/// One density-matrix element |row><col| with its coherence labels.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    /// Flip count of the bra minus flip count of the ket.
    pub order: i32,
    /// Gradient-weighted order γ_A·Δa + γ_M·Δm, rad s^-1 T^-1.
    pub q_gamma: f64,
    pub value: C64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoherenceDecomposition {
    /// Nonzero entries of the traceless deviation.
    pub entries: Vec<CoherenceEntry>,
    /// Σ multiplicity·|ρ_ij|² of the deviation grouped by order.
    pub weights: BTreeMap<i32, f64>,
}

impl CoherenceDecomposition {
    pub fn weight(&self, order: i32) -> f64 {
        self.weights.get(&order).copied().unwrap_or(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Largest weight at any order outside `keep`, relative to the total.
    pub fn leakage_outside(&self, keep: &[i32]) -> f64 {
        let total = self.total_weight();
        if total == 0.0 {
            return 0.0;
        }
        self.weights
            .iter()
            .filter(|(p, _)| !keep.contains(p))
            .map(|(_, w)| *w)
            .fold(0.0, f64::max)
            / total
    }
}

/// (Δa, Δm) between bra and ket, each as bra minus ket.
pub(crate) fn flip_delta(row: &Label, col: &Label) -> (i32, i32) {
    (
        col.control as i32 - row.control as i32,
        col.flips as i32 - row.flips as i32,
    )
}

pub(crate) fn q_gamma(spec: &SpinSystemSpec, delta: (i32, i32)) -> f64 {
    spec.control.gamma * delta.0 as f64 + spec.target.gamma * delta.1 as f64
}

/// Labels every element of the state's deviation with its coherence order
/// and gradient-weighted order, and aggregates squared weights per order.
pub fn coherence_orders(state: &StateOperator) -> CoherenceDecomposition {
    let dev = state.deviation();
    let spec = state.spec();
    let mut out = CoherenceDecomposition::default();
    for (bi, block) in dev.blocks().iter().enumerate() {
        for (r, lr) in block.labels.iter().enumerate() {
            for (c, lc) in block.labels.iter().enumerate() {
                let value = block.matrix[(r, c)];
                if value == C64::new(0.0, 0.0) {
                    continue;
                }
                let delta = flip_delta(lr, lc);
                let order = delta.0 + delta.1;
                *out.weights.entry(order).or_insert(0.0) += block.multiplicity * value.norm_sqr();
                out.entries.push(CoherenceEntry {
                    block: bi,
                    row: r,
                    col: c,
                    order,
                    q_gamma: q_gamma(spec, delta),
                    value,
                });
            }
        }
    }
    out
}
