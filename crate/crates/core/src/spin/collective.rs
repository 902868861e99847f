//! Collective angular momentum of the equivalent target spins.
//!
//! Multiplet indices run over the number of flipped spins `m = 0..=j2`
//! relative to the top of the multiplet, so that `J_z = j2/2 - m`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::C64;

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Twice the total spin of every multiplet in `n` spin-1/2 particles,
/// largest first.
pub fn target_multiplets(n: usize) -> Vec<u32> {
    (0..=n as u32 / 2).map(|k| n as u32 - 2 * k).collect()
}

/// Number of copies of the spin-`j2/2` multiplet among `n` spin-1/2s.
pub fn multiplet_multiplicity(n: usize, j2: u32) -> u64 {
    let n = n as u64;
    let j2 = j2 as u64;
    assert!(j2 <= n && (n - j2) % 2 == 0, "no spin {j2}/2 multiplet in {n} spins");
    let k = (n - j2) / 2;
    if k == 0 {
        1
    } else {
        binomial(n, k) - binomial(n, k - 1)
    }
}

/// J+ in the multiplet basis (real, lowers the flip index by one).
pub(crate) fn j_plus(j2: u32) -> DMatrix<f64> {
    let dim = j2 as usize + 1;
    let j = j2 as f64 / 2.0;
    let mut out = DMatrix::zeros(dim, dim);
    for m in 1..dim {
        let mz = j - m as f64;
        out[(m - 1, m)] = (j * (j + 1.0) - mz * (mz + 1.0)).sqrt();
    }
    out
}

pub(crate) fn j_x(j2: u32) -> DMatrix<f64> {
    let jp = j_plus(j2);
    (&jp + jp.transpose()) * 0.5
}

/// exp(-iθ(cos φ J_x + sin φ J_y)) for the spin-`j2/2` multiplet.
pub(crate) fn rotation(j2: u32, phase: f64, angle: f64) -> DMatrix<C64> {
    let dim = j2 as usize + 1;
    if j2 == 0 {
        return DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    }
    let eig = SymmetricEigen::new(j_x(j2));
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -angle * l)));
    let rx = &v * d * v.transpose();
    // R_φ = R_z(φ) R_x(θ) R_z(-φ); R_z(φ) = diag(exp(-iφ J_z)).
    let j = j2 as f64 / 2.0;
    DMatrix::from_fn(dim, dim, |r, c| {
        let mr = j - r as f64;
        let mc = j - c as f64;
        rx[(r, c)] * C64::from_polar(1.0, -phase * (mr - mc))
    })
}

/// Orthonormal embeddings of every copy of the spin-`j2/2` multiplet of `n`
/// spins into the 2^n product space (target bit set = spin flipped). Column
/// `m` of each matrix is the copy's |j, j - m> state.
pub(crate) fn multiplet_embeddings(n: usize, j2: u32) -> Vec<DMatrix<f64>> {
    let dim = 1usize << n;
    let k = (n as u32 - j2) / 2;
    let sector: Vec<usize> = (0..dim).filter(|s| s.count_ones() == k).collect();

    // Highest-weight vectors: kernel of S+ restricted to the k-flip sector.
    let highest: Vec<Vec<f64>> = if k == 0 {
        vec![sector.iter().map(|_| 1.0).collect()]
    } else {
        let size = sector.len();
        // (S+)^T S+ on the sector, built from S+|s> = Σ_bits |s without bit>.
        let mut gram = DMatrix::<f64>::zeros(size, size);
        let index_of = |s: usize| sector.iter().position(|&x| x == s);
        for (col, &s) in sector.iter().enumerate() {
            for b in 0..n {
                if s & (1 << b) == 0 {
                    continue;
                }
                let lowered = s & !(1 << b);
                // <s'|S-S+|s> = Σ over lowered, re-raise by any unset bit
                for b2 in 0..n {
                    if lowered & (1 << b2) != 0 {
                        continue;
                    }
                    if let Some(row) = index_of(lowered | (1 << b2)) {
                        gram[(row, col)] += 1.0;
                    }
                }
            }
        }
        let eig = SymmetricEigen::new(gram);
        (0..size)
            .filter(|&i| eig.eigenvalues[i].abs() < 1e-9)
            .map(|i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect()
    };

    let j = j2 as f64 / 2.0;
    highest
        .into_iter()
        .map(|hw| {
            let mut out = DMatrix::<f64>::zeros(dim, j2 as usize + 1);
            let mut current = vec![0.0; dim];
            let norm: f64 = hw.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (i, &s) in sector.iter().enumerate() {
                current[s] = hw[i] / norm;
            }
            for m in 0..=j2 as usize {
                for (s, &amp) in current.iter().enumerate() {
                    out[(s, m)] = amp;
                }
                if m == j2 as usize {
                    break;
                }
                // S- flips one more spin; normalise by the ladder coefficient.
                let mz = j - m as f64;
                let coef = (j * (j + 1.0) - mz * (mz - 1.0)).sqrt();
                let mut next = vec![0.0; dim];
                for (s, &amp) in current.iter().enumerate() {
                    if amp == 0.0 {
                        continue;
                    }
                    for b in 0..n {
                        if s & (1 << b) == 0 {
                            next[s | (1 << b)] += amp / coef;
                        }
                    }
                }
                current = next;
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities_account_for_every_state() {
        for n in 0..=11usize {
            let total: u64 = target_multiplets(n)
                .into_iter()
                .map(|j2| multiplet_multiplicity(n, j2) * (j2 as u64 + 1))
                .sum();
            assert_eq!(total, 1u64 << n, "n = {n}");
        }
        assert_eq!(multiplet_multiplicity(9, 9), 1);
        assert_eq!(multiplet_multiplicity(9, 7), 8);
        assert_eq!(multiplet_multiplicity(9, 1), 42);
    }

    #[test]
    fn rotation_is_unitary_and_composes() {
        for j2 in 0..6 {
            let a = rotation(j2, 0.3, 0.7);
            let b = rotation(j2, 0.3, 1.1);
            let ab = rotation(j2, 0.3, 1.8);
            let id = DMatrix::<C64>::identity(j2 as usize + 1, j2 as usize + 1);
            assert!((&a * a.adjoint() - &id).camax() < 1e-13);
            assert!((&b * &a - ab).camax() < 1e-13);
        }
    }

    #[test]
    fn spin_half_rotation_matches_closed_form() {
        let (phase, angle) = (0.4_f64, 1.3_f64);
        let r = rotation(1, phase, angle);
        let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
        let i = C64::new(0.0, 1.0);
        assert!((r[(0, 0)] - c).norm() < 1e-14);
        assert!((r[(0, 1)] + i * s * C64::from_polar(1.0, -phase)).norm() < 1e-14);
        assert!((r[(1, 0)] + i * s * C64::from_polar(1.0, phase)).norm() < 1e-14);
    }

    #[test]
    fn embeddings_are_orthonormal_and_complete() {
        for n in 1..=5usize {
            let mut cols = Vec::new();
            for j2 in target_multiplets(n) {
                let copies = multiplet_embeddings(n, j2);
                assert_eq!(copies.len() as u64, multiplet_multiplicity(n, j2));
                for e in copies {
                    for c in 0..e.ncols() {
                        cols.push(e.column(c).into_owned());
                    }
                }
            }
            let basis = DMatrix::from_columns(&cols);
            let gram = basis.transpose() * &basis;
            assert!((gram - DMatrix::<f64>::identity(1 << n, 1 << n)).camax() < 1e-10);
        }
    }
}
