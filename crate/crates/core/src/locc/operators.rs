//! Matrices of the local operations. Each is a function of the partition
//! and, where relevant, of the classical value the acting party holds.

use std::f64::consts::PI;

use super::LoccSetup;
use crate::quantum::{diagonal, permutation_matrix, CMatrix, C64};

/// `Ω = Σ_k P_k ⊗ V_k` on `(A, a)`, with `V_k |j⟩ = |j ⊕ k⟩` mod `n_f`.
pub fn omega(setup: &LoccSetup) -> CMatrix {
    let nf = setup.n_f();
    let m = setup.f.domain_size();
    permutation_matrix(m * nf, |i| {
        let (x, j) = (i / nf, i % nf);
        x * nf + (j + setup.class_index[x]) % nf
    })
}

/// Bob's relabelling `|r ⊖ k⟩ ↦ |k⟩` on `b`, i.e. `j ↦ r ⊖ j`.
pub fn bob_shift(n_f: usize, r: usize) -> CMatrix {
    permutation_matrix(n_f, |j| (r + n_f - j) % n_f)
}

/// `|n⟩_B |k⟩_b ↦ |n ⊕ f_k⟩_B |k⟩_b` on `(B, b)`.
pub fn local_oracle(setup: &LoccSetup) -> CMatrix {
    let nf = setup.n_f();
    let n = setup.f.codomain_size();
    let values = &setup.partition.values;
    permutation_matrix(n * nf, |i| {
        let (y, k) = (i / nf, i % nf);
        ((y + values[k]) % n) * nf + k
    })
}

/// `F[s, k] = n_f^{-1/2} e^{2πi ks / n_f}`.
pub fn dft(n_f: usize) -> CMatrix {
    let w = 1.0 / (n_f as f64).sqrt();
    CMatrix::from_fn(n_f, n_f, |s, k| {
        C64::from_polar(w, 2.0 * PI * ((k * s) % n_f) as f64 / n_f as f64)
    })
}

/// `T^s` on `A`, where `T = Σ_k e^{-2πi k / n_f} P_k`.
pub fn phase_t(setup: &LoccSetup, s: usize) -> CMatrix {
    let nf = setup.n_f();
    diagonal(setup.class_index.iter().map(|&k| {
        C64::from_polar(1.0, -2.0 * PI * ((k * s) % nf) as f64 / nf as f64)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FunctionTable;
    use crate::quantum::unitarity_deviation;

    #[test]
    fn all_unitary() {
        let f = FunctionTable::new(5, 4, vec![3, 0, 3, 1, 0]).unwrap();
        let setup = LoccSetup::new(&f);
        let nf = setup.n_f();
        let mut mats = vec![omega(&setup), local_oracle(&setup), dft(nf)];
        for r in 0..nf {
            mats.push(bob_shift(nf, r));
            mats.push(phase_t(&setup, r));
        }
        for u in &mats {
            assert!(unitarity_deviation(u) < 1e-12);
        }
    }

    #[test]
    fn t_power_cycles() {
        let f = FunctionTable::new(4, 3, vec![0, 2, 1, 2]).unwrap();
        let setup = LoccSetup::new(&f);
        let t = phase_t(&setup, 1);
        let mut acc = CMatrix::identity(4, 4);
        for s in 0..4 {
            assert!((&acc - phase_t(&setup, s)).camax() < 1e-12);
            acc = &acc * &t;
        }
    }

    #[test]
    fn omega_moves_by_class() {
        // f = (1, 0, 1): values [0, 1], class of x = 0 is 1
        let f = FunctionTable::new(3, 2, vec![1, 0, 1]).unwrap();
        let setup = LoccSetup::new(&f);
        let om = omega(&setup);
        // |0⟩_A |0⟩_a -> |0⟩_A |1⟩_a
        assert_eq!(om[(1, 0)], C64::new(1.0, 0.0));
        // |1⟩_A |1⟩_a unchanged
        assert_eq!(om[(3, 3)], C64::new(1.0, 0.0));
    }
}
