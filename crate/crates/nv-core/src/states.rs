//! Ideal product-basis states at the nuclear-spin-induced LAC.
//!
//! Near the anti-crossing the four relevant eigenstates are approximately
//!
//! * ψ₁,₂ ≈ |0⟩ ⊗ (|−1/2⟩ ± |+1/2⟩)/√2 ⊗ |0⟩   (m_s = 0 pair),
//! * ψ₃,₄ ≈ (|−1⟩ ∓ |+1⟩)/√2 ⊗ |−1/2⟩ ⊗ |0⟩   (m_s = ±1 pair),
//!
//! with the ¹⁴N in m_I2 = 0. These are used to identify the levels in the
//! numerical spectrum and to quantify how well the approximation holds.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::operators::basis_index;
use crate::{C64, CVec, DIM};

fn base(entries: &[(usize, f64)]) -> CVec {
    let mut v = CVec::zeros(DIM);
    for (idx, amp) in entries {
        v[*idx] = C64::new(*amp, 0.0);
    }
    v
}

/// The four ideal states, indexed ψ₁..ψ₄ as `[0..4]`.
pub fn ideal_lac_states() -> [CVec; 4] {
    let r = FRAC_1_SQRT_2;
    // |m_s, m_I1, m_I2⟩ with m1 given as twice its value
    let psi1 = base(&[(basis_index(0, -1, 0), r), (basis_index(0, 1, 0), r)]);
    let psi2 = base(&[(basis_index(0, -1, 0), r), (basis_index(0, 1, 0), -r)]);
    let psi3 = base(&[(basis_index(-1, -1, 0), r), (basis_index(1, -1, 0), -r)]);
    let psi4 = base(&[(basis_index(-1, -1, 0), r), (basis_index(1, -1, 0), r)]);
    [psi1, psi2, psi3, psi4]
}

/// |⟨a|b⟩| for normalized vectors.
pub fn overlap(a: &CVec, b: &CVec) -> f64 {
    a.dotc(b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_states_orthonormal() {
        let states = ideal_lac_states();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((overlap(a, b) - want).abs() < 1e-15);
            }
        }
    }
}
