//! Assembly of the static and drive Hamiltonians on the product space.

use std::f64::consts::{SQRT_2, TAU};

use crate::error::Result;
use crate::operators::{hermiticity_defect, SpinOperatorSet};
use crate::params::{DriveField, FieldVector, SpinSystemParams};
use crate::{C64, CMat};

/// Static Hamiltonian, MHz:
///
/// H = D·Sz² + γe B·S + γn1 B·I₁ + γn2 B·I₂ + P·I₂z² + S·A₁·I₁ + S·A₂·I₂
pub fn build_static_hamiltonian(
    params: &SpinSystemParams,
    field: &FieldVector,
    ops: &SpinOperatorSet,
) -> Result<CMat> {
    params.validate()?;
    let b = field.cartesian();

    let mut h = &ops.sz * &ops.sz * C64::new(params.d, 0.0);
    h += &ops.i2z * &ops.i2z * C64::new(params.p, 0.0);

    let zeeman_sets: [([&CMat; 3], f64); 3] = [
        (ops.electron(), params.gamma_e),
        (ops.carbon(), params.gamma_n1),
        (ops.nitrogen(), params.gamma_n2),
    ];
    for (components, gamma) in zeeman_sets {
        for (op, b_comp) in components.iter().zip(b) {
            if b_comp != 0.0 {
                h += *op * C64::new(gamma * b_comp, 0.0);
            }
        }
    }

    let hyperfine: [(&[[f64; 3]; 3], [&CMat; 3]); 2] =
        [(&params.a1, ops.carbon()), (&params.a2, ops.nitrogen())];
    for (tensor, nuclear) in hyperfine {
        for (row, s_op) in tensor.iter().zip(ops.electron()) {
            for (a, i_op) in row.iter().zip(nuclear) {
                if *a != 0.0 {
                    h += s_op * i_op * C64::new(*a, 0.0);
                }
            }
        }
    }

    debug_assert!(hermiticity_defect(&h) < 1e-12);
    Ok(h)
}

/// Drive-direction operator √2·γe·B_amp·(n̂·S), MHz.
///
/// The full drive Hamiltonian is this operator times cos(2π·ω·t + φ); the
/// time factor is applied by the propagators. On resonance, the Rabi
/// frequency of transition i↔j is |⟨i|drive_operator|j⟩|.
pub fn drive_operator(params: &SpinSystemParams, drive: &DriveField, ops: &SpinOperatorSet) -> CMat {
    ops.electron_along(drive.direction()) * C64::new(SQRT_2 * params.gamma_e * drive.b_amp, 0.0)
}

/// Drive Hamiltonian at time `t` (µs), MHz:
///
/// H_mw(t) = √2·γe·B_amp·(sinζ cosη Sx + sinζ sinη Sy + cosζ Sz)·cos(2πωt + φ)
pub fn build_drive_hamiltonian(
    params: &SpinSystemParams,
    drive: &DriveField,
    t: f64,
    ops: &SpinOperatorSet,
) -> CMat {
    drive_operator(params, drive, ops) * C64::new((TAU * drive.omega * t + drive.phase).cos(), 0.0)
}
