//! Inversion of line amplitudes and Rabi frequencies into the MW field
//! vector (η, ζ, B_mw, B_rf), plus the amplitude-ratio curves of the
//! transverse-field configuration.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    rabi_frequency, ramsey_fid, spectrum, Apodization, EvolveOptions, InitialState, RamseyConfig,
};
use crate::error::{Error, Result};
use crate::levels::EigenSystem;
use crate::operators::SpinOperatorSet;
use crate::params::{DriveField, SpinSystemParams};
use crate::point::{LacPoint, TransversePoint};

/// Azimuthal-angle estimate from the four line amplitudes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaEstimate {
    /// Pooled estimate in [0, π/2], rad.
    pub eta: f64,
    /// |√(I₁/I₂) − √(I₃/I₄)|; zero when a degenerate branch fixed η exactly.
    pub residual: f64,
    /// The sign-ambiguous solutions {η, π−η, π+η, 2π−η}.
    pub ambiguity: [f64; 4],
}

/// η from the line amplitudes: |tanη| = √(I₁/I₂) = √(I₃/I₄), pooled as
/// atan(√((I₁+I₃)/(I₂+I₄))).
pub fn estimate_eta(i: [f64; 4]) -> Result<EtaEstimate> {
    if i.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InconsistentInputs(
            "line amplitudes must be finite and ≥ 0".into(),
        ));
    }
    let y = i[0] + i[2];
    let x = i[1] + i[3];
    let (eta, residual) = if x == 0.0 && y == 0.0 {
        return Err(Error::NoTransverseDrive);
    } else if x == 0.0 {
        (PI / 2.0, 0.0)
    } else if y == 0.0 {
        (0.0, 0.0)
    } else {
        let eta = (y / x).sqrt().atan();
        let residual = if i[1] > 0.0 && i[3] > 0.0 {
            ((i[0] / i[1]).sqrt() - (i[2] / i[3]).sqrt()).abs()
        } else {
            0.0
        };
        (eta, residual)
    };
    Ok(EtaEstimate {
        eta,
        residual,
        ambiguity: [eta, PI - eta, PI + eta, 2.0 * PI - eta],
    })
}

/// Polar-angle estimate with its dimensionless prefactor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZetaEstimate {
    /// ζ ∈ (0, π/2), rad.
    pub zeta: f64,
    /// (rabi_mw/rabi_rf)·(a_z/(a_y·sinη)); tanζ is this times B_rf/B_mw.
    pub coefficient: f64,
}

/// ζ from the two selective Rabi frequencies:
/// tanζ = (rabi_mw/rabi_rf)·(a_z/(a_y·sinη))·(B_rf/B_mw).
pub fn estimate_zeta(
    rabi_mw: f64,
    rabi_rf: f64,
    eta: f64,
    a_y: f64,
    a_z: f64,
    field_ratio: f64,
) -> Result<ZetaEstimate> {
    if rabi_mw < 0.0 || rabi_rf < 0.0 || a_y <= 0.0 || a_z <= 0.0 || field_ratio <= 0.0 {
        return Err(Error::InconsistentInputs(
            "Rabi frequencies, amplitudes and field ratio must be positive".into(),
        ));
    }
    if rabi_rf == 0.0 {
        return Ok(ZetaEstimate {
            zeta: PI / 2.0,
            coefficient: f64::INFINITY,
        });
    }
    if rabi_mw == 0.0 {
        if eta.sin() == 0.0 {
            return Err(Error::InconsistentInputs(
                "rabi_mw = 0 with sinη = 0 leaves ζ undetermined".into(),
            ));
        }
        return Ok(ZetaEstimate {
            zeta: 0.0,
            coefficient: 0.0,
        });
    }
    let coefficient = (rabi_mw / rabi_rf) * a_z / (a_y * eta.sin());
    Ok(ZetaEstimate {
        zeta: (coefficient * field_ratio).atan(),
        coefficient,
    })
}

/// Field amplitudes from the Rabi frequencies once the angles are known:
/// B_mw = rabi_mw/(√2·γe·sinζ·sinη·a_y), B_rf = rabi_rf/(√2·γe·cosζ·a_z).
pub fn estimate_amplitudes(
    rabi_mw: f64,
    rabi_rf: f64,
    eta: f64,
    zeta: f64,
    params: &SpinSystemParams,
    a_y: f64,
    a_z: f64,
) -> Result<(f64, f64)> {
    let mw_geo = zeta.sin() * eta.sin();
    if mw_geo == 0.0 && rabi_mw > 0.0 {
        return Err(Error::InconsistentInputs(
            "nonzero MW Rabi frequency with sinζ·sinη = 0".into(),
        ));
    }
    let b_mw = if rabi_mw == 0.0 {
        0.0
    } else {
        rabi_mw / (SQRT_2 * params.gamma_e * mw_geo * a_y)
    };
    let b_rf = if rabi_rf == 0.0 {
        0.0
    } else {
        rabi_rf / (SQRT_2 * params.gamma_e * zeta.cos() * a_z)
    };
    Ok((b_mw, b_rf))
}

/// Full MW-vector reconstruction report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MwVectorEstimate {
    pub eta: f64,
    pub eta_ambiguity: [f64; 4],
    pub eta_residual: f64,
    pub zeta: f64,
    pub zeta_coefficient: f64,
    pub b_mw: f64,
    pub b_rf: f64,
    /// Dipole amplitudes used in the inversion.
    pub a_y: f64,
    pub a_z: f64,
}

/// Inputs for [`reconstruct`]: measured or simulated observables.
#[derive(Debug, Clone)]
pub struct ReconstructionInput {
    /// Line amplitudes I₁..I₄; η is estimated from them when present.
    pub line_amplitudes: Option<[f64; 4]>,
    /// η, rad, used when the amplitudes are not supplied.
    pub eta: Option<f64>,
    /// Selective Rabi frequency of line 1 (ψ₂↔ψ₃), MHz.
    pub rabi_mw: f64,
    /// Selective Rabi frequency of line 5 (ψ₃↔ψ₄), MHz.
    pub rabi_rf: f64,
    /// B_rf/B_mw from the power calibration.
    pub field_ratio: f64,
}

/// Run the inversion pipeline with dipole amplitudes taken from the LAC
/// transition table (a_y = |⟨ψ₂|S_y|ψ₃⟩|, a_z = |⟨ψ₃|S_z|ψ₄⟩|).
pub fn reconstruct(
    input: &ReconstructionInput,
    params: &SpinSystemParams,
    point: &LacPoint,
    ops: &SpinOperatorSet,
) -> Result<MwVectorEstimate> {
    let a_y = dipole_amplitude(&point.eig, point.line_pair(1), 1, ops);
    let a_z = dipole_amplitude(&point.eig, point.line_pair(5), 2, ops);

    let (eta, eta_residual, eta_ambiguity) = match (input.line_amplitudes, input.eta) {
        (Some(amps), _) => {
            let e = estimate_eta(amps)?;
            (e.eta, e.residual, e.ambiguity)
        }
        (None, Some(eta)) => (eta, 0.0, [eta, PI - eta, PI + eta, 2.0 * PI - eta]),
        (None, None) => {
            return Err(Error::InconsistentInputs(
                "either line amplitudes or η must be supplied".into(),
            ))
        }
    };
    let zeta = estimate_zeta(
        input.rabi_mw,
        input.rabi_rf,
        eta,
        a_y,
        a_z,
        input.field_ratio,
    )?;
    let (b_mw, b_rf) = estimate_amplitudes(
        input.rabi_mw,
        input.rabi_rf,
        eta,
        zeta.zeta,
        params,
        a_y,
        a_z,
    )?;
    Ok(MwVectorEstimate {
        eta,
        eta_ambiguity,
        eta_residual,
        zeta: zeta.zeta,
        zeta_coefficient: zeta.coefficient,
        b_mw,
        b_rf,
        a_y,
        a_z,
    })
}

fn dipole_amplitude(
    eig: &EigenSystem,
    pair: (usize, usize),
    axis: usize,
    ops: &SpinOperatorSet,
) -> f64 {
    let op = ops.electron()[axis];
    let vi = eig.states.column(pair.0);
    let vj = eig.states.column(pair.1);
    (vi.adjoint() * op * vj)[(0, 0)].norm()
}

/// Forward-model observables for a drive at the LAC: the two selective Rabi
/// frequencies and linear-response line amplitudes I_k ∝ Ω_k².
#[derive(Debug, Clone)]
pub struct ForwardSignals {
    pub rabi_mw: f64,
    pub rabi_rf: f64,
    pub line_amplitudes: [f64; 4],
}

/// Simulate the measured observables for a known MW drive (and an RF field
/// of amplitude `b_rf` sharing the drive orientation), in the dominant-term
/// model: each transition couples only through its selection-rule axis with
/// the numerical dipole amplitude from the transition table. The full
/// complex matrix elements add cross-coupling contaminations of a few
/// percent, which is the systematic the inversion inherits on real data.
pub fn forward_model(
    params: &SpinSystemParams,
    point: &LacPoint,
    drive: &DriveField,
    b_rf: f64,
    ops: &SpinOperatorSet,
) -> ForwardSignals {
    let a = |line: usize, axis: usize| dipole_amplitude(&point.eig, point.line_pair(line), axis, ops);
    let scale = SQRT_2 * params.gamma_e * drive.b_amp;
    let (sz, cz) = drive.zeta.sin_cos();
    let (se, ce) = drive.eta.sin_cos();

    let rabi_mw = scale * sz * se * a(1, 1);
    let rabi_rf = SQRT_2 * params.gamma_e * b_rf * cz * a(5, 2);
    let line_amplitudes = [
        (scale * sz * se * a(1, 1)).powi(2),
        (scale * sz * ce * a(2, 0)).powi(2),
        (scale * sz * se * a(3, 1)).powi(2),
        (scale * sz * ce * a(4, 0)).powi(2),
    ];
    ForwardSignals {
        rabi_mw,
        rabi_rf,
        line_amplitudes,
    }
}

/// How the transverse amplitude-ratio curves are computed.
#[derive(Debug, Clone, Copy)]
pub enum RatioMethod {
    /// Full Ramsey simulation and spectral line readout.
    Dynamics {
        /// Hard-pulse MW amplitude, G.
        b_mw: f64,
        /// Artificial detuning, MHz.
        detuning: f64,
        /// FID length, µs.
        duration: f64,
    },
    /// Linear-response amplitudes I_k ∝ |⟨i|n̂·S|j⟩|².
    LinearResponse,
}

/// One azimuth of the ratio scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioScanPoint {
    /// Azimuth of the static field, rad.
    pub phi: f64,
    /// I₁..I₄ (ascending line frequency).
    pub amplitudes: [f64; 4],
    /// (I₁+I₄)/(I₂+I₃).
    pub ratio: f64,
    /// (I₂+I₃)/(I₁+I₄).
    pub inverse_ratio: f64,
    /// False when two lines were too close to read independently; such
    /// points should be skipped by consumers.
    pub resolved: bool,
}

/// Amplitudes of the four transverse MW lines as a function of the static
/// field azimuth at θ = 90°, and the two reciprocal ratio curves.
pub fn amplitude_ratio_scan(
    params: &SpinSystemParams,
    b: f64,
    phi_grid: &[f64],
    drive_zeta: f64,
    drive_eta: f64,
    method: RatioMethod,
    ops: &SpinOperatorSet,
) -> Result<Vec<RatioScanPoint>> {
    let theta = PI / 2.0;
    phi_grid
        .iter()
        .map(|&phi| {
            let point = TransversePoint::analyze(params, b, theta, phi, ops)?;
            let (amplitudes, resolved) = match method {
                RatioMethod::LinearResponse => {
                    let probe = DriveField::new_probe(drive_zeta, drive_eta);
                    let mut amps = [0.0; 4];
                    for (k, &(i, j)) in point.lines.iter().enumerate() {
                        let omega = rabi_frequency(params, &point.eig, (i, j), &probe, ops);
                        amps[k] = omega * omega;
                    }
                    (amps, true)
                }
                RatioMethod::Dynamics {
                    b_mw,
                    detuning,
                    duration,
                } => simulate_transverse_amplitudes(
                    params, &point, b_mw, drive_zeta, drive_eta, detuning, duration, ops,
                )?,
            };
            let num = amplitudes[0] + amplitudes[3];
            let den = amplitudes[1] + amplitudes[2];
            Ok(RatioScanPoint {
                phi,
                amplitudes,
                ratio: num / den,
                inverse_ratio: den / num,
                resolved,
            })
        })
        .collect()
}

impl DriveField {
    /// Unit-amplitude probe drive used for linear-response amplitudes; the
    /// carrier is irrelevant for matrix elements.
    fn new_probe(zeta: f64, eta: f64) -> Self {
        Self {
            b_amp: 1.0,
            zeta,
            eta,
            omega: 1.0,
            phase: 0.0,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate_transverse_amplitudes(
    params: &SpinSystemParams,
    point: &TransversePoint,
    b_mw: f64,
    zeta: f64,
    eta: f64,
    detuning: f64,
    duration: f64,
    ops: &SpinOperatorSet,
) -> Result<([f64; 4], bool)> {
    // carrier at the center of the quadruple
    let carrier = 0.5 * (point.line_frequency(1) + point.line_frequency(4));
    let drive = DriveField {
        b_amp: b_mw,
        zeta,
        eta,
        omega: carrier,
        phase: 0.0,
    };
    // pi/2 on the combined transfer out of the brighter m_s = 0 level
    let g_eff = {
        let g1 = rabi_frequency(params, &point.eig, (point.ms0.1, point.pm1.0), &drive, ops);
        let g2 = rabi_frequency(params, &point.eig, (point.ms0.1, point.pm1.1), &drive, ops);
        (g1 * g1 + g2 * g2).sqrt()
    };
    if g_eff <= 0.0 {
        return Err(Error::InconsistentInputs(
            "drive does not couple to the transverse quadruple".into(),
        ));
    }
    let cfg = RamseyConfig {
        drive,
        pulse_duration: 1.0 / (4.0 * g_eff),
        detuning,
        duration,
        sample_step: 0.01,
        initial: InitialState::MixedMsZeroNitrogenZero,
    };
    let trace = ramsey_fid(params, &point.hamiltonian, &cfg, ops, &EvolveOptions::default())?;
    let spec = spectrum(
        &trace,
        Apodization::Exponential {
            rate: 1.0 / duration,
        },
        4,
    )?;

    let positions: Vec<f64> = (1..=4)
        .map(|k| (detuning + point.line_frequency(k) - carrier).abs())
        .collect();
    let resolution = 1.25 / duration;
    let mut resolved = true;
    for a in 0..4 {
        for b in (a + 1)..4 {
            if (positions[a] - positions[b]).abs() < resolution {
                resolved = false;
            }
        }
    }
    let mut amps = [0.0; 4];
    for (k, &p) in positions.iter().enumerate() {
        amps[k] = spec.magnitude_at(p);
    }
    Ok((amps, resolved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::build_operators;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lac() -> (SpinSystemParams, SpinOperatorSet, LacPoint) {
        let params = SpinSystemParams::default();
        let ops = build_operators();
        let point = LacPoint::nuclear_spin_lac(&params, 28.9, 0.0, &ops).unwrap();
        (params, ops, point)
    }

    #[test]
    fn eta_trivial_cases() {
        let e = estimate_eta([2.0, 2.0, 0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(e.eta.to_degrees(), 45.0, epsilon = 1e-12);
        assert!(e.residual < 1e-12);

        let e = estimate_eta([0.0, 1.0, 0.0, 0.7]).unwrap();
        assert_abs_diff_eq!(e.eta, 0.0);

        let e = estimate_eta([1.0, 0.0, 0.7, 0.0]).unwrap();
        assert_abs_diff_eq!(e.eta, PI / 2.0);

        assert!(matches!(
            estimate_eta([0.0, 0.0, 0.0, 0.0]),
            Err(Error::NoTransverseDrive)
        ));
    }

    #[test]
    fn eta_invariant_under_rescaling() {
        let base = [1.3, 0.9, 0.75, 0.55];
        let e1 = estimate_eta(base).unwrap();
        let e2 = estimate_eta(base.map(|v| v * 173.2)).unwrap();
        assert_abs_diff_eq!(e1.eta, e2.eta, epsilon = 1e-14);
        assert_abs_diff_eq!(e1.residual, e2.residual, epsilon = 1e-12);
    }

    #[test]
    fn eta_estimator_self_consistency() {
        // amplitudes generated by the Eq. 4 model itself have zero residual
        let eta = 37.0_f64.to_radians();
        let (s2, c2) = (eta.sin().powi(2), eta.cos().powi(2));
        let i = [s2 * 0.64, c2 * 0.64, s2 * 0.36, c2 * 0.36];
        let e = estimate_eta(i).unwrap();
        assert!(e.residual < 1e-12);
        assert_abs_diff_eq!(e.eta, eta, epsilon = 1e-12);
    }

    #[test]
    fn paper_point_coefficient_zeta_and_amplitudes() {
        let (params, _, _) = lac();
        let eta = 45.3_f64.to_radians();
        let z = estimate_zeta(0.44, 0.36, eta, 0.80, 1.0, 0.3767).unwrap();
        assert_abs_diff_eq!(z.coefficient, 2.15, epsilon = 0.05);
        assert_abs_diff_eq!(z.zeta.to_degrees(), 39.0, epsilon = 2.0);

        let (b_mw, b_rf) =
            estimate_amplitudes(0.44, 0.36, eta, z.zeta, &params, 0.80, 1.0).unwrap();
        assert_abs_diff_eq!(b_mw, 0.31, epsilon = 0.01);
        assert_abs_diff_eq!(b_rf, 0.12, epsilon = 0.01);
    }

    #[test]
    fn zeta_symmetric_configuration() {
        // η = 90°, equal fields, unit amplitudes, equal Rabi rates → 45°
        let z = estimate_zeta(0.5, 0.5, PI / 2.0, 1.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(z.zeta.to_degrees(), 45.0, epsilon = 1e-12);
    }

    #[test]
    fn zeta_degenerate_branches() {
        let z = estimate_zeta(0.5, 0.0, 0.3, 0.8, 1.0, 0.4).unwrap();
        assert_abs_diff_eq!(z.zeta, PI / 2.0);
        let z = estimate_zeta(0.0, 0.5, 0.3, 0.8, 1.0, 0.4).unwrap();
        assert_abs_diff_eq!(z.zeta, 0.0);
    }

    #[test]
    fn amplitude_linearity() {
        let (params, _, _) = lac();
        let (b1, r1) =
            estimate_amplitudes(0.44, 0.36, 0.7, 0.6, &params, 0.80, 1.0).unwrap();
        let (b2, r2) =
            estimate_amplitudes(0.88, 0.72, 0.7, 0.6, &params, 0.80, 1.0).unwrap();
        assert_abs_diff_eq!(b2, 2.0 * b1, epsilon = 1e-12);
        assert_abs_diff_eq!(r2, 2.0 * r1, epsilon = 1e-12);
    }

    #[test]
    fn round_trip_inversion() {
        // forward-simulate 20 random drives, invert, recover (η, ζ, B_mw)
        let (params, ops, point) = lac();
        let mut rng = ChaCha8Rng::seed_from_u64(20260810);
        for _ in 0..20 {
            let zeta = rng.gen_range(10.0_f64..80.0).to_radians();
            let eta = rng.gen_range(5.0_f64..85.0).to_radians();
            let b_mw = rng.gen_range(0.05_f64..2.0);
            let b_rf = rng.gen_range(0.05_f64..2.0);
            let drive = DriveField::new(b_mw, zeta, eta, 2876.8, 0.0).unwrap();
            let fwd = forward_model(&params, &point, &drive, b_rf, &ops);
            let est = reconstruct(
                &ReconstructionInput {
                    line_amplitudes: Some(fwd.line_amplitudes),
                    eta: None,
                    rabi_mw: fwd.rabi_mw,
                    rabi_rf: fwd.rabi_rf,
                    field_ratio: b_rf / b_mw,
                },
                &params,
                &point,
                &ops,
            )
            .unwrap();
            assert!(
                (est.eta - eta).abs().to_degrees() < 0.5,
                "eta {} vs {}",
                est.eta.to_degrees(),
                eta.to_degrees()
            );
            assert!(
                (est.zeta - zeta).abs().to_degrees() < 1.0,
                "zeta {} vs {}",
                est.zeta.to_degrees(),
                zeta.to_degrees()
            );
            assert!(
                (est.b_mw - b_mw).abs() < 0.02 * b_mw,
                "b_mw {} vs {}",
                est.b_mw,
                b_mw
            );
        }
    }

    #[test]
    fn ratio_curves_are_reciprocal_and_eta_sensitive() {
        let (params, ops, _) = lac();
        let phi_grid: Vec<f64> = (0..=18).map(|k| (k as f64 * 10.0).to_radians()).collect();
        let zeta = 39.0_f64.to_radians();
        let scan_a = amplitude_ratio_scan(
            &params,
            28.9,
            &phi_grid,
            zeta,
            45.3_f64.to_radians(),
            RatioMethod::LinearResponse,
            &ops,
        )
        .unwrap();
        let scan_b = amplitude_ratio_scan(
            &params,
            28.9,
            &phi_grid,
            zeta,
            0.0,
            RatioMethod::LinearResponse,
            &ops,
        )
        .unwrap();
        let mut max_rel_diff: f64 = 0.0;
        for (a, b) in scan_a.iter().zip(&scan_b) {
            assert_abs_diff_eq!(a.ratio * a.inverse_ratio, 1.0, epsilon = 1e-12);
            max_rel_diff = max_rel_diff.max((a.ratio - b.ratio).abs() / a.ratio);
        }
        assert!(
            max_rel_diff > 0.10,
            "ratio curves barely depend on η: {max_rel_diff}"
        );
    }

    #[test]
    fn ratio_curves_pi_periodic() {
        // the dominant-term model gives equal ratios at φ and φ + 180°
        let (params, ops, _) = lac();
        let base: Vec<f64> = (0..=6).map(|k| (k as f64 * 30.0).to_radians()).collect();
        let shifted: Vec<f64> = base.iter().map(|p| p + PI).collect();
        let zeta = 39.0_f64.to_radians();
        let eta = 45.3_f64.to_radians();
        let a = amplitude_ratio_scan(
            &params,
            28.9,
            &base,
            zeta,
            eta,
            RatioMethod::LinearResponse,
            &ops,
        )
        .unwrap();
        let b = amplitude_ratio_scan(
            &params,
            28.9,
            &shifted,
            zeta,
            eta,
            RatioMethod::LinearResponse,
            &ops,
        )
        .unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            assert!(
                (pa.ratio - pb.ratio).abs() < 0.02 * pa.ratio,
                "ratio at {}° = {} vs +180° = {}",
                pa.phi.to_degrees(),
                pa.ratio,
                pb.ratio
            );
        }
    }
}
