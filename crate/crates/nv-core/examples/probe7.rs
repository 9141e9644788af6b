// Pulse calibration study: combined-coupling pi/2 calibration and the
// dependence of the line-5 leakage on drive strength.

use nv_core::dynamics::{
    pi_half_duration, rabi_frequency, ramsey_fid, spectrum, Apodization, EvolveOptions,
    InitialState, RamseyConfig,
};
use nv_core::hamiltonian::build_static_hamiltonian;
use nv_core::levels::diagonalize;
use nv_core::operators::build_operators;
use nv_core::params::{DriveField, FieldVector, SpinSystemParams};
use nv_core::transitions::identify_lac_levels;

fn main() {
    let params = SpinSystemParams::default();
    let ops = build_operators();
    let field = FieldVector::new(28.9, 38.3249_f64.to_radians(), 0.0).unwrap();
    let h = build_static_hamiltonian(&params, &field, &ops).unwrap();
    let eig = diagonalize(&h).unwrap();
    let psi = identify_lac_levels(&eig);
    let carrier = 2876.8;
    let nu_d = 20.0;

    let nus = [
        eig.energies[psi[2]] - eig.energies[psi[1]],
        eig.energies[psi[3]] - eig.energies[psi[1]],
        eig.energies[psi[2]] - eig.energies[psi[0]],
        eig.energies[psi[3]] - eig.energies[psi[0]],
        eig.energies[psi[3]] - eig.energies[psi[2]],
        eig.energies[psi[1]] - eig.energies[psi[0]],
    ];

    for bmw in [1.5_f64, 3.0, 7.0] {
        for eta_deg in [45.3_f64, 0.0, 90.0] {
            let drive = DriveField::new(
                bmw,
                39.0_f64.to_radians(),
                eta_deg.to_radians(),
                carrier,
                0.0,
            )
            .unwrap();
            // combined transfer rate out of psi2 through both LAC partners
            let g23 = rabi_frequency(&params, &eig, (psi[1], psi[2]), &drive, &ops);
            let g24 = rabi_frequency(&params, &eig, (psi[1], psi[3]), &drive, &ops);
            let g_eff = (g23 * g23 + g24 * g24).sqrt();
            let t_pulse = 1.0 / (4.0 * g_eff);
            let _ = pi_half_duration;

            let cfg = RamseyConfig {
                drive,
                pulse_duration: t_pulse,
                detuning: nu_d,
                duration: 3.0,
                sample_step: 0.01,
                initial: InitialState::MixedMsZero,
            };
            let trace = ramsey_fid(&params, &h, &cfg, &ops, &EvolveOptions::default()).unwrap();
            let spec = spectrum(&trace, Apodization::Exponential { rate: 1.0 / 3.0 }, 4).unwrap();
            let positions = [
                nu_d + nus[0] - carrier,
                nu_d + nus[1] - carrier,
                nu_d + nus[2] - carrier,
                nu_d + nus[3] - carrier,
                nus[4],
                nus[5],
            ];
            let amps: Vec<f64> = positions
                .iter()
                .map(|&p| {
                    spec.peak_near(p.abs(), 0.45)
                        .map(|l| l.amplitude)
                        .unwrap_or(0.0)
                })
                .collect();
            let max5 = amps[..5].iter().cloned().fold(0.0, f64::max);
            print!(
                "Bmw {bmw:4.1} eta {eta_deg:5.1} t_p {t_pulse:7.4}  rel(1..5): "
            );
            for a in &amps[..5] {
                print!("{:6.3} ", a / max5);
            }
            println!(" zqn/max5 {:6.3}", amps[5] / max5);
        }
        println!();
    }
}
