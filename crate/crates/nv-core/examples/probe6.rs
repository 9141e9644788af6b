// Full Ramsey spectrum at the nuclear-spin LAC: line positions and the
// eta selection rules, for several drive strengths.

use nv_core::dynamics::{
    extract_lines, pi_half_duration, ramsey_fid, spectrum, Apodization, EvolveOptions,
    InitialState, LineCriteria, RamseyConfig,
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
        eig.energies[psi[2]] - eig.energies[psi[1]], // line 1: psi2-psi3
        eig.energies[psi[3]] - eig.energies[psi[1]], // line 2: psi2-psi4
        eig.energies[psi[2]] - eig.energies[psi[0]], // line 3: psi1-psi3
        eig.energies[psi[3]] - eig.energies[psi[0]], // line 4: psi1-psi4
        eig.energies[psi[3]] - eig.energies[psi[2]], // line 5: RF ZQ
        eig.energies[psi[1]] - eig.energies[psi[0]], // nuclear ZQ
    ];
    println!("transition frequencies: {:?}", nus.map(|x| (x * 1000.0).round() / 1000.0));
    println!(
        "predicted SQ positions (nu_d + nu - carrier): {:?}",
        [nus[0], nus[1], nus[2], nus[3]].map(|nu| ((nu_d + nu - carrier) * 100.0).round() / 100.0)
    );

    for (eta_deg, bmw) in [(45.3_f64, 7.0_f64), (45.3, 3.0), (0.0, 7.0), (90.0, 7.0)] {
        let drive = DriveField::new(
            bmw,
            39.0_f64.to_radians(),
            eta_deg.to_radians(),
            carrier,
            0.0,
        )
        .unwrap();
        // calibrate pi/2 on line 1 when it is driven, else on line 2
        let cal_pair = if eta_deg < 1.0 {
            (psi[1], psi[3])
        } else {
            (psi[1], psi[2])
        };
        let t_pulse = pi_half_duration(&params, &eig, cal_pair, &drive, &ops);
        let cfg = RamseyConfig {
            drive,
            pulse_duration: t_pulse,
            detuning: nu_d,
            duration: 3.0,
            sample_step: 0.01,
            initial: InitialState::MixedMsZero,
        };
        let t0 = std::time::Instant::now();
        let trace = ramsey_fid(&params, &h, &cfg, &ops, &EvolveOptions::default()).unwrap();
        let spec = spectrum(
            &trace,
            Apodization::Exponential { rate: 1.0 / 3.0 },
            4,
        )
        .unwrap();
        println!(
            "\n=== eta = {eta_deg} deg, Bmw = {bmw} G, t_pulse = {:.4} us ({:?}) ===",
            t_pulse,
            t0.elapsed()
        );
        // amplitudes at the predicted positions
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
        let max = amps.iter().cloned().fold(0.0, f64::max);
        println!("line   pos(MHz)  amp        rel");
        for (k, (&p, a)) in positions.iter().zip(&amps).enumerate() {
            let name = if k < 5 {
                format!("{}", k + 1)
            } else {
                "zqn".into()
            };
            println!("{name:>4} {:9.3} {a:10.5} {:8.3}", p.abs(), a / max);
        }
        // also list the extracted lines for reference
        let lines = extract_lines(&spec, LineCriteria::Threshold(0.03)).unwrap();
        print!("extracted: ");
        for l in &lines {
            print!("({:.2}, {:.3}) ", l.center, l.amplitude / max);
        }
        println!();
    }
}
