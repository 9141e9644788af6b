// Transverse ZEFOZ behavior: tracked MW gradients vs theta, and the exact
// mirror symmetry of the spectrum.

use nv_core::hamiltonian::build_static_hamiltonian;
use nv_core::levels::{diagonalize, sweep_levels, SweepParameter, SweepSpec};
use nv_core::operators::build_operators;
use nv_core::params::{FieldVector, SpinSystemParams};
use nv_core::transitions::zefoz_gradient;

fn main() {
    let params = SpinSystemParams::default();
    let ops = build_operators();
    let phi = 30.0_f64.to_radians();
    let anchor = FieldVector::new_unchecked(28.9, 90.0_f64.to_radians(), phi);

    // spectrum mirror checks
    let spectrum = |theta_deg: f64, phi_deg: f64| -> Vec<f64> {
        let f = FieldVector::new_unchecked(28.9, theta_deg.to_radians(), phi_deg.to_radians());
        diagonalize(&build_static_hamiltonian(&params, &f, &ops).unwrap())
            .unwrap()
            .energies
    };
    let diff = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let s85 = spectrum(85.0, 30.0);
    let s95_same_phi = spectrum(95.0, 30.0);
    let s95_mirror = spectrum(95.0, 150.0);
    println!(
        "spectrum(85,30) vs (95,30): max diff {:.3e} MHz",
        diff(&s85, &s95_same_phi)
    );
    println!(
        "spectrum(85,30) vs (95,150): max diff {:.3e} MHz",
        diff(&s85, &s95_mirror)
    );
    let t85_90 = spectrum(85.0, 90.0);
    let t95_90 = spectrum(95.0, 90.0);
    println!(
        "phi=90: spectrum(85) vs spectrum(95): max diff {:.3e} MHz",
        diff(&t85_90, &t95_90)
    );

    // tracked MW transition gradients vs theta
    let spec = SweepSpec::linspace(
        SweepParameter::Theta,
        85.0_f64.to_radians(),
        95.0_f64.to_radians(),
        201,
    )
    .unwrap();
    let sweep = sweep_levels(&params, &anchor, &spec, &ops).unwrap();
    // raw pairs at the grid point closest to 90 deg
    let g90 = 100; // middle of 201 points
    let pairs_raw = [(2usize, 8usize), (2, 11), (5, 8), (5, 11)];
    let channels: Vec<(usize, usize)> = pairs_raw
        .iter()
        .map(|&(a, b)| {
            (
                sweep.channel_of_raw(g90, a),
                sweep.channel_of_raw(g90, b),
            )
        })
        .collect();

    for (pi, &(ca, cb)) in channels.iter().enumerate() {
        println!("--- transition raw(90)={:?} ---", pairs_raw[pi]);
        for g in (0..201).step_by(10) {
            let raw = (sweep.track_to_raw[g][ca], sweep.track_to_raw[g][cb]);
            let field =
                FieldVector::new_unchecked(28.9, spec.grid[g], phi);
            match zefoz_gradient(&params, &field, (raw.0.min(raw.1), raw.0.max(raw.1)), &ops) {
                Ok(grad) => println!(
                    "  theta {:6.2}  dB {:+8.4}  dth {:+9.3}  dphi {:+9.3}  norm {:9.3}",
                    spec.grid[g].to_degrees(),
                    grad.d_b,
                    grad.d_theta,
                    grad.d_phi,
                    grad.norm
                ),
                Err(e) => println!("  theta {:6.2}  gradient failed: {e}", spec.grid[g].to_degrees()),
            }
        }
    }
}
