// Sensitivity of the m_s = 0 carbon splitting to field conventions.

use nv_core::hamiltonian::build_static_hamiltonian;
use nv_core::levels::diagonalize;
use nv_core::operators::build_operators;
use nv_core::params::{FieldVector, SpinSystemParams};
use nv_core::states::{ideal_lac_states, overlap};
use nv_core::DIM;

fn nu12(params: &SpinSystemParams, b: f64, theta_deg: f64, phi_deg: f64) -> (f64, f64) {
    let ops = build_operators();
    let field = FieldVector::new_unchecked(b, theta_deg.to_radians(), phi_deg.to_radians());
    let h = build_static_hamiltonian(params, &field, &ops).unwrap();
    let eig = diagonalize(&h).unwrap();
    let ideal = ideal_lac_states();
    let find = |s: &nv_core::CVec| {
        (0..DIM)
            .map(|j| (j, overlap(&eig.state(j), s)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0
    };
    let p1 = find(&ideal[0]);
    let p2 = find(&ideal[1]);
    let p3 = find(&ideal[2]);
    let p4 = find(&ideal[3]);
    (
        (eig.energies[p2] - eig.energies[p1]).abs(),
        (eig.energies[p4] - eig.energies[p3]).abs(),
    )
}

fn main() {
    let params = SpinSystemParams::default();
    for (b, th, ph) in [
        (28.9, 38.4, 0.0),
        (28.9, 38.32, 0.0),
        (28.9, 38.4, 180.0),
        (28.9, 30.0, 0.0),
        (28.9, 45.0, 0.0),
        (28.0, 38.4, 0.0),
        (30.0, 38.4, 0.0),
        (28.9, 90.0, 30.0),
    ] {
        let (n12, n34) = nu12(&params, b, th, ph);
        println!("B={b:5.1} theta={th:6.2} phi={ph:5.1}  nu12={n12:7.4}  nu34={n34:7.4}");
    }
    // sign of A1xz flipped
    let mut alt = SpinSystemParams::default();
    alt.a1[0][2] = -24.1;
    alt.a1[2][0] = -24.1;
    let (n12, n34) = nu12(&alt, 28.9, 38.4, 0.0);
    println!("A1xz=-24.1: nu12={n12:7.4}  nu34={n34:7.4}");
    // D measured for this center in the companion work is often 2872-2873
    for d in [2870.0, 2877.0] {
        let p = SpinSystemParams {
            d,
            ..Default::default()
        };
        let (n12, n34) = nu12(&p, 28.9, 38.4, 0.0);
        println!("D={d}: nu12={n12:7.4}  nu34={n34:7.4}");
    }
}
