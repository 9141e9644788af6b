// Gradient components at the LAC and tracking diagnostics.

use nv_core::hamiltonian::build_static_hamiltonian;
use nv_core::levels::{
    diagonalize, find_lac, sweep_levels, LevelPairSelector, SweepParameter, SweepSpec,
};
use nv_core::operators::build_operators;
use nv_core::params::{FieldVector, SpinSystemParams};
use nv_core::transitions::{identify_lac_levels, zefoz_gradient};
use nv_core::DIM;

fn main() {
    let params = SpinSystemParams::default();
    let ops = build_operators();
    let template = FieldVector::new(28.9, 0.0, 0.0).unwrap();
    let spec = SweepSpec::linspace(
        SweepParameter::Theta,
        36.0_f64.to_radians(),
        41.0_f64.to_radians(),
        51,
    )
    .unwrap();
    let report = find_lac(&params, &template, &spec, LevelPairSelector::IdealLacStates, &ops)
        .unwrap();
    let lac = report.field;
    let h = build_static_hamiltonian(&params, &lac, &ops).unwrap();
    let eig = diagonalize(&h).unwrap();
    let psi = identify_lac_levels(&eig);
    println!("theta* = {:.4} deg, psi = {:?}", lac.theta.to_degrees(), psi);

    for (name, a, b) in [
        ("nu12", psi[0], psi[1]),
        ("nu13", psi[0], psi[2]),
        ("nu23", psi[1], psi[2]),
        ("nu14", psi[0], psi[3]),
        ("nu24", psi[1], psi[3]),
        ("nu34", psi[2], psi[3]),
    ] {
        let g = zefoz_gradient(&params, &lac, (a, b), &ops).unwrap();
        println!(
            "{name}: dB = {:+9.4} MHz/G, dth = {:+9.4} MHz/rad, dphi = {:+9.4} MHz/rad, norm {:9.4} conv {}",
            g.d_b, g.d_theta, g.d_phi, g.norm, g.converged
        );
    }

    // individual level slopes vs theta (finite differences on matched levels)
    let h_step = 1e-4;
    let f_plus = FieldVector::new_unchecked(lac.b, lac.theta + h_step, lac.phi);
    let f_minus = FieldVector::new_unchecked(lac.b, lac.theta - h_step, lac.phi);
    let ep = diagonalize(&build_static_hamiltonian(&params, &f_plus, &ops).unwrap()).unwrap();
    let em = diagonalize(&build_static_hamiltonian(&params, &f_minus, &ops).unwrap()).unwrap();
    for k in [psi[0], psi[1], psi[2], psi[3]] {
        // match by overlap
        let refv = eig.state(k);
        let best = |e: &nv_core::levels::EigenSystem| {
            (0..DIM)
                .map(|j| (j, nv_core::states::overlap(&e.state(j), &refv)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
                .0
        };
        let slope = (ep.energies[best(&ep)] - em.energies[best(&em)]) / (2.0 * h_step);
        println!("dE/dtheta level {k}: {slope:+9.4} MHz/rad");
    }

    // where does each MW transition's theta-derivative cross zero?
    for (name, a, b) in [("nu13", psi[0], psi[2]), ("nu23", psi[1], psi[2]), ("nu14", psi[0], psi[3]), ("nu24", psi[1], psi[3])] {
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=60 {
            let th = (37.0 + i as f64 * 0.05).to_radians();
            let f = FieldVector::new_unchecked(28.9, th, 0.0);
            let g = zefoz_gradient(&params, &f, (a, b), &ops);
            // re-identify psi at each theta for a fair scan
            let _ = &g;
            if let Ok(g) = g {
                if let Some((pth, pg)) = prev {
                    if pg.signum() != g.d_theta.signum() {
                        println!("{name}: d_theta crosses zero near {:.3} deg", ((pth + th) / 2.0).to_degrees());
                    }
                }
                prev = Some((th, g.d_theta));
            }
        }
    }

    // tracking diagnostic for the no-hyperfine sweep
    let params0 = SpinSystemParams {
        p: 0.0,
        gamma_n1: 0.0,
        gamma_n2: 0.0,
        a1: [[0.0; 3]; 3],
        a2: [[0.0; 3]; 3],
        ..Default::default()
    };
    let template0 = FieldVector::new(50.0, 0.0, 0.0).unwrap();
    let spec0 = SweepSpec::linspace(SweepParameter::Theta, 0.0, std::f64::consts::FRAC_PI_2, 181).unwrap();
    match sweep_levels(&params0, &template0, &spec0, &ops) {
        Ok(sweep) => {
            let dtheta = spec0.grid[1] - spec0.grid[0];
            let bound = 2.0 * params0.gamma_e * 50.0 * dtheta;
            let mut max_jump: f64 = 0.0;
            let mut arg = (0, 0);
            for t in 0..DIM {
                for g in 1..spec0.grid.len() {
                    let de = (sweep.tracked_energy(g, t) - sweep.tracked_energy(g - 1, t)).abs();
                    if de > max_jump {
                        max_jump = de;
                        arg = (t, g);
                    }
                }
            }
            println!("max tracked jump {max_jump:.4} MHz at channel {} step {} (bound {bound:.4})", arg.0, arg.1);
            let g = arg.1;
            println!("energies at step {}: {:?}", g - 1, &sweep.systems[g - 1].energies[6..12]);
            println!("energies at step {}: {:?}", g, &sweep.systems[g].energies[6..12]);
        }
        Err(e) => println!("tracking failed: {e}"),
    }
}
