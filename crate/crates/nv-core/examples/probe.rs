// Scratch probe of the LAC physics; not part of the test suite.

use nv_core::hamiltonian::build_static_hamiltonian;
use nv_core::levels::{diagonalize, find_lac, LevelPairSelector, SweepParameter, SweepSpec};
use nv_core::operators::build_operators;
use nv_core::params::{FieldVector, SpinSystemParams};
use nv_core::states::{ideal_lac_states, overlap};
use nv_core::{C64, DIM};

fn main() {
    let params = SpinSystemParams::default();
    let ops = build_operators();
    let template = FieldVector::new(28.9, 0.0, 0.0).unwrap();
    let spec = SweepSpec::linspace(
        SweepParameter::Theta,
        36.0_f64.to_radians(),
        41.0_f64.to_radians(),
        101,
    )
    .unwrap();

    let t0 = std::time::Instant::now();
    let report = find_lac(&params, &template, &spec, LevelPairSelector::IdealLacStates, &ops)
        .unwrap();
    println!(
        "LAC: theta = {:.4} deg, gap = {:.4} MHz, pair channels {:?}, overlaps {:?}, boundary={}, elapsed {:?}",
        report.value.to_degrees(),
        report.gap_mhz,
        report.pair,
        report.overlaps,
        report.at_boundary,
        t0.elapsed()
    );
    println!(
        "2 gamma_e B cos(theta*) = {:.3} MHz",
        2.0 * params.gamma_e * 28.9 * report.value.cos()
    );

    // full diagnostics at the LAC
    let field = report.field;
    let h = build_static_hamiltonian(&params, &field, &ops).unwrap();
    let eig = diagonalize(&h).unwrap();
    let ideal = ideal_lac_states();

    let mut psi = [0usize; 4];
    for (k, ideal_state) in ideal.iter().enumerate() {
        let (best, ov) = (0..DIM)
            .map(|j| (j, overlap(&eig.state(j), ideal_state)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        psi[k] = best;
        println!(
            "psi{} -> level {:2}  E = {:10.4} MHz  overlap {:.4}  ms pops {:?}",
            k + 1,
            best,
            eig.energies[best],
            ov,
            eig.ms_populations[best].map(|p| (p * 1000.0).round() / 1000.0)
        );
    }
    println!(
        "nu(psi1 psi2) = {:.4} MHz   nu(psi3 psi4) = {:.4} MHz",
        (eig.energies[psi[1]] - eig.energies[psi[0]]).abs(),
        (eig.energies[psi[3]] - eig.energies[psi[2]]).abs()
    );
    println!(
        "E3 - E2 = {:.4}, E4 - E2 = {:.4}, E3 - E1 = {:.4}, E4 - E1 = {:.4} (carrier 2876.8?)",
        eig.energies[psi[2]] - eig.energies[psi[1]],
        eig.energies[psi[3]] - eig.energies[psi[1]],
        eig.energies[psi[2]] - eig.energies[psi[0]],
        eig.energies[psi[3]] - eig.energies[psi[0]]
    );

    let amp = |i: usize, j: usize, op: &nv_core::CMat| -> f64 {
        (eig.state(i).adjoint() * op * eig.state(j))[(0, 0)].norm()
    };
    for (name, a, b) in [
        ("psi2-psi3", psi[1], psi[2]),
        ("psi1-psi3", psi[0], psi[2]),
        ("psi2-psi4", psi[1], psi[3]),
        ("psi1-psi4", psi[0], psi[3]),
        ("psi3-psi4", psi[2], psi[3]),
        ("psi1-psi2", psi[0], psi[1]),
    ] {
        println!(
            "{name}: ax = {:.4}, ay = {:.4}, az = {:.4}",
            amp(a, b, &ops.sx),
            amp(a, b, &ops.sy),
            amp(a, b, &ops.sz)
        );
    }

    // energy-ordering check within the pairs
    println!(
        "psi order by energy: psi1 {} psi2 (m_s=0), psi3 {} psi4 (pm1)",
        if eig.energies[psi[0]] < eig.energies[psi[1]] { "<" } else { ">" },
        if eig.energies[psi[2]] < eig.energies[psi[3]] { "<" } else { ">" },
    );

    // low-lying spectrum for context
    println!("\nfull spectrum at the LAC:");
    for k in 0..DIM {
        let v = eig.state(k);
        let dominant: Vec<String> = (0..DIM)
            .filter(|&i| v[i].norm_sqr() > 0.1)
            .map(|i| format!("|{}:{:.2}|", i, v[i].norm_sqr()))
            .collect();
        println!(
            "  {:2}: {:10.4} MHz  {}",
            k,
            eig.energies[k],
            dominant.join(" ")
        );
    }
    let _ = C64::new(0.0, 0.0);
}
