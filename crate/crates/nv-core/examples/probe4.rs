// Transverse-LAC (theta = 90 deg) structure: level layout, MW amplitudes,
// gap symmetry, gradient behavior.

use nv_core::hamiltonian::build_static_hamiltonian;
use nv_core::levels::{diagonalize, Manifold};
use nv_core::operators::build_operators;
use nv_core::params::{FieldVector, SpinSystemParams};
use nv_core::transitions::{transition_table, TransitionOptions};
use nv_core::DIM;

fn main() {
    let params = SpinSystemParams::default();
    let ops = build_operators();
    let phi = 30.0_f64.to_radians();

    for theta_deg in [89.9, 90.0] {
        let field = FieldVector::new_unchecked(28.9, f64::to_radians(theta_deg), phi);
        let h = build_static_hamiltonian(&params, &field, &ops).unwrap();
        let eig = diagonalize(&h).unwrap();
        println!("--- theta = {theta_deg} deg, phi = 30 deg ---");
        for k in 0..DIM {
            println!(
                "  {:2}: {:10.4} MHz  {:?}  p0={:.3}",
                k,
                eig.energies[k],
                eig.manifold(k),
                eig.ms_populations[k][1]
            );
        }
        let table = transition_table(&eig, &ops, &TransitionOptions::default());
        println!("  strongest MW lines:");
        let mut mw: Vec<_> = table
            .entries
            .iter()
            .filter(|e| {
                matches!(
                    (eig.manifold(e.i), eig.manifold(e.j)),
                    (Manifold::Zero, Manifold::PlusMinus) | (Manifold::PlusMinus, Manifold::Zero)
                )
            })
            .collect();
        mw.sort_by(|a, b| {
            let sa: f64 = a.amplitudes.iter().map(|x| x * x).sum();
            let sb: f64 = b.amplitudes.iter().map(|x| x * x).sum();
            sb.total_cmp(&sa)
        });
        for e in mw.iter().take(8) {
            println!(
                "    {}-{} (x{} x{})  nu = {:9.3}  ax={:.3} ay={:.3} az={:.3} {:?}",
                e.i, e.j, e.multiplicity.0, e.multiplicity.1, e.frequency, e.a_x(), e.a_y(), e.a_z(), e.label
            );
        }
    }

    // gap symmetry about 90 deg: pair = two pm1 levels that anti-cross
    // identify at 89.5 via min gap among pm1-manifold adjacent levels
    let f0 = FieldVector::new_unchecked(28.9, 89.5_f64.to_radians(), phi);
    let h0 = build_static_hamiltonian(&params, &f0, &ops).unwrap();
    let e0 = diagonalize(&h0).unwrap();
    let pm1: Vec<usize> = (0..DIM).filter(|&k| e0.manifold(k) == Manifold::PlusMinus).collect();
    let mut best = (0usize, 0usize, f64::INFINITY);
    for w in pm1.windows(2) {
        let gap = e0.energies[w[1]] - e0.energies[w[0]];
        if gap < best.2 {
            best = (w[0], w[1], gap);
        }
    }
    println!("pm1 min-gap pair at 89.5deg: {:?}", best);

    // follow that pair's gap across 90 (match by overlap from previous point)
    let mut refs = (e0.state(best.0), e0.state(best.1));
    println!("theta  gap(theta)         gap(180-theta)");
    let mut gaps = std::collections::BTreeMap::new();
    let mut thetas: Vec<f64> = Vec::new();
    for k in 0..=40 {
        thetas.push(89.0 + 0.05 * k as f64);
    }
    for &t in &thetas {
        let f = FieldVector::new_unchecked(28.9, t.to_radians(), phi);
        let h = build_static_hamiltonian(&params, &f, &ops).unwrap();
        let e = diagonalize(&h).unwrap();
        // two largest projections onto the pair subspace
        let mut proj: Vec<(f64, usize)> = (0..DIM)
            .map(|k| {
                let v = e.state(k);
                (refs.0.dotc(&v).norm_sqr() + refs.1.dotc(&v).norm_sqr(), k)
            })
            .collect();
        proj.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (a, b) = (proj[0].1.min(proj[1].1), proj[0].1.max(proj[1].1));
        let gap = e.energies[b] - e.energies[a];
        gaps.insert((t * 1000.0).round() as i64, gap);
        refs = (e.state(a), e.state(b));
    }
    for k in 0..=20 {
        let t = 89.0 + 0.05 * k as f64;
        let tm = 180.0 - t;
        let g1 = gaps[&((t * 1000.0).round() as i64)];
        let g2 = gaps.get(&((tm * 1000.0).round() as i64));
        if let Some(g2) = g2 {
            println!("{t:7.3}  {g1:12.6}  {g2:12.6}  diff {:9.2e}", (g1 - g2).abs());
        }
    }
}
