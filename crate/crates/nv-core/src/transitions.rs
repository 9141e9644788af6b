//! Transition frequencies, dipole amplitudes |⟨i|S_α|j⟩|, selection-rule
//! classification, and ZEFOZ gradients of transition frequencies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::build_static_hamiltonian;
use crate::levels::{diagonalize, EigenSystem, Manifold, DEGENERACY_TOL};
use crate::operators::SpinOperatorSet;
use crate::params::{FieldVector, SpinSystemParams};
use crate::states::{ideal_lac_states, overlap};
use crate::{CMat, CVec, DIM};

/// Cartesian axis of a selection-rule label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Manifold character of a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionKind {
    /// m_s = 0 ↔ ±1, MW frequency range.
    Microwave,
    /// Within the m_s = ±1 manifold (RF range, zero-quantum in Ramsey spectra).
    RadioFrequency,
    /// Within the m_s = 0 manifold (nuclear, zero-quantum).
    Nuclear,
}

/// One transition between (possibly degenerate clusters of) levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionEntry {
    /// Representative raw level indices, ascending energy, i < j.
    pub i: usize,
    pub j: usize,
    /// Cluster sizes behind each representative (1 unless degenerate).
    pub multiplicity: (usize, usize),
    /// ν = E_j − E_i, MHz.
    pub frequency: f64,
    /// |⟨i|S_α|j⟩| for α = x, y, z; degenerate partners combined in
    /// quadrature, so each value is bounded by √2.
    pub amplitudes: [f64; 3],
    /// X/Y/Z label when a single component dominates.
    pub label: Option<Axis>,
    pub kind: TransitionKind,
}

impl TransitionEntry {
    pub fn a_x(&self) -> f64 {
        self.amplitudes[0]
    }
    pub fn a_y(&self) -> f64 {
        self.amplitudes[1]
    }
    pub fn a_z(&self) -> f64 {
        self.amplitudes[2]
    }
}

/// Options for [`transition_table`].
#[derive(Debug, Clone)]
pub struct TransitionOptions {
    /// Only include transitions among these raw levels (all when `None`).
    pub restrict: Option<Vec<usize>>,
    /// Levels closer than this are one cluster, MHz.
    pub degeneracy_tol: f64,
    /// Combine amplitudes of degenerate partners in quadrature. When false
    /// every raw pair becomes its own entry.
    pub collapse_degenerate: bool,
}

impl Default for TransitionOptions {
    fn default() -> Self {
        Self {
            restrict: None,
            degeneracy_tol: DEGENERACY_TOL,
            collapse_degenerate: true,
        }
    }
}

/// Amplitude above which a component counts as dominant for X/Y/Z labels.
pub const LABEL_DOMINANT: f64 = 0.5;
/// Amplitude below which the other components count as suppressed.
pub const LABEL_SUPPRESSED: f64 = 0.05;

/// All transition frequencies and dipole amplitudes at one field point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionTable {
    pub entries: Vec<TransitionEntry>,
}

impl TransitionTable {
    /// Entry connecting the clusters containing raw levels `a` and `b`.
    pub fn entry(&self, a: usize, b: usize) -> Option<&TransitionEntry> {
        let (lo, hi) = (a.min(b), a.max(b));
        self.entries.iter().find(|e| {
            (e.i..e.i + e.multiplicity.0).contains(&lo)
                && (e.j..e.j + e.multiplicity.1).contains(&hi)
        })
    }
}

fn raw_amplitude(eig: &EigenSystem, ops: &SpinOperatorSet, i: usize, j: usize) -> [f64; 3] {
    let vi = eig.states.column(i);
    let vj = eig.states.column(j);
    let mut a = [0.0; 3];
    for (k, op) in ops.electron().iter().enumerate() {
        a[k] = (vi.adjoint() * *op * vj)[(0, 0)].norm();
    }
    a
}

fn classify(a: &[f64; 3]) -> Option<Axis> {
    let axes = [Axis::X, Axis::Y, Axis::Z];
    for k in 0..3 {
        let others = [(k + 1) % 3, (k + 2) % 3];
        if a[k] > LABEL_DOMINANT && others.iter().all(|&o| a[o] < LABEL_SUPPRESSED) {
            return Some(axes[k]);
        }
    }
    None
}

fn kind_of(eig: &EigenSystem, i: usize, j: usize) -> TransitionKind {
    match (eig.manifold(i), eig.manifold(j)) {
        (Manifold::Zero, Manifold::Zero) => TransitionKind::Nuclear,
        (Manifold::PlusMinus, Manifold::PlusMinus) => TransitionKind::RadioFrequency,
        _ => TransitionKind::Microwave,
    }
}

/// Compute the transition table from an eigen-system at a single field point.
///
/// Degenerate clusters (per `opts.degeneracy_tol`) are merged: the entry's
/// amplitude is the quadrature sum over all cross pairs, its frequency the
/// difference of cluster mean energies.
pub fn transition_table(
    eig: &EigenSystem,
    ops: &SpinOperatorSet,
    opts: &TransitionOptions,
) -> TransitionTable {
    let included = |k: usize| opts.restrict.as_ref().map_or(true, |r| r.contains(&k));

    let clusters: Vec<Vec<usize>> = if opts.collapse_degenerate {
        eig.degenerate_clusters(opts.degeneracy_tol)
    } else {
        (0..DIM).map(|k| vec![k]).collect()
    };
    let clusters: Vec<Vec<usize>> = clusters
        .into_iter()
        .map(|c| c.into_iter().filter(|&k| included(k)).collect::<Vec<_>>())
        .filter(|c| !c.is_empty())
        .collect();

    let mean_energy =
        |c: &[usize]| c.iter().map(|&k| eig.energies[k]).sum::<f64>() / c.len() as f64;

    let mut entries = Vec::new();
    for (ci, cluster_i) in clusters.iter().enumerate() {
        for cluster_j in clusters.iter().skip(ci + 1) {
            let mut sq = [0.0; 3];
            for &i in cluster_i {
                for &j in cluster_j {
                    let a = raw_amplitude(eig, ops, i, j);
                    for k in 0..3 {
                        sq[k] += a[k] * a[k];
                    }
                }
            }
            let amplitudes = sq.map(f64::sqrt);
            let i = cluster_i[0];
            let j = cluster_j[0];
            entries.push(TransitionEntry {
                i,
                j,
                multiplicity: (cluster_i.len(), cluster_j.len()),
                frequency: mean_energy(cluster_j) - mean_energy(cluster_i),
                label: classify(&amplitudes),
                kind: kind_of(eig, i, j),
                amplitudes,
            });
        }
    }
    TransitionTable { entries }
}

/// Finite-difference gradient of one transition frequency with respect to
/// (B, θ, φ).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZefozGradient {
    /// ∂ν/∂B, MHz/G.
    pub d_b: f64,
    /// ∂ν/∂θ, MHz/rad.
    pub d_theta: f64,
    /// ∂ν/∂φ, MHz/rad.
    pub d_phi: f64,
    /// Euclidean norm of the three components.
    pub norm: f64,
    /// |g(h) − g(h/2)| per component, the step-halving check.
    pub step_check: [f64; 3],
    /// True when every component passed the 1% (or absolute-floor) agreement.
    pub converged: bool,
}

/// Default finite-difference steps: 0.01 G and 0.01°.
pub const GRADIENT_STEP_B: f64 = 0.01;
pub const GRADIENT_STEP_ANGLE: f64 = 0.01 * std::f64::consts::PI / 180.0;
/// Absolute floor for the step-halving agreement test, MHz per unit; at a
/// ZEFOZ point the gradient itself vanishes and a pure relative test would
/// compare rounding noise.
pub const GRADIENT_CHECK_FLOOR: f64 = 1e-4;

/// Frequency of the transition between the two levels best matching the
/// reference eigenvectors, at a perturbed field point.
fn matched_frequency(
    params: &SpinSystemParams,
    field: &FieldVector,
    refs: (&CVec, &CVec),
    ops: &SpinOperatorSet,
) -> Result<f64> {
    let h = build_static_hamiltonian(params, field, ops)?;
    let eig = diagonalize(&h)?;
    let best = |r: &CVec| -> (usize, f64) {
        (0..DIM)
            .map(|k| (k, overlap(&eig.state(k), r)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
    };
    let (a, ov_a) = best(refs.0);
    let (b, ov_b) = best(refs.1);
    if a == b || ov_a < 0.5 || ov_b < 0.5 {
        return Err(Error::TrackingFailure {
            grid_index: 0,
            level: if ov_a <= ov_b { 0 } else { 1 },
            best_overlap: ov_a.min(ov_b),
        });
    }
    Ok((eig.energies[b] - eig.energies[a]).abs())
}

/// Central-difference ZEFOZ gradient of the transition between raw levels
/// `pair` at `field`, with a Richardson half-step check.
///
/// Levels at perturbed points are re-matched to the unperturbed eigenvectors
/// by maximum overlap; near-exact degeneracy surfaces as
/// [`Error::TrackingFailure`].
pub fn zefoz_gradient(
    params: &SpinSystemParams,
    field: &FieldVector,
    pair: (usize, usize),
    ops: &SpinOperatorSet,
) -> Result<ZefozGradient> {
    let h = build_static_hamiltonian(params, field, ops)?;
    let eig = diagonalize(&h)?;
    let refs_owned = (eig.state(pair.0), eig.state(pair.1));
    let refs = (&refs_owned.0, &refs_owned.1);

    let perturb = |db: f64, dth: f64, dph: f64| {
        FieldVector::new_unchecked(field.b + db, field.theta + dth, field.phi + dph)
    };
    let central = |h_b: f64, h_th: f64, h_ph: f64| -> Result<f64> {
        let plus = matched_frequency(params, &perturb(h_b, h_th, h_ph), refs, ops)?;
        let minus = matched_frequency(params, &perturb(-h_b, -h_th, -h_ph), refs, ops)?;
        let step = h_b + h_th + h_ph; // exactly one is nonzero
        Ok((plus - minus) / (2.0 * step))
    };

    let steps = [
        (GRADIENT_STEP_B, 0.0, 0.0),
        (0.0, GRADIENT_STEP_ANGLE, 0.0),
        (0.0, 0.0, GRADIENT_STEP_ANGLE),
    ];
    let mut grad = [0.0; 3];
    let mut check = [0.0; 3];
    let mut converged = true;
    for (k, (hb, hth, hph)) in steps.iter().enumerate() {
        let g_full = central(*hb, *hth, *hph)?;
        let g_half = central(hb / 2.0, hth / 2.0, hph / 2.0)?;
        check[k] = (g_full - g_half).abs();
        if check[k] > f64::max(0.01 * g_half.abs(), GRADIENT_CHECK_FLOOR) {
            converged = false;
        }
        // Richardson extrapolation of the two central differences
        grad[k] = (4.0 * g_half - g_full) / 3.0;
    }

    Ok(ZefozGradient {
        d_b: grad[0],
        d_theta: grad[1],
        d_phi: grad[2],
        norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
        step_check: check,
        converged,
    })
}

/// Locate the ZEFOZ point of one transition: the polar angle inside `window`
/// (radians, containing `anchor.theta`) where the transition's gradient norm
/// is minimal.
///
/// The pair is given by raw indices at the anchor field and is followed
/// through fine tracked sweeps toward both window edges. The norm minimum is
/// bracketed on the scan grid and refined by golden-section search to ~1e-3°.
pub fn transition_zefoz_point(
    params: &SpinSystemParams,
    anchor: &FieldVector,
    pair: (usize, usize),
    window: (f64, f64),
    ops: &SpinOperatorSet,
) -> Result<(FieldVector, ZefozGradient)> {
    use crate::levels::{sweep_levels, SweepParameter, SweepSpec};

    if !(window.0 < anchor.theta && anchor.theta < window.1) {
        return Err(Error::InvalidParams(
            "zefoz window must contain the anchor angle".into(),
        ));
    }
    let step = 0.05_f64.to_radians();
    let pair = (pair.0.min(pair.1), pair.0.max(pair.1));

    // scan outward from the anchor in both directions, tracking the pair
    let mut scan: Vec<(f64, f64, (usize, usize))> = Vec::new(); // (theta, norm, raw pair)
    for edge in [window.0, window.1] {
        let n = ((edge - anchor.theta).abs() / step).ceil() as usize + 1;
        if n < 2 {
            continue;
        }
        let grid: Vec<f64> = (0..n)
            .map(|k| anchor.theta + (edge - anchor.theta) * k as f64 / (n - 1) as f64)
            .collect();
        let spec = SweepSpec {
            parameter: SweepParameter::Theta,
            grid,
        };
        let sweep = sweep_levels(params, anchor, &spec, ops)?;
        for g in 0..spec.grid.len() {
            let raw = (
                sweep.track_to_raw[g][pair.0],
                sweep.track_to_raw[g][pair.1],
            );
            let field = FieldVector::new_unchecked(anchor.b, spec.grid[g], anchor.phi);
            let grad = zefoz_gradient(params, &field, raw, ops)?;
            scan.push((spec.grid[g], grad.norm, raw));
        }
    }

    let &(theta_c, _, pair_c) = scan
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("scan is nonempty");

    // fixed reference vectors for level matching during refinement
    let h_c = build_static_hamiltonian(
        params,
        &FieldVector::new_unchecked(anchor.b, theta_c, anchor.phi),
        ops,
    )?;
    let eig_c = diagonalize(&h_c)?;
    let refs_owned = (eig_c.state(pair_c.0), eig_c.state(pair_c.1));
    let refs = (&refs_owned.0, &refs_owned.1);

    let eval = |theta: f64| -> Result<(f64, ZefozGradient)> {
        let field = FieldVector::new_unchecked(anchor.b, theta, anchor.phi);
        let h = build_static_hamiltonian(params, &field, ops)?;
        let eig = diagonalize(&h)?;
        let best = |r: &CVec| {
            (0..DIM)
                .map(|k| (k, overlap(&eig.state(k), r)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
                .0
        };
        let (a, b) = (best(refs.0), best(refs.1));
        let grad = zefoz_gradient(params, &field, (a.min(b), a.max(b)), ops)?;
        Ok((grad.norm, grad))
    };

    let (mut lo, mut hi) = ((theta_c - step).max(window.0), (theta_c + step).min(window.1));
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1)?.0;
    let mut f2 = eval(x2)?.0;
    let tol = 1e-3_f64.to_radians();
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1)?.0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2)?.0;
        }
    }
    let theta_star = 0.5 * (lo + hi);
    let (_, grad) = eval(theta_star)?;
    Ok((
        FieldVector::new_unchecked(anchor.b, theta_star, anchor.phi),
        grad,
    ))
}

/// Identify the numerical levels ψ₁..ψ₄ by greedy maximum overlap with the
/// ideal LAC states.
pub fn identify_lac_levels(eig: &EigenSystem) -> [usize; 4] {
    let ideal = ideal_lac_states();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (k, ideal_state) in ideal.iter().enumerate() {
        for level in 0..DIM {
            pairs.push((overlap(&eig.state(level), ideal_state), k, level));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut psi = [usize::MAX; 4];
    let mut taken = [false; DIM];
    for (_, k, level) in pairs {
        if psi[k] != usize::MAX || taken[level] {
            continue;
        }
        psi[k] = level;
        taken[level] = true;
    }
    psi
}

/// |⟨ψ_k(numerical)|ψ_k(ideal)⟩|² for k = 1..4 at a LAC-point eigen-system.
pub fn eq3_overlap(eig: &EigenSystem) -> [f64; 4] {
    let ideal = ideal_lac_states();
    let psi = identify_lac_levels(eig);
    let mut out = [0.0; 4];
    for k in 0..4 {
        let ov = overlap(&eig.state(psi[k]), &ideal[k]);
        out[k] = ov * ov;
    }
    out
}

/// Sum-rule defect for one axis: Σ_{ij} |⟨i|S_α|j⟩|² − trace(S_α²) over the
/// eigenbasis, which must vanish by completeness.
pub fn sum_rule_defect(eig: &EigenSystem, ops: &SpinOperatorSet, axis: usize) -> f64 {
    let op: &CMat = ops.electron()[axis];
    let m = eig.states.adjoint() * op * &eig.states;
    let total: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    (total - 12.0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::{find_lac, LevelPairSelector, SweepParameter, SweepSpec};
    use crate::operators::build_operators;
    use approx::assert_abs_diff_eq;

    fn lac_field() -> (SpinSystemParams, SpinOperatorSet, FieldVector) {
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
        let report =
            find_lac(&params, &template, &spec, LevelPairSelector::IdealLacStates, &ops).unwrap();
        (params, ops, report.field)
    }

    fn lac_eigensystem() -> (SpinSystemParams, SpinOperatorSet, FieldVector, EigenSystem, [usize; 4])
    {
        let (params, ops, field) = lac_field();
        let h = build_static_hamiltonian(&params, &field, &ops).unwrap();
        let eig = diagonalize(&h).unwrap();
        let psi = identify_lac_levels(&eig);
        (params, ops, field, eig, psi)
    }

    #[test]
    fn lac_selection_rules_match_reported_values() {
        let (_, ops, _, eig, psi) = lac_eigensystem();
        let table = transition_table(&eig, &ops, &TransitionOptions::default());

        let get = |a: usize, b: usize| table.entry(psi[a], psi[b]).unwrap();

        let t23 = get(1, 2);
        assert_abs_diff_eq!(t23.a_y(), 0.80, epsilon = 0.03);
        assert!(t23.a_x() < 0.05 && t23.a_z() < 0.05);
        assert_eq!(t23.label, Some(Axis::Y));
        assert_eq!(t23.kind, TransitionKind::Microwave);

        let t13 = get(0, 2);
        assert_abs_diff_eq!(t13.a_y(), 0.60, epsilon = 0.03);
        assert!(t13.a_x() < 0.05 && t13.a_z() < 0.05);
        assert_eq!(t13.label, Some(Axis::Y));

        let t24 = get(1, 3);
        assert_abs_diff_eq!(t24.a_x(), 0.80, epsilon = 0.03);
        assert!(t24.a_y() < 0.05 && t24.a_z() < 0.05);
        assert_eq!(t24.label, Some(Axis::X));

        let t14 = get(0, 3);
        assert_abs_diff_eq!(t14.a_x(), 0.60, epsilon = 0.03);
        assert!(t14.a_y() < 0.05 && t14.a_z() < 0.05);
        assert_eq!(t14.label, Some(Axis::X));

        let t34 = get(2, 3);
        assert_abs_diff_eq!(t34.a_z(), 1.00, epsilon = 0.02);
        assert!(t34.a_x() < 0.05 && t34.a_y() < 0.05);
        assert_eq!(t34.label, Some(Axis::Z));
        assert_eq!(t34.kind, TransitionKind::RadioFrequency);
        assert_abs_diff_eq!(t34.frequency, 1.7, epsilon = 0.3);
    }

    #[test]
    fn lac_labels_form_the_reported_pattern() {
        // two Y transitions share ψ3, two X transitions share ψ4, one Z
        // transition connects ψ3 and ψ4
        let (_, ops, _, eig, psi) = lac_eigensystem();
        let table = transition_table(&eig, &ops, &TransitionOptions::default());
        let label = |a: usize, b: usize| table.entry(psi[a], psi[b]).unwrap().label;
        assert_eq!(label(0, 2), Some(Axis::Y));
        assert_eq!(label(1, 2), Some(Axis::Y));
        assert_eq!(label(0, 3), Some(Axis::X));
        assert_eq!(label(1, 3), Some(Axis::X));
        assert_eq!(label(2, 3), Some(Axis::Z));
    }

    #[test]
    fn sum_rule_all_axes_at_several_fields() {
        let params = SpinSystemParams::default();
        let ops = build_operators();
        for theta_deg in [0.0, 38.4, 60.0, 90.0] {
            let field = FieldVector::new_unchecked(28.9, f64::to_radians(theta_deg), 0.5);
            let h = build_static_hamiltonian(&params, &field, &ops).unwrap();
            let eig = diagonalize(&h).unwrap();
            for axis in 0..3 {
                assert!(sum_rule_defect(&eig, &ops, axis) < 1e-9);
            }
        }
    }

    #[test]
    fn pairwise_sum_rule_from_table() {
        // Σ_{i<j} a² over raw pairs = (trace(S_α²) − Σ_i ⟨i|S_α|i⟩²)/2
        let (_, ops, _, eig, _) = lac_eigensystem();
        let opts = TransitionOptions {
            collapse_degenerate: false,
            ..Default::default()
        };
        let table = transition_table(&eig, &ops, &opts);
        for axis in 0..3 {
            let off: f64 = table
                .entries
                .iter()
                .map(|e| e.amplitudes[axis] * e.amplitudes[axis])
                .sum();
            let op = ops.electron()[axis];
            let diag: f64 = (0..DIM)
                .map(|k| {
                    let v = eig.states.column(k);
                    (v.adjoint() * op * v)[(0, 0)].norm_sqr()
                })
                .sum();
            assert_abs_diff_eq!(off, (12.0 - diag) / 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn amplitude_bounds_and_frequency_order() {
        let (_, ops, _, eig, _) = lac_eigensystem();
        let table = transition_table(&eig, &ops, &TransitionOptions::default());
        for e in &table.entries {
            assert!(e.frequency >= 0.0);
            for a in e.amplitudes {
                assert!(a <= std::f64::consts::SQRT_2 + 1e-9);
            }
        }
    }

    #[test]
    fn eq3_overlaps_exceed_bound_at_lac() {
        let (_, _, _, eig, _) = lac_eigensystem();
        for o in eq3_overlap(&eig) {
            assert!(o > 0.8, "overlap² {o} too small");
        }
    }

    #[test]
    fn eq3_overlap_gauge_invariant() {
        // global eigenvector phases leave |·|² unchanged
        let (_, _, _, mut eig, _) = lac_eigensystem();
        let before = eq3_overlap(&eig);
        for k in 0..DIM {
            let phase = crate::C64::from_polar(1.0, 0.37 * k as f64);
            let col = eig.states.column(k) * phase;
            eig.states.set_column(k, &col);
        }
        let after = eq3_overlap(&eig);
        for (b, a) in before.iter().zip(after) {
            assert_abs_diff_eq!(*b, a, epsilon = 1e-12);
        }
    }

    #[test]
    fn diagonal_a1_improves_eq3_overlap() {
        // removing the A1xz off-diagonal brings the eigenstates closer to the
        // ideal forms
        let (params, ops, _, eig, _) = lac_eigensystem();
        let physical = eq3_overlap(&eig);

        let mut modified = params.clone();
        modified.a1[0][2] = 0.0;
        modified.a1[2][0] = 0.0;
        let template = FieldVector::new(28.9, 0.0, 0.0).unwrap();
        let spec = SweepSpec::linspace(
            SweepParameter::Theta,
            30.0_f64.to_radians(),
            45.0_f64.to_radians(),
            61,
        )
        .unwrap();
        let report = find_lac(
            &modified,
            &template,
            &spec,
            LevelPairSelector::IdealLacStates,
            &ops,
        )
        .unwrap();
        let h = build_static_hamiltonian(&modified, &report.field, &ops).unwrap();
        let eig_mod = diagonalize(&h).unwrap();
        let ideal_case = eq3_overlap(&eig_mod);
        for (m, p) in ideal_case.iter().zip(physical) {
            assert!(
                m > &p,
                "overlap with diagonal A1 ({m}) should exceed physical ({p})"
            );
        }
    }

    #[test]
    fn zeeman_gradient_matches_analytic() {
        // no hyperfine, theta = 0: the m_s = 0 → −1 frequency slope is
        // exactly −γe
        let params = SpinSystemParams {
            p: 0.0,
            gamma_n1: 0.0,
            gamma_n2: 0.0,
            a1: [[0.0; 3]; 3],
            a2: [[0.0; 3]; 3],
            ..Default::default()
        };
        let ops = build_operators();
        let field = FieldVector::new(28.9, 0.0, 0.0).unwrap();
        // ascending at this field: [0..6] m_s = 0, [6..12] m_s = −1, [12..] +1
        let g = zefoz_gradient(&params, &field, (0, 6), &ops).unwrap();
        assert!(g.converged);
        assert_abs_diff_eq!(g.d_b, -params.gamma_e, epsilon = params.gamma_e * 1e-3);
    }

    #[test]
    fn phi_gradient_vanishes_at_pole() {
        let params = SpinSystemParams::default();
        let ops = build_operators();
        let field = FieldVector::new(28.9, 0.0, 0.0).unwrap();
        let g = zefoz_gradient(&params, &field, (0, 8), &ops).unwrap();
        assert!(g.d_phi.abs() < 1e-6, "azimuthal slope {}", g.d_phi);
    }

    #[test]
    fn lac_gradients_are_zefoz_suppressed() {
        // Each MW transition has its own stationary point inside the LAC
        // cluster (they spread over a few tenths of a degree around the pair
        // gap minimum); the ZEFOZ comparison against θ = 30° is made there.
        let (params, ops, lac_field, eig, psi) = lac_eigensystem();
        let _ = eig;
        let ref_field = FieldVector::new(28.9, 30.0_f64.to_radians(), 0.0).unwrap();
        let psi_ref = track_levels_between(&params, &lac_field, &ref_field, &psi, &ops);
        let window = (37.5_f64.to_radians(), 39.5_f64.to_radians());

        for (a, b) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            let (zefoz_field, g_lac) =
                transition_zefoz_point(&params, &lac_field, (psi[a], psi[b]), window, &ops)
                    .unwrap();
            let g_ref =
                zefoz_gradient(&params, &ref_field, (psi_ref[a], psi_ref[b]), &ops).unwrap();
            assert!(
                g_lac.norm < 0.02 * g_ref.norm,
                "transition ψ{}ψ{}: |∇ν| = {:.4} at its ZEFOZ point vs {:.4} at 30°",
                a + 1,
                b + 1,
                g_lac.norm,
                g_ref.norm
            );
            // all four stationary points sit within the LAC cluster
            let dev = (zefoz_field.theta.to_degrees() - 38.4).abs();
            assert!(dev < 0.3, "ZEFOZ point {dev}° away from 38.4°");
        }
    }

    /// Follow levels from one field point to another through a theta sweep.
    fn track_levels_between(
        params: &SpinSystemParams,
        from: &FieldVector,
        to: &FieldVector,
        levels: &[usize; 4],
        ops: &SpinOperatorSet,
    ) -> [usize; 4] {
        use crate::levels::sweep_levels;
        let spec = SweepSpec {
            parameter: SweepParameter::Theta,
            grid: (0..=100)
                .map(|k| from.theta + (to.theta - from.theta) * k as f64 / 100.0)
                .collect(),
        };
        let sweep = sweep_levels(params, from, &spec, ops).unwrap();
        let n = spec.grid.len() - 1;
        let mut out = [0usize; 4];
        for (k, &raw) in levels.iter().enumerate() {
            let channel = sweep.channel_of_raw(0, raw);
            out[k] = sweep.track_to_raw[n][channel];
        }
        out
    }
}
