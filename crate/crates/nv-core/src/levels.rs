//! Eigen-decomposition, level tracking across field sweeps, and location of
//! level anti-crossings by gap minimization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::build_static_hamiltonian;
use crate::operators::{hermiticity_defect, SpinOperatorSet};
use crate::params::{FieldVector, SpinSystemParams};
use crate::states::{ideal_lac_states, overlap};
use crate::{C64, CMat, CVec, DIM};

/// Relative Hermiticity defect above which a matrix is rejected.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Two levels closer than this are treated as degenerate, MHz.
pub const DEGENERACY_TOL: f64 = 1e-6;
/// Tracking assignments with best overlap below this signal a too-coarse grid.
pub const TRACKING_MIN_OVERLAP: f64 = 0.5;

/// Dominant electron-spin character of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Manifold {
    /// m_s = 0 dominant.
    Zero,
    /// m_s = ±1 dominant (the two hybridize at the LACs).
    PlusMinus,
}

/// Sorted eigen-decomposition of an 18×18 Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Eigenvalues, MHz, ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors as matrix columns, ordered like `energies`.
    pub states: CMat,
    /// Electron populations (p_plus, p_zero, p_minus) per level.
    pub ms_populations: Vec<[f64; 3]>,
}

impl EigenSystem {
    /// Eigenvector of level `k` as a column view.
    pub fn state(&self, k: usize) -> CVec {
        self.states.column(k).into_owned()
    }

    /// Manifold tag of level `k`.
    pub fn manifold(&self, k: usize) -> Manifold {
        if self.ms_populations[k][1] >= 0.5 {
            Manifold::Zero
        } else {
            Manifold::PlusMinus
        }
    }

    /// Max eigen-residual ‖H·v − E·v‖ over all levels.
    pub fn max_residual(&self, h: &CMat) -> f64 {
        (0..DIM)
            .map(|k| {
                let v = self.states.column(k);
                let r = h * v - v * C64::new(self.energies[k], 0.0);
                r.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Max deviation of ⟨v_i|v_j⟩ from δ_ij.
    pub fn max_orthonormality_defect(&self) -> f64 {
        let gram = self.states.adjoint() * &self.states;
        let mut defect: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                let want = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((gram[(i, j)] - C64::new(want, 0.0)).norm());
            }
        }
        defect
    }

    /// Indices grouped into clusters of levels within `tol` MHz of their
    /// neighbor, ascending.
    pub fn degenerate_clusters(&self, tol: f64) -> Vec<Vec<usize>> {
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for k in 0..DIM {
            match clusters.last_mut() {
                Some(c) if self.energies[k] - self.energies[*c.last().unwrap()] < tol => {
                    c.push(k)
                }
                _ => clusters.push(vec![k]),
            }
        }
        clusters
    }
}

/// Eigen-decomposition with ascending eigenvalues and orthonormal vectors.
///
/// Rejects matrices that are not Hermitian within [`HERMITICITY_TOL`].
pub fn diagonalize(h: &CMat) -> Result<EigenSystem> {
    let defect = hermiticity_defect(h);
    if defect > HERMITICITY_TOL {
        return Err(Error::NonHermitian { residual: defect });
    }
    let eig = h
        .clone()
        .try_symmetric_eigen(f64::EPSILON.sqrt() * 1e-8, 100_000)
        .ok_or(Error::EigenFailed)?;

    let mut order: Vec<usize> = (0..DIM).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut states = CMat::zeros(DIM, DIM);
    for (dst, &src) in order.iter().enumerate() {
        states.set_column(dst, &eig.eigenvectors.column(src));
    }
    let ms_populations = (0..DIM)
        .map(|k| {
            let col = states.column(k);
            let mut p = [0.0; 3];
            for (i, z) in col.iter().enumerate() {
                p[i / 6] += z.norm_sqr();
            }
            p
        })
        .collect();
    Ok(EigenSystem {
        energies,
        states,
        ms_populations,
    })
}

/// Swept field parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    B,
    Theta,
    Phi,
}

impl SweepParameter {
    pub fn apply(&self, template: &FieldVector, value: f64) -> FieldVector {
        let mut f = *template;
        match self {
            SweepParameter::B => f.b = value,
            SweepParameter::Theta => f.theta = value,
            SweepParameter::Phi => f.phi = value,
        }
        f
    }
}

/// A strictly monotone grid over one field parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    /// Grid values in core units (G or rad).
    pub grid: Vec<f64>,
}

impl SweepSpec {
    /// Uniform grid from `start` to `stop` inclusive with `n` points.
    pub fn linspace(parameter: SweepParameter, start: f64, stop: f64, n: usize) -> Result<Self> {
        if n < 2 || start == stop {
            return Err(Error::BadGrid { min: 2 });
        }
        let step = (stop - start) / (n - 1) as f64;
        let grid = (0..n).map(|k| start + step * k as f64).collect();
        Ok(Self { parameter, grid })
    }

    fn validate(&self) -> Result<()> {
        if self.grid.len() < 2 {
            return Err(Error::BadGrid { min: 2 });
        }
        let increasing = self.grid.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::BadGrid { min: 2 });
        }
        Ok(())
    }
}

/// Eigen-systems along a sweep with continuity-tracked level identities.
#[derive(Debug, Clone)]
pub struct LevelSweep {
    pub spec: SweepSpec,
    /// Raw ascending eigen-system at each grid point.
    pub systems: Vec<EigenSystem>,
    /// Per grid point, `track_to_raw[g][t]` is the raw index that tracked
    /// channel `t` occupies. The first point is the identity.
    pub track_to_raw: Vec<[usize; DIM]>,
}

impl LevelSweep {
    /// Energy of tracked channel `t` at grid point `g`.
    pub fn tracked_energy(&self, g: usize, t: usize) -> f64 {
        self.systems[g].energies[self.track_to_raw[g][t]]
    }

    /// Eigenvector of tracked channel `t` at grid point `g`.
    pub fn tracked_state(&self, g: usize, t: usize) -> CVec {
        self.systems[g].state(self.track_to_raw[g][t])
    }

    /// Tracked channel occupying raw index `raw` at grid point `g`.
    pub fn channel_of_raw(&self, g: usize, raw: usize) -> usize {
        self.track_to_raw[g]
            .iter()
            .position(|&r| r == raw)
            .expect("track_to_raw is a permutation")
    }
}

/// Greedy maximum-overlap assignment between the columns of two unitaries.
///
/// Exactly degenerate levels carry an arbitrary basis, so the quality of an
/// assignment is the projection of the previous eigenvector onto the whole
/// degenerate cluster of the candidate; individual overlaps only break ties
/// within a cluster. Returns `assign[prev_raw] = current_raw` together with
/// the worst assignment quality.
fn match_levels(prev: &CMat, cur: &EigenSystem) -> ([usize; DIM], f64, usize) {
    let gram = prev.adjoint() * &cur.states;
    let clusters = cur.degenerate_clusters(DEGENERACY_TOL);
    let mut cluster_of = [0usize; DIM];
    for (ci, c) in clusters.iter().enumerate() {
        for &k in c {
            cluster_of[k] = ci;
        }
    }
    // projection of each previous vector onto each current cluster subspace
    let mut proj = vec![[0.0f64; DIM]; DIM]; // [prev][cluster]
    for p in 0..DIM {
        for (ci, c) in clusters.iter().enumerate() {
            proj[p][ci] = c
                .iter()
                .map(|&k| gram[(p, k)].norm_sqr())
                .sum::<f64>()
                .sqrt();
        }
    }

    let mut pairs: Vec<(f64, f64, usize, usize)> = Vec::with_capacity(DIM * DIM);
    for p in 0..DIM {
        for c in 0..DIM {
            pairs.push((proj[p][cluster_of[c]], gram[(p, c)].norm(), p, c));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));

    let mut assign = [usize::MAX; DIM];
    let mut taken = [false; DIM];
    let mut worst = f64::INFINITY;
    let mut worst_channel = 0;
    let mut assigned = 0;
    for (quality, _, p, c) in pairs {
        if assign[p] != usize::MAX || taken[c] {
            continue;
        }
        assign[p] = c;
        taken[c] = true;
        if quality < worst {
            worst = quality;
            worst_channel = p;
        }
        assigned += 1;
        if assigned == DIM {
            break;
        }
    }
    (assign, worst, worst_channel)
}

/// Diagonalize along a sweep and track levels by eigenvector continuity.
///
/// Grid points are evaluated in parallel; the greedy overlap assignment then
/// runs sequentially in grid order, so curves stay continuous through
/// anti-crossings. Fails with [`Error::TrackingFailure`] when every candidate
/// for some level has overlap below [`TRACKING_MIN_OVERLAP`].
pub fn sweep_levels(
    params: &SpinSystemParams,
    field_template: &FieldVector,
    spec: &SweepSpec,
    ops: &SpinOperatorSet,
) -> Result<LevelSweep> {
    spec.validate()?;
    let systems: Vec<EigenSystem> = spec
        .grid
        .par_iter()
        .map(|&x| {
            let field = spec.parameter.apply(field_template, x);
            let h = build_static_hamiltonian(params, &field, ops)?;
            diagonalize(&h)
        })
        .collect::<Result<_>>()?;

    let mut track_to_raw: Vec<[usize; DIM]> = Vec::with_capacity(spec.grid.len());
    let mut identity = [0usize; DIM];
    for (i, slot) in identity.iter_mut().enumerate() {
        *slot = i;
    }
    track_to_raw.push(identity);

    for g in 1..systems.len() {
        let (assign_prev_raw, worst, worst_prev) =
            match_levels(&systems[g - 1].states, &systems[g]);
        if worst < TRACKING_MIN_OVERLAP {
            let channel = track_to_raw[g - 1]
                .iter()
                .position(|&r| r == worst_prev)
                .unwrap();
            return Err(Error::TrackingFailure {
                grid_index: g,
                level: channel,
                best_overlap: worst,
            });
        }
        let prev_map = track_to_raw[g - 1];
        let mut map = [0usize; DIM];
        for t in 0..DIM {
            map[t] = assign_prev_raw[prev_map[t]];
        }
        track_to_raw.push(map);
    }

    Ok(LevelSweep {
        spec: spec.clone(),
        systems,
        track_to_raw,
    })
}

/// How the anti-crossing pair is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelPairSelector {
    /// Explicit tracked channels.
    TrackedPair(usize, usize),
    /// The two m_s = ±1 levels best matching the ideal hybridized states
    /// ψ₃, ψ₄ at the grid point where that match is strongest.
    IdealLacStates,
}

/// Result of a LAC search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LacReport {
    /// Swept parameter.
    pub parameter: SweepParameter,
    /// Parameter value at the gap minimum, core units (G or rad).
    pub value: f64,
    /// Field at the minimum.
    pub field: FieldVector,
    /// Minimum gap, MHz.
    pub gap_mhz: f64,
    /// Tracked channels of the anti-crossing pair.
    pub pair: (usize, usize),
    /// |⟨ψ_lower|ψ₃_ideal⟩| and |⟨ψ_upper|ψ₄_ideal⟩| at the minimum
    /// (assignment by best match).
    pub overlaps: [f64; 2],
    /// True when the grid minimum sat on a sweep boundary and no interior
    /// bracket existed.
    pub at_boundary: bool,
}

/// Golden-section refinement tolerance for angle sweeps, rad (≈ 1e-3 deg).
pub const LAC_TOL_ANGLE: f64 = 1.0e-3 * std::f64::consts::PI / 180.0;
/// Golden-section refinement tolerance for field sweeps, G.
pub const LAC_TOL_FIELD: f64 = 1.0e-3;

fn pair_gap_at(
    params: &SpinSystemParams,
    template: &FieldVector,
    parameter: SweepParameter,
    x: f64,
    refs: (&CVec, &CVec),
    ops: &SpinOperatorSet,
) -> Result<(f64, EigenSystem, usize, usize)> {
    let field = parameter.apply(template, x);
    let h = build_static_hamiltonian(params, &field, ops)?;
    let eig = diagonalize(&h)?;
    // the two eigenvectors spanning the reference pair subspace; stable even
    // while the pair hybridizes internally
    let mut proj: Vec<(f64, usize)> = (0..DIM)
        .map(|k| {
            let v = eig.states.column(k);
            let p = refs.0.dotc(&v).norm_sqr() + refs.1.dotc(&v).norm_sqr();
            (p, k)
        })
        .collect();
    proj.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut a, mut b) = (proj[0].1, proj[1].1);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let gap = eig.energies[b] - eig.energies[a];
    Ok((gap, eig, a, b))
}

/// Locate a level anti-crossing: bracket the tracked-gap minimum on the sweep
/// grid, then refine by golden-section search.
///
/// Resolution is [`LAC_TOL_ANGLE`] for angle sweeps and [`LAC_TOL_FIELD`] for
/// field sweeps. If the grid minimum sits on a boundary the boundary point is
/// reported with `at_boundary = true`.
pub fn find_lac(
    params: &SpinSystemParams,
    field_template: &FieldVector,
    spec: &SweepSpec,
    selector: LevelPairSelector,
    ops: &SpinOperatorSet,
) -> Result<LacReport> {
    let sweep = sweep_levels(params, field_template, spec, ops)?;
    let n = spec.grid.len();

    let (ch_a, ch_b) = match selector {
        LevelPairSelector::TrackedPair(a, b) => (a.min(b), a.max(b)),
        LevelPairSelector::IdealLacStates => {
            let ideal = ideal_lac_states();
            let mut best: Option<(f64, usize, usize, usize)> = None;
            for g in 0..n {
                let eig = &sweep.systems[g];
                let score = |ideal_state: &CVec| -> (f64, usize) {
                    (0..DIM)
                        .map(|k| (overlap(&eig.state(k), ideal_state), k))
                        .max_by(|a, b| a.0.total_cmp(&b.0))
                        .unwrap()
                };
                let (o3, raw3) = score(&ideal[2]);
                let (o4, raw4) = score(&ideal[3]);
                if raw3 == raw4 {
                    continue;
                }
                let q = o3.min(o4);
                if best.map_or(true, |(bq, ..)| q > bq) {
                    best = Some((q, g, raw3, raw4));
                }
            }
            let (_, g, raw3, raw4) =
                best.ok_or_else(|| Error::InvalidParams("no ideal-state match in sweep".into()))?;
            (
                sweep.channel_of_raw(g, raw3.min(raw4)),
                sweep.channel_of_raw(g, raw3.max(raw4)),
            )
        }
    };

    let gap_at = |g: usize| (sweep.tracked_energy(g, ch_a) - sweep.tracked_energy(g, ch_b)).abs();
    let min_idx = (0..n)
        .min_by(|&a, &b| gap_at(a).total_cmp(&gap_at(b)))
        .unwrap();

    let ideal = ideal_lac_states();
    let report_at = |x: f64,
                     gap: f64,
                     eig: &EigenSystem,
                     a: usize,
                     b: usize,
                     at_boundary: bool| {
        let va = eig.state(a);
        let vb = eig.state(b);
        // match (ψ3, ψ4) to (lower, upper) by best total overlap
        let direct = overlap(&va, &ideal[2]) + overlap(&vb, &ideal[3]);
        let swapped = overlap(&va, &ideal[3]) + overlap(&vb, &ideal[2]);
        let overlaps = if direct >= swapped {
            [overlap(&va, &ideal[2]), overlap(&vb, &ideal[3])]
        } else {
            [overlap(&va, &ideal[3]), overlap(&vb, &ideal[2])]
        };
        LacReport {
            parameter: spec.parameter,
            value: x,
            field: spec.parameter.apply(field_template, x),
            gap_mhz: gap,
            pair: (ch_a, ch_b),
            overlaps,
            at_boundary,
        }
    };

    let refs_owned = (
        sweep.tracked_state(min_idx, ch_a),
        sweep.tracked_state(min_idx, ch_b),
    );
    let refs = (&refs_owned.0, &refs_owned.1);

    if min_idx == 0 || min_idx == n - 1 {
        let x = spec.grid[min_idx];
        let (gap, eig, a, b) = pair_gap_at(params, field_template, spec.parameter, x, refs, ops)?;
        return Ok(report_at(x, gap, &eig, a, b, true));
    }

    let tol = match spec.parameter {
        SweepParameter::B => LAC_TOL_FIELD,
        _ => LAC_TOL_ANGLE,
    };
    let eval = |x: f64| pair_gap_at(params, field_template, spec.parameter, x, refs, ops);

    // golden-section on the bracketing interval
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (
        spec.grid[min_idx - 1].min(spec.grid[min_idx + 1]),
        spec.grid[min_idx - 1].max(spec.grid[min_idx + 1]),
    );
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1)?.0;
    let mut f2 = eval(x2)?.0;
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
    let x = 0.5 * (lo + hi);
    let (gap, eig, a, b) = eval(x)?;
    Ok(report_at(x, gap, &eig, a, b, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::build_operators;
    use approx::assert_abs_diff_eq;

    fn default_setup() -> (SpinSystemParams, SpinOperatorSet) {
        (SpinSystemParams::default(), build_operators())
    }

    #[test]
    fn diagonalize_d_only() {
        let (_, ops) = default_setup();
        let h = &ops.sz * &ops.sz * C64::new(2870.0, 0.0);
        let eig = diagonalize(&h).unwrap();
        for k in 0..6 {
            assert_abs_diff_eq!(eig.energies[k], 0.0, epsilon = 1e-9);
        }
        for k in 6..18 {
            assert_abs_diff_eq!(eig.energies[k], 2870.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn diagonalize_rejects_non_hermitian() {
        let mut h = CMat::zeros(DIM, DIM);
        h[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            diagonalize(&h),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn eigen_invariants_at_field_points() {
        let (params, ops) = default_setup();
        for theta_deg in [0.0, 38.4, 60.0, 90.0] {
            let field = FieldVector::new_unchecked(28.9, f64::to_radians(theta_deg), 0.3);
            let h = build_static_hamiltonian(&params, &field, &ops).unwrap();
            let eig = diagonalize(&h).unwrap();
            let h_norm = crate::operators::fro_norm(&h);
            assert!(eig.max_residual(&h) < 1e-9 * h_norm);
            assert!(eig.max_orthonormality_defect() < 1e-10);
            let sum: f64 = eig.energies.iter().sum();
            assert_abs_diff_eq!(sum, 12.0 * (params.d + params.p), epsilon = 1e-8);
        }
    }

    #[test]
    fn zeeman_sweep_tracks_smoothly() {
        // no hyperfine: tracked energies obey |ΔE| ≤ 2 γe B Δθ per step
        let params = SpinSystemParams {
            p: 0.0,
            gamma_n1: 0.0,
            gamma_n2: 0.0,
            a1: [[0.0; 3]; 3],
            a2: [[0.0; 3]; 3],
            ..Default::default()
        };
        let ops = build_operators();
        let template = FieldVector::new(50.0, 0.0, 0.0).unwrap();
        let spec = SweepSpec::linspace(
            SweepParameter::Theta,
            0.0,
            std::f64::consts::FRAC_PI_2,
            181,
        )
        .unwrap();
        let sweep = sweep_levels(&params, &template, &spec, &ops).unwrap();
        let dtheta = spec.grid[1] - spec.grid[0];
        let bound = 2.0 * params.gamma_e * template.b * dtheta;
        for t in 0..DIM {
            for g in 1..spec.grid.len() {
                let de = (sweep.tracked_energy(g, t) - sweep.tracked_energy(g - 1, t)).abs();
                assert!(
                    de <= bound * 1.001,
                    "channel {t} jumped {de} MHz at step {g} (bound {bound})"
                );
            }
        }
    }

    #[test]
    fn spectrum_mirror_symmetry() {
        // the hyperfine tensors admit exactly one mirror plane, so the
        // spectrum obeys E(θ, φ) = E(180°−θ, 180°−φ); at φ = 90° the map
        // fixes φ and every level is even about θ = 90°
        let (params, ops) = default_setup();
        let energies = |theta_deg: f64, phi_deg: f64| {
            let f = FieldVector::new_unchecked(
                28.9,
                theta_deg.to_radians(),
                phi_deg.to_radians(),
            );
            diagonalize(&build_static_hamiltonian(&params, &f, &ops).unwrap())
                .unwrap()
                .energies
        };
        for (a, b) in [
            ((85.0, 90.0), (95.0, 90.0)),
            ((88.5, 90.0), (91.5, 90.0)),
            ((85.0, 30.0), (95.0, 150.0)),
            ((38.4, 0.0), (141.6, 180.0)),
        ] {
            let ea = energies(a.0, a.1);
            let eb = energies(b.0, b.1);
            for (x, y) in ea.iter().zip(&eb) {
                assert!(
                    (x - y).abs() < 1e-6,
                    "E({:?}) != E({:?}): {x} vs {y}",
                    a,
                    b
                );
            }
        }
    }

    #[test]
    fn transverse_gap_symmetric_at_phi_90() {
        // tracked anti-crossing gap is even about θ = 90° on the symmetry
        // azimuth
        let (params, ops) = default_setup();
        let phi = std::f64::consts::FRAC_PI_2;
        let template = FieldVector::new_unchecked(28.9, std::f64::consts::FRAC_PI_2, phi);
        let spec = SweepSpec::linspace(
            SweepParameter::Theta,
            f64::to_radians(88.0),
            f64::to_radians(92.0),
            81,
        )
        .unwrap();
        let sweep = sweep_levels(&params, &template, &spec, &ops).unwrap();
        // channel pair with the smallest gap at the middle grid point
        let mid = 40;
        let eig = &sweep.systems[mid];
        let (mut a, mut b, mut gap) = (0, 1, f64::INFINITY);
        for k in 6..DIM - 1 {
            let g = eig.energies[k + 1] - eig.energies[k];
            if g < gap {
                gap = g;
                a = k;
                b = k + 1;
            }
        }
        let (ch_a, ch_b) = (sweep.channel_of_raw(mid, a), sweep.channel_of_raw(mid, b));
        for off in 1..=40 {
            let g_lo =
                (sweep.tracked_energy(mid - off, ch_b) - sweep.tracked_energy(mid - off, ch_a))
                    .abs();
            let g_hi =
                (sweep.tracked_energy(mid + off, ch_b) - sweep.tracked_energy(mid + off, ch_a))
                    .abs();
            assert!(
                (g_lo - g_hi).abs() < 1e-6,
                "gap asymmetric at ±{off}: {g_lo} vs {g_hi}"
            );
        }
    }

    #[test]
    fn reversed_grid_reproduces_pairing() {
        let (params, ops) = default_setup();
        let template = FieldVector::new(28.9, 0.0, 0.0).unwrap();
        let fwd = SweepSpec::linspace(
            SweepParameter::Theta,
            f64::to_radians(36.0),
            f64::to_radians(41.0),
            251,
        )
        .unwrap();
        let rev = SweepSpec {
            parameter: SweepParameter::Theta,
            grid: fwd.grid.iter().rev().copied().collect(),
        };
        let sweep_f = sweep_levels(&params, &template, &fwd, &ops).unwrap();
        let sweep_r = sweep_levels(&params, &template, &rev, &ops).unwrap();

        // pairing between first and last grid point must agree in both
        // directions: channel t of the forward sweep ends at raw index r iff
        // the reverse sweep carries r back to t.
        let n = fwd.grid.len();
        for t in 0..DIM {
            let raw_end = sweep_f.track_to_raw[n - 1][t];
            let back = sweep_r.track_to_raw[n - 1][sweep_r.track_to_raw[0]
                .iter()
                .position(|&r| r == raw_end)
                .unwrap()];
            assert_eq!(back, sweep_f.track_to_raw[0][t]);
        }
    }
}
