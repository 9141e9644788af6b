//! Analyzed field points shared by the spectroscopy and magnetometry
//! pipelines.

use crate::error::{Error, Result};
use crate::hamiltonian::build_static_hamiltonian;
use crate::levels::{
    diagonalize, find_lac, EigenSystem, LacReport, LevelPairSelector, Manifold, SweepParameter,
    SweepSpec,
};
use crate::operators::SpinOperatorSet;
use crate::params::{FieldVector, SpinSystemParams};
use crate::transitions::{identify_lac_levels, transition_table, TransitionOptions};
use crate::CMat;

/// The nuclear-spin-induced LAC point with the four levels of the
/// anti-crossing subsystem identified.
#[derive(Debug, Clone)]
pub struct LacPoint {
    pub report: LacReport,
    pub field: FieldVector,
    pub hamiltonian: CMat,
    pub eig: EigenSystem,
    /// Raw level indices of ψ₁..ψ₄.
    pub psi: [usize; 4],
}

impl LacPoint {
    /// Locate the LAC by sweeping θ over `window` (radians) at fixed B and φ
    /// and analyze the minimum-gap point.
    pub fn locate(
        params: &SpinSystemParams,
        b: f64,
        phi: f64,
        window: (f64, f64),
        ops: &SpinOperatorSet,
    ) -> Result<Self> {
        let template = FieldVector::new_unchecked(b, window.0, phi);
        let spec = SweepSpec::linspace(SweepParameter::Theta, window.0, window.1, 51)?;
        let report = find_lac(params, &template, &spec, LevelPairSelector::IdealLacStates, ops)?;
        let field = report.field;
        let hamiltonian = build_static_hamiltonian(params, &field, ops)?;
        let eig = diagonalize(&hamiltonian)?;
        let psi = identify_lac_levels(&eig);
        Ok(Self {
            report,
            field,
            hamiltonian,
            eig,
            psi,
        })
    }

    /// Default window 36°–41° around the reported anti-crossing.
    pub fn nuclear_spin_lac(
        params: &SpinSystemParams,
        b: f64,
        phi: f64,
        ops: &SpinOperatorSet,
    ) -> Result<Self> {
        Self::locate(
            params,
            b,
            phi,
            (36.0_f64.to_radians(), 41.0_f64.to_radians()),
            ops,
        )
    }

    /// Transition frequency ν(ψ_a ↔ ψ_b), MHz, for 1-based ψ indices.
    pub fn psi_frequency(&self, a: usize, b: usize) -> f64 {
        (self.eig.energies[self.psi[b - 1]] - self.eig.energies[self.psi[a - 1]]).abs()
    }

    /// Raw index pair of the numbered spectral line (1..=5 per the LAC level
    /// diagram: 1 = ψ2ψ3, 2 = ψ2ψ4, 3 = ψ1ψ3, 4 = ψ1ψ4, 5 = ψ3ψ4).
    pub fn line_pair(&self, line: usize) -> (usize, usize) {
        let (a, b) = match line {
            1 => (1, 2),
            2 => (1, 3),
            3 => (0, 2),
            4 => (0, 3),
            5 => (2, 3),
            _ => panic!("line index must be 1..=5"),
        };
        (self.psi[a], self.psi[b])
    }
}

/// The transverse-field point (θ = 90°) with the bright MW quadruple
/// identified: two m_I2 = 0 levels of the m_s = 0 manifold and their two
/// brightest m_s = ±1 partners in the lower hybridized group.
#[derive(Debug, Clone)]
pub struct TransversePoint {
    pub field: FieldVector,
    pub hamiltonian: CMat,
    pub eig: EigenSystem,
    /// m_s = 0 levels (lower, upper).
    pub ms0: (usize, usize),
    /// m_s = ±1 partner levels (lower, upper).
    pub pm1: (usize, usize),
    /// The four MW transitions (i, j) ordered by ascending frequency; the
    /// spectral labels I₁..I₄ follow this order.
    pub lines: [(usize, usize); 4],
}

impl TransversePoint {
    pub fn analyze(
        params: &SpinSystemParams,
        b: f64,
        theta: f64,
        phi: f64,
        ops: &SpinOperatorSet,
    ) -> Result<Self> {
        let field = FieldVector::new_unchecked(b, theta, phi);
        let hamiltonian = build_static_hamiltonian(params, &field, ops)?;
        let eig = diagonalize(&hamiltonian)?;

        // the two m_I2 = 0 states of the m_s = 0 manifold are the ones not
        // paired into near-degenerate m_I2 = ±1 doublets
        let ms0_levels: Vec<usize> = (0..crate::DIM)
            .filter(|&k| eig.manifold(k) == Manifold::Zero)
            .collect();
        if ms0_levels.len() != 6 {
            return Err(Error::InvalidParams(
                "unexpected m_s = 0 manifold size at the transverse point".into(),
            ));
        }
        let mut singles: Vec<usize> = Vec::new();
        for &k in &ms0_levels {
            let near = ms0_levels
                .iter()
                .any(|&j| j != k && (eig.energies[j] - eig.energies[k]).abs() < 0.05);
            if !near {
                singles.push(k);
            }
        }
        if singles.len() != 2 {
            return Err(Error::InvalidParams(format!(
                "expected 2 isolated m_s = 0 levels, found {}",
                singles.len()
            )));
        }
        let ms0 = (singles[0], singles[1]);

        // brightest m_s = ±1 partners within the lower hybridized group
        let table = transition_table(
            &eig,
            ops,
            &TransitionOptions {
                collapse_degenerate: false,
                ..Default::default()
            },
        );
        let pm1_levels: Vec<usize> = (0..crate::DIM)
            .filter(|&k| eig.manifold(k) == Manifold::PlusMinus)
            .collect();
        let median = {
            let mut e: Vec<f64> = pm1_levels.iter().map(|&k| eig.energies[k]).collect();
            e.sort_by(f64::total_cmp);
            0.5 * (e[e.len() / 2 - 1] + e[e.len() / 2])
        };
        let lower_group: Vec<usize> = pm1_levels
            .iter()
            .copied()
            .filter(|&k| eig.energies[k] < median)
            .collect();
        let brightness = |k: usize| -> f64 {
            [ms0.0, ms0.1]
                .iter()
                .filter_map(|&s| table.entry(s, k))
                .map(|e| e.amplitudes.iter().map(|a| a * a).sum::<f64>())
                .sum()
        };
        let mut ranked: Vec<(f64, usize)> =
            lower_group.iter().map(|&k| (brightness(k), k)).collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
        if ranked.len() < 2 {
            return Err(Error::InvalidParams(
                "no m_s = ±1 partners found below the hyperfine split".into(),
            ));
        }
        let (p, q) = (ranked[0].1, ranked[1].1);
        let pm1 = (p.min(q), p.max(q));

        let mut lines = [
            (ms0.0, pm1.0),
            (ms0.0, pm1.1),
            (ms0.1, pm1.0),
            (ms0.1, pm1.1),
        ];
        lines.sort_by(|a, b| {
            let fa = eig.energies[a.1] - eig.energies[a.0];
            let fb = eig.energies[b.1] - eig.energies[b.0];
            fa.total_cmp(&fb)
        });

        Ok(Self {
            field,
            hamiltonian,
            eig,
            ms0,
            pm1,
            lines,
        })
    }

    /// Frequency of spectral line `k` (1-based, ascending order), MHz.
    pub fn line_frequency(&self, k: usize) -> f64 {
        let (i, j) = self.lines[k - 1];
        self.eig.energies[j] - self.eig.energies[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::build_operators;

    #[test]
    fn lac_point_reproduces_reported_values() {
        let params = SpinSystemParams::default();
        let ops = build_operators();
        let point = LacPoint::nuclear_spin_lac(&params, 28.9, 0.0, &ops).unwrap();
        assert!((point.field.theta.to_degrees() - 38.4).abs() < 0.3);
        assert!((point.psi_frequency(3, 4) - 1.7).abs() < 0.3);
        // energy order within the pairs matches the level diagram
        assert!(point.eig.energies[point.psi[0]] < point.eig.energies[point.psi[1]]);
        assert!(point.eig.energies[point.psi[2]] < point.eig.energies[point.psi[3]]);
    }

    #[test]
    fn transverse_point_structure() {
        let params = SpinSystemParams::default();
        let ops = build_operators();
        let point = TransversePoint::analyze(
            &params,
            28.9,
            90.0_f64.to_radians(),
            30.0_f64.to_radians(),
            &ops,
        )
        .unwrap();
        // four ascending MW lines within the lower hyperfine group
        for k in 1..4 {
            assert!(point.line_frequency(k + 1) > point.line_frequency(k));
        }
        assert!(point.line_frequency(1) > 2700.0 && point.line_frequency(4) < 2900.0);
    }
}
