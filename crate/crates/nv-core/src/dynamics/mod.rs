//! Time-domain simulation of pulsed spin dynamics in the lab frame.
//!
//! Pulses are integrated with the full cosine drive (no rotating-wave
//! approximation) by Strang splitting: exact half-steps of the static
//! Hamiltonian around a midpoint kick of the drive operator. The drive is
//! periodic in the carrier, so the propagator over one carrier cycle is
//! assembled once per carrier phase and raised to the number of whole cycles
//! by binary exponentiation; free evolution uses the exact eigen-propagator.

mod fit;
mod spectrum;

pub use fit::{fit_fid, FidFit, FitOptions};
pub use spectrum::{
    extract_lines, isolate_line, spectrum, Apodization, LineCriteria, SpectralLine, Spectrum,
};

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::drive_operator;
use crate::levels::{diagonalize, EigenSystem};
use crate::operators::SpinOperatorSet;
use crate::params::{DriveField, SpinSystemParams};
use crate::{C64, CMat, CVec, DIM};

/// One element of a pulse sequence.
#[derive(Debug, Clone)]
pub enum Segment {
    /// Free evolution for the given time, µs.
    Delay(f64),
    /// Drive pulse of the given duration, µs. The drive's `phase` is the
    /// carrier phase offset relative to the sequence origin t = 0.
    Pulse { duration: f64, drive: DriveField },
}

/// A pulse sequence executed left to right from t = 0.
#[derive(Debug, Clone, Default)]
pub struct PulseSequence {
    pub segments: Vec<Segment>,
}

impl PulseSequence {
    pub fn total_duration(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::Delay(d) => *d,
                Segment::Pulse { duration, .. } => *duration,
            })
            .sum()
    }
}

/// Integration controls.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Samples per period of the fastest frequency (carrier + spectral span).
    /// The floor of 50 samples per carrier period is always honored.
    pub oversampling: f64,
    /// Re-run with half the step and require the final state to agree.
    pub verify_convergence: bool,
    /// Allowed final-state change under step halving.
    pub convergence_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            oversampling: 100.0,
            verify_convergence: false,
            convergence_tol: 1e-6,
        }
    }
}

/// Exact free propagator and split-step pulse propagators over one static
/// Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    eig: EigenSystem,
}

impl Propagator {
    pub fn new(h0: &CMat) -> Result<Self> {
        Ok(Self {
            eig: diagonalize(h0)?,
        })
    }

    pub fn from_eigensystem(eig: EigenSystem) -> Self {
        Self { eig }
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eig
    }

    /// V · e^{−i2πE t} · V†.
    pub fn free(&self, t: f64) -> CMat {
        let v = &self.eig.states;
        let mut m = v.clone();
        for (k, e) in self.eig.energies.iter().enumerate() {
            let col = m.column(k) * C64::from_polar(1.0, -TAU * e * t);
            m.set_column(k, &col);
        }
        m * v.adjoint()
    }

    /// Pulse propagator kernel for one drive geometry and step size.
    pub fn pulse_kernel(
        &self,
        params: &SpinSystemParams,
        drive: &DriveField,
        ops: &SpinOperatorSet,
        opts: &EvolveOptions,
    ) -> Result<PulseKernel> {
        PulseKernel::new(self, params, drive, ops, opts.oversampling)
    }
}

/// Split-step machinery for one (drive geometry, carrier, step) combination.
pub struct PulseKernel {
    /// Carrier frequency, MHz.
    omega: f64,
    /// Steps per carrier period.
    n_per_cycle: usize,
    /// Step, µs.
    dt: f64,
    /// Drive-operator eigenvalues, MHz.
    lambda: Vec<f64>,
    /// A = F(dt/2)·X, B = X†·F(dt/2), M = B·A with X the drive eigenvectors
    /// and F the free half-step.
    a: CMat,
    b: CMat,
    m: CMat,
    /// Drive eigenvectors, for partial steps.
    x: CMat,
    eig: EigenSystem,
}

impl PulseKernel {
    fn new(
        prop: &Propagator,
        params: &SpinSystemParams,
        drive: &DriveField,
        ops: &SpinOperatorSet,
        oversampling: f64,
    ) -> Result<Self> {
        if drive.omega <= 0.0 {
            return Err(Error::InvalidParams(
                "drive carrier frequency must be positive".into(),
            ));
        }
        let span = prop.eig.energies[DIM - 1] - prop.eig.energies[0];
        let nu_fast = span + drive.omega;
        let per_cycle = (oversampling.max(1.0) * nu_fast / drive.omega)
            .ceil()
            .max(oversampling.max(1.0));
        let n_per_cycle = per_cycle as usize;
        let dt = 1.0 / drive.omega / n_per_cycle as f64;

        let v_d = drive_operator(params, drive, ops);
        let d_eig = diagonalize(&v_d)?;
        let lambda = d_eig.energies.clone();
        let x = d_eig.states;

        let f_half = prop.free(dt / 2.0);
        let a = &f_half * &x;
        let b = x.adjoint() * &f_half;
        let m = &b * &a;

        Ok(Self {
            omega: drive.omega,
            n_per_cycle,
            dt,
            lambda,
            a,
            b,
            m,
            x,
            eig: prop.eig.clone(),
        })
    }

    pub fn step(&self) -> f64 {
        self.dt
    }

    fn kick_diag(&self, f: f64, dt: f64) -> Vec<C64> {
        self.lambda
            .iter()
            .map(|l| C64::from_polar(1.0, -TAU * l * f * dt))
            .collect()
    }

    fn scale_rows(m: &mut CMat, d: &[C64]) {
        for (k, s) in d.iter().enumerate() {
            let row = m.row(k) * *s;
            m.set_row(k, &row);
        }
    }

    /// Propagator over `n_steps` consecutive split steps of length `dt`; the
    /// drive factor of step k is cos(2πω·(k+½)·dt + χ).
    fn stepped(&self, chi: f64, n_steps: usize, dt: f64) -> CMat {
        let (a, b, m);
        let (a_ref, b_ref, m_ref) = if dt == self.dt {
            (&self.a, &self.b, &self.m)
        } else {
            let f_half = Propagator {
                eig: self.eig.clone(),
            }
            .free(dt / 2.0);
            a = &f_half * &self.x;
            b = self.x.adjoint() * &f_half;
            m = &b * &a;
            (&a, &b, &m)
        };
        let f_at = |k: usize| {
            let t_mid = (k as f64 + 0.5) * dt;
            (TAU * self.omega * t_mid + chi).cos()
        };
        // U = A · D_n · M · D_{n−1} · M ··· D_1 · B
        let mut acc = b_ref.clone();
        Self::scale_rows(&mut acc, &self.kick_diag(f_at(0), dt));
        for k in 1..n_steps {
            let mut next = m_ref * acc;
            Self::scale_rows(&mut next, &self.kick_diag(f_at(k), dt));
            acc = next;
        }
        a_ref * acc
    }

    /// Full pulse propagator for carrier phase χ at the pulse start.
    pub fn pulse(&self, chi: f64, duration: f64) -> CMat {
        let t_cycle = 1.0 / self.omega;
        let n_cycles = (duration / t_cycle).floor() as u64;
        let remainder = duration - n_cycles as f64 * t_cycle;

        // the carrier phase advances by exactly 2π per cycle, so every whole
        // cycle shares one propagator
        let mut u = if n_cycles > 0 {
            matrix_power(&self.stepped(chi, self.n_per_cycle, self.dt), n_cycles)
        } else {
            CMat::identity(DIM, DIM)
        };

        let full_steps = ((remainder / self.dt).floor() as usize).min(self.n_per_cycle);
        if full_steps > 0 {
            u = self.stepped(chi, full_steps, self.dt) * u;
        }
        let tail = remainder - full_steps as f64 * self.dt;
        if tail > 1e-12 * t_cycle {
            let chi_tail = chi + TAU * self.omega * (full_steps as f64 * self.dt);
            u = self.stepped(chi_tail, 1, tail) * u;
        }
        u
    }
}

fn matrix_power(m: &CMat, mut n: u64) -> CMat {
    let mut base = m.clone();
    let mut acc = CMat::identity(DIM, DIM);
    while n > 0 {
        if n & 1 == 1 {
            acc = &base * acc;
        }
        base = &base * &base;
        n >>= 1;
    }
    acc
}

fn evolve_with(
    prop: &Propagator,
    params: &SpinSystemParams,
    seq: &PulseSequence,
    psi0: &CVec,
    ops: &SpinOperatorSet,
    opts: &EvolveOptions,
) -> Result<CVec> {
    let mut psi = psi0.clone();
    let mut t_abs = 0.0;
    for seg in &seq.segments {
        match seg {
            Segment::Delay(d) => {
                psi = prop.free(*d) * psi;
                t_abs += d;
            }
            Segment::Pulse { duration, drive } => {
                let kernel = prop.pulse_kernel(params, drive, ops, opts)?;
                let chi = TAU * drive.omega * t_abs + drive.phase;
                psi = kernel.pulse(chi, *duration) * psi;
                t_abs += duration;
            }
        }
    }
    Ok(psi)
}

/// Propagate `psi0` through the sequence under `h0` plus the pulses' drives.
///
/// With `opts.verify_convergence` the integration is repeated at half the
/// step; a final-state difference above `opts.convergence_tol` is reported
/// as [`Error::StepNotConverged`].
pub fn evolve(
    params: &SpinSystemParams,
    h0: &CMat,
    seq: &PulseSequence,
    psi0: &CVec,
    ops: &SpinOperatorSet,
    opts: &EvolveOptions,
) -> Result<CVec> {
    let prop = Propagator::new(h0)?;
    let psi = evolve_with(&prop, params, seq, psi0, ops, opts)?;
    if opts.verify_convergence {
        let fine = EvolveOptions {
            oversampling: opts.oversampling * 2.0,
            verify_convergence: false,
            ..*opts
        };
        let psi_fine = evolve_with(&prop, params, seq, psi0, ops, &fine)?;
        let delta = (&psi - &psi_fine).norm();
        if delta > opts.convergence_tol {
            return Err(Error::StepNotConverged {
                delta,
                tol: opts.convergence_tol,
            });
        }
    }
    Ok(psi)
}

/// Uniformly sampled readout trace.
#[derive(Debug, Clone)]
pub struct FidTrace {
    /// Sampling step, µs.
    pub dt: f64,
    /// Signal samples at t = 0, dt, 2·dt, …
    pub samples: Vec<f64>,
}

impl FidTrace {
    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |k| k as f64 * self.dt)
    }
}

/// Initial state of a Ramsey run.
#[derive(Debug, Clone)]
pub enum InitialState {
    /// Equal classical mixture of the six product states with m_s = 0
    /// (optical pumping polarizes only the electron).
    MixedMsZero,
    /// Equal mixture of the two ¹³C states within m_s = 0 with the ¹⁴N in
    /// m_I2 = 0; isolates the four-level LAC subsystem so its lines are not
    /// blended with the m_I2 = ±1 sectors.
    MixedMsZeroNitrogenZero,
    /// A pure state.
    Pure(CVec),
}

/// Ramsey sequence: two identical pulses separated by a variable delay τ,
/// the second pulse carrying the extra phase −2π·ν_d·τ.
#[derive(Debug, Clone)]
pub struct RamseyConfig {
    /// Drive geometry, amplitude and carrier of both π/2 pulses.
    pub drive: DriveField,
    /// π/2 pulse duration, µs (calibrate with [`pi_half_duration`]).
    pub pulse_duration: f64,
    /// Artificial detuning ν_d, MHz.
    pub detuning: f64,
    /// Longest pulse separation τ, µs.
    pub duration: f64,
    /// τ sampling step, µs.
    pub sample_step: f64,
    pub initial: InitialState,
}

/// Resonant Rabi frequency of the transition `pair` under `drive`:
/// |⟨i|√2·γe·B_amp·(n̂·S)|j⟩|, MHz.
pub fn rabi_frequency(
    params: &SpinSystemParams,
    eig: &EigenSystem,
    pair: (usize, usize),
    drive: &DriveField,
    ops: &SpinOperatorSet,
) -> f64 {
    let v_d = drive_operator(params, drive, ops);
    let vi = eig.states.column(pair.0);
    let vj = eig.states.column(pair.1);
    (vi.adjoint() * v_d * vj)[(0, 0)].norm()
}

/// π/2 duration = 1/(4 · Rabi frequency) for the targeted transition.
pub fn pi_half_duration(
    params: &SpinSystemParams,
    eig: &EigenSystem,
    pair: (usize, usize),
    drive: &DriveField,
    ops: &SpinOperatorSet,
) -> f64 {
    1.0 / (4.0 * rabi_frequency(params, eig, pair, drive, ops))
}

/// Population of the m_s = 0 product block after applying `u` to the initial
/// state.
fn ms0_signal(u: &CMat, initial: &InitialState) -> f64 {
    match initial {
        InitialState::MixedMsZero => {
            let block = u.view((6, 6), (6, 6));
            block.iter().map(|z| z.norm_sqr()).sum::<f64>() / 6.0
        }
        InitialState::MixedMsZeroNitrogenZero => {
            let cols = [
                crate::operators::basis_index(0, 1, 0),
                crate::operators::basis_index(0, -1, 0),
            ];
            cols.iter()
                .map(|&c| {
                    u.column(c)
                        .iter()
                        .skip(6)
                        .take(6)
                        .map(|z| z.norm_sqr())
                        .sum::<f64>()
                })
                .sum::<f64>()
                / 2.0
        }
        InitialState::Pure(psi) => {
            let out = u * psi;
            out.iter().skip(6).take(6).map(|z| z.norm_sqr()).sum()
        }
    }
}

/// Simulate the Ramsey free-induction decay: π/2 — τ — π/2(−2πν_dτ), reading
/// out the m_s = 0 population on the τ grid.
///
/// Step-size convergence of the pulse propagator is verified once per call;
/// the τ points reuse the same kernel and run in parallel.
pub fn ramsey_fid(
    params: &SpinSystemParams,
    h0: &CMat,
    cfg: &RamseyConfig,
    ops: &SpinOperatorSet,
    opts: &EvolveOptions,
) -> Result<FidTrace> {
    let prop = Propagator::new(h0)?;
    let kernel = prop.pulse_kernel(params, &cfg.drive, ops, opts)?;

    {
        let fine_opts = EvolveOptions {
            oversampling: opts.oversampling * 2.0,
            ..*opts
        };
        let fine = prop.pulse_kernel(params, &cfg.drive, ops, &fine_opts)?;
        let u = kernel.pulse(cfg.drive.phase, cfg.pulse_duration);
        let u_fine = fine.pulse(cfg.drive.phase, cfg.pulse_duration);
        let delta = crate::operators::fro_norm(&(&u - &u_fine)) / (DIM as f64).sqrt();
        if delta > opts.convergence_tol {
            return Err(Error::StepNotConverged {
                delta,
                tol: opts.convergence_tol,
            });
        }
    }

    let u1 = kernel.pulse(cfg.drive.phase, cfg.pulse_duration);
    let n = (cfg.duration / cfg.sample_step).round() as usize + 1;

    let samples: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let tau = k as f64 * cfg.sample_step;
            let chi2 = TAU * cfg.drive.omega * (cfg.pulse_duration + tau) + cfg.drive.phase
                - TAU * cfg.detuning * tau;
            let u2 = kernel.pulse(chi2, cfg.pulse_duration);
            let u = &u2 * prop.free(tau) * &u1;
            ms0_signal(&u, &cfg.initial)
        })
        .collect();

    Ok(FidTrace {
        dt: cfg.sample_step,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_static_hamiltonian;
    use crate::operators::build_operators;
    use crate::params::FieldVector;
    use approx::assert_abs_diff_eq;

    fn lac_setup() -> (
        SpinSystemParams,
        SpinOperatorSet,
        CMat,
        EigenSystem,
        [usize; 4],
    ) {
        let params = SpinSystemParams::default();
        let ops = build_operators();
        let field = FieldVector::new(28.9, 38.32_f64.to_radians(), 0.0).unwrap();
        let h = build_static_hamiltonian(&params, &field, &ops).unwrap();
        let eig = diagonalize(&h).unwrap();
        let psi = crate::transitions::identify_lac_levels(&eig);
        (params, ops, h, eig, psi)
    }

    #[test]
    fn free_evolution_phases_exact() {
        let (_, _, h, eig, _) = lac_setup();
        let prop = Propagator::new(&h).unwrap();
        let t = 0.7321;
        let u = prop.free(t);
        for k in [0usize, 5, 9, 17] {
            let v = eig.state(k);
            let out = &u * &v;
            let expect = v * C64::from_polar(1.0, -TAU * eig.energies[k] * t);
            assert!((out - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn pulse_propagator_unitary() {
        let (params, ops, h, _, _) = lac_setup();
        let prop = Propagator::new(&h).unwrap();
        let drive = DriveField::new(3.0, 0.68, 0.79, 2876.8, 0.3).unwrap();
        let kernel = prop
            .pulse_kernel(&params, &drive, &ops, &EvolveOptions::default())
            .unwrap();
        // several thousand split steps
        let u = kernel.pulse(0.3, 0.05);
        let defect = crate::operators::fro_norm(&(u.adjoint() * &u - CMat::identity(DIM, DIM)));
        assert!(defect < 1e-9, "unitarity defect {defect}");
    }

    #[test]
    fn rabi_oscillation_matches_two_level_oracle() {
        // weak resonant drive on ψ2 ↔ ψ3: population transfer reaches 1/2
        // after a quarter Rabi period (rotating-wave two-level result)
        let (params, ops, h, eig, psi) = lac_setup();
        let nu = eig.energies[psi[2]] - eig.energies[psi[1]];
        let drive = DriveField::new(
            0.12,
            39.0_f64.to_radians(),
            45.3_f64.to_radians(),
            nu,
            0.0,
        )
        .unwrap();
        let g = rabi_frequency(&params, &eig, (psi[1], psi[2]), &drive, &ops);

        let prop = Propagator::new(&h).unwrap();
        let kernel = prop
            .pulse_kernel(&params, &drive, &ops, &EvolveOptions::default())
            .unwrap();
        let t_quarter = 1.0 / (4.0 * g);
        let u = kernel.pulse(0.0, t_quarter);
        let psi0 = eig.state(psi[1]);
        let out = &u * &psi0;
        let p3 = out.dotc(&eig.state(psi[2])).norm_sqr();
        let p2 = out.dotc(&psi0).norm_sqr();
        assert_abs_diff_eq!(p3, 0.5, epsilon = 0.02);
        assert_abs_diff_eq!(p2, 0.5, epsilon = 0.02);
    }

    #[test]
    fn unitarity_preserved_over_sequences() {
        let (params, ops, h, eig, _) = lac_setup();
        let drive = DriveField::new(2.0, 0.9, 0.4, 2876.8, 0.0).unwrap();
        let seq = PulseSequence {
            segments: vec![
                Segment::Pulse {
                    duration: 0.02,
                    drive,
                },
                Segment::Delay(1.5),
                Segment::Pulse {
                    duration: 0.02,
                    drive,
                },
            ],
        };
        let psi0 = eig.state(7);
        let out = evolve(&params, &h, &seq, &psi0, &ops, &EvolveOptions::default()).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coarse_step_reports_nonconvergence() {
        let (params, ops, h, eig, psi) = lac_setup();
        let drive = DriveField::new(5.0, 0.68, 0.79, 2876.8, 0.0).unwrap();
        let seq = PulseSequence {
            segments: vec![Segment::Pulse {
                duration: 0.1,
                drive,
            }],
        };
        let psi0 = eig.state(psi[0]);
        let coarse = EvolveOptions {
            oversampling: 2.0,
            verify_convergence: true,
            convergence_tol: 1e-6,
        };
        match evolve(&params, &h, &seq, &psi0, &ops, &coarse) {
            Err(Error::StepNotConverged { delta, .. }) => assert!(delta > 1e-6),
            other => panic!("expected StepNotConverged, got {other:?}"),
        }
    }

    #[test]
    fn default_step_is_converged() {
        let (params, ops, h, eig, psi) = lac_setup();
        let drive = DriveField::new(5.0, 0.68, 0.79, 2876.8, 0.0).unwrap();
        let seq = PulseSequence {
            segments: vec![Segment::Pulse {
                duration: 0.05,
                drive,
            }],
        };
        let psi0 = eig.state(psi[0]);
        let opts = EvolveOptions {
            verify_convergence: true,
            ..Default::default()
        };
        evolve(&params, &h, &seq, &psi0, &ops, &opts).unwrap();
    }

    #[test]
    fn ramsey_two_level_reduction() {
        // selective weak pulses on ψ2 ↔ ψ3 with the carrier detuned by
        // Δ = ν − ω: the FID oscillates at Δ + ν_d (up to contrast scaling)
        let (params, ops, h, eig, psi) = lac_setup();
        let nu23 = eig.energies[psi[2]] - eig.energies[psi[1]];
        let delta = 0.9; // MHz
        let drive = DriveField::new(
            0.12,
            39.0_f64.to_radians(),
            45.3_f64.to_radians(),
            nu23 - delta,
            0.0,
        )
        .unwrap();
        let g = rabi_frequency(&params, &eig, (psi[1], psi[2]), &drive, &ops);
        let nu_d = 3.0;
        let cfg = RamseyConfig {
            drive,
            pulse_duration: 1.0 / (4.0 * g),
            detuning: nu_d,
            duration: 6.0,
            sample_step: 0.05,
            initial: InitialState::Pure(eig.state(psi[1])),
        };
        let trace = ramsey_fid(&params, &h, &cfg, &ops, &EvolveOptions::default()).unwrap();
        assert!(trace
            .samples
            .iter()
            .all(|s| (-1e-12..=1.0 + 1e-12).contains(s)));

        let spec = spectrum(&trace, Apodization::None, 4).unwrap();
        let lines = extract_lines(&spec, LineCriteria::Count(1)).unwrap();
        assert_abs_diff_eq!(lines[0].center, delta + nu_d, epsilon = 0.1);
    }
}
