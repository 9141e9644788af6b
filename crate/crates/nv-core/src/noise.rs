//! Quasi-static magnetic-field noise: inhomogeneous linewidths and T₂*.
//!
//! The spin bath is modeled phenomenologically as zero-mean Gaussian
//! fluctuations of (B, θ, φ) frozen over each shot. A transition's
//! inhomogeneous line is the coherent sum of per-sample Lorentzian kernels
//! whose common width is the orientation-independent residual floor; its
//! full width at half maximum converts to T₂* by the damped-cosine
//! convention T₂* = √3/(π·FWHM).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::FidTrace;
use crate::error::{Error, Result};
use crate::hamiltonian::build_static_hamiltonian;
use crate::levels::{diagonalize, sweep_levels, SweepParameter, SweepSpec};
use crate::operators::SpinOperatorSet;
use crate::params::{FieldVector, SpinSystemParams};
use crate::states::overlap;
use crate::{CVec, DIM};

/// Gaussian quasi-static field-noise model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of the field magnitude, G.
    pub sigma_b: f64,
    /// Standard deviation of the polar angle, rad.
    pub sigma_theta: f64,
    /// Standard deviation of the azimuthal angle, rad.
    pub sigma_phi: f64,
    /// Monte-Carlo sample count (≥ 100).
    pub samples: usize,
    /// Orientation-independent residual width floor, MHz (FWHM).
    pub floor_fwhm: f64,
}

/// Default residual floor, MHz.
pub const DEFAULT_FLOOR_FWHM: f64 = 0.10;

impl NoiseModel {
    /// Equivalent-Gauss isotropic model: σ_B = σ, σ_θ = σ_φ = σ/B.
    pub fn isotropic(sigma_g: f64, b: f64, samples: usize) -> Self {
        Self {
            sigma_b: sigma_g,
            sigma_theta: sigma_g / b,
            sigma_phi: sigma_g / b,
            samples,
            floor_fwhm: DEFAULT_FLOOR_FWHM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_b < 0.0 || self.sigma_theta < 0.0 || self.sigma_phi < 0.0 {
            return Err(Error::InvalidParams(
                "noise standard deviations must be ≥ 0".into(),
            ));
        }
        if self.samples < 100 {
            return Err(Error::InvalidParams(format!(
                "noise model needs ≥ 100 samples, got {}",
                self.samples
            )));
        }
        if !(self.floor_fwhm > 0.0) {
            return Err(Error::InvalidParams(
                "residual floor FWHM must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Linewidth and coherence time of one transition under the noise model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinewidthResult {
    /// FWHM of the magnitude line, MHz.
    pub fwhm: f64,
    /// T₂* = √3/(π·FWHM), µs.
    pub t2_star: f64,
    /// Mean sampled transition frequency, MHz.
    pub mean_frequency: f64,
    /// Samples rejected for failed level tracking.
    pub discarded: usize,
    pub samples: usize,
}

/// Decay rate of the floor kernel: a magnitude-spectrum FWHM `w` corresponds
/// to the exponential decay e^{−t·π·w/√3}.
fn floor_rate(fwhm: f64) -> f64 {
    std::f64::consts::PI * fwhm / 3.0_f64.sqrt()
}

/// Inverse standard-normal CDF (Acklam's rational approximation, relative
/// error below 1.2e-9).
fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

fn radical_inverse(mut k: usize, base: usize) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

/// Low-discrepancy standard-normal triples: a Halton sequence (bases 2, 3, 5)
/// with a seeded Cranley-Patterson shift, mapped through the inverse normal
/// CDF. Deterministic per seed, and the density error decays fast enough
/// that the linewidth estimate is stable at the spec's sample counts.
fn normal_triples(seed: u64, n: usize) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    (0..n)
        .map(|s| {
            let mut out = [0.0; 3];
            for (j, base) in [2usize, 3, 5].iter().enumerate() {
                // skip the first point of the sequence (all zeros)
                let u = (radical_inverse(s + 1, *base) + shift[j]).fract();
                out[j] = inverse_normal_cdf(u.clamp(1e-12, 1.0 - 1e-12));
            }
            out
        })
        .collect()
}

/// Sampled transition frequencies for the pair under the noise model.
fn sample_frequencies(
    params: &SpinSystemParams,
    field: &FieldVector,
    pair: (usize, usize),
    model: &NoiseModel,
    seed: u64,
    ops: &SpinOperatorSet,
) -> Result<(Vec<f64>, usize)> {
    model.validate()?;
    let h = build_static_hamiltonian(params, field, ops)?;
    let eig = diagonalize(&h)?;
    let refs: (CVec, CVec) = (eig.state(pair.0), eig.state(pair.1));

    let triples = normal_triples(seed, model.samples);
    let draws: Vec<Option<f64>> = triples
        .par_iter()
        .map(|g| {
            let db = g[0] * model.sigma_b;
            let dth = g[1] * model.sigma_theta;
            let dph = g[2] * model.sigma_phi;
            let perturbed = FieldVector::new_unchecked(
                (field.b + db).max(0.0),
                field.theta + dth,
                field.phi + dph,
            );
            let h = build_static_hamiltonian(params, &perturbed, ops).ok()?;
            let eig = diagonalize(&h).ok()?;
            let best = |r: &CVec| {
                (0..DIM)
                    .map(|k| (k, overlap(&eig.state(k), r)))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap()
            };
            let (a, ov_a) = best(&refs.0);
            let (b, ov_b) = best(&refs.1);
            if a == b || ov_a < 0.5 || ov_b < 0.5 {
                return None;
            }
            Some((eig.energies[b] - eig.energies[a]).abs())
        })
        .collect();

    let mut freqs = Vec::with_capacity(model.samples);
    let mut discarded = 0;
    for d in draws {
        match d {
            Some(f) => freqs.push(f),
            None => discarded += 1,
        }
    }
    if discarded * 20 > model.samples {
        return Err(Error::TooManyDiscards {
            discarded,
            total: model.samples,
        });
    }
    Ok((freqs, discarded))
}

/// Magnitude of the ensemble line shape at frequency ν: the coherent sum of
/// per-sample Lorentzian kernels of the floor width.
fn line_magnitude(freqs: &[f64], rate: f64, nu: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for &f in freqs {
        let d = std::f64::consts::TAU * (nu - f);
        let denom = rate * rate + d * d;
        re += rate / denom;
        im += -d / denom;
    }
    (re * re + im * im).sqrt() / freqs.len() as f64
}

/// FWHM of the magnitude line by scan + golden-section peak + bisection for
/// the half crossings.
fn line_fwhm(freqs: &[f64], floor_fwhm: f64) -> f64 {
    let rate = floor_rate(floor_fwhm);
    let mean = freqs.iter().sum::<f64>() / freqs.len() as f64;
    let spread = freqs
        .iter()
        .map(|f| (f - mean) * (f - mean))
        .sum::<f64>()
        .sqrt()
        / (freqs.len() as f64).sqrt();
    let span = 6.0 * (spread + floor_fwhm);

    // locate the peak
    let n_scan = 801;
    let mut best = (mean, line_magnitude(freqs, rate, mean));
    for k in 0..n_scan {
        let nu = mean - span + 2.0 * span * k as f64 / (n_scan - 1) as f64;
        let m = line_magnitude(freqs, rate, nu);
        if m > best.1 {
            best = (nu, m);
        }
    }
    let step = 2.0 * span / (n_scan - 1) as f64;
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = -line_magnitude(freqs, rate, x1);
    let mut f2 = -line_magnitude(freqs, rate, x2);
    while hi - lo > 1e-9 * (floor_fwhm + spread) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = -line_magnitude(freqs, rate, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = -line_magnitude(freqs, rate, x2);
        }
    }
    let peak_nu = 0.5 * (lo + hi);
    let peak = line_magnitude(freqs, rate, peak_nu);
    let half = peak / 2.0;

    // bisect outward for each half crossing
    let crossing = |dir: f64| -> f64 {
        let mut outer = peak_nu + dir * step;
        let mut guard = 0;
        while line_magnitude(freqs, rate, outer) > half {
            outer += dir * span.max(step);
            guard += 1;
            if guard > 64 {
                break;
            }
        }
        let mut inner = peak_nu;
        for _ in 0..200 {
            let mid = 0.5 * (inner + outer);
            if line_magnitude(freqs, rate, mid) > half {
                inner = mid;
            } else {
                outer = mid;
            }
            if (outer - inner).abs() < 1e-12 * (floor_fwhm + spread).max(1e-6) {
                break;
            }
        }
        0.5 * (inner + outer)
    };
    crossing(1.0) - crossing(-1.0)
}

/// Monte-Carlo inhomogeneous linewidth of the transition `pair` at `field`.
///
/// Deterministic for a given `seed`; per-sample RNG streams are independent
/// of evaluation order.
pub fn inhomogeneous_linewidth(
    params: &SpinSystemParams,
    field: &FieldVector,
    pair: (usize, usize),
    model: &NoiseModel,
    seed: u64,
    ops: &SpinOperatorSet,
) -> Result<LinewidthResult> {
    let (freqs, discarded) = sample_frequencies(params, field, pair, model, seed, ops)?;
    let fwhm = line_fwhm(&freqs, model.floor_fwhm);
    Ok(LinewidthResult {
        fwhm,
        t2_star: 3.0_f64.sqrt() / (std::f64::consts::PI * fwhm),
        mean_frequency: freqs.iter().sum::<f64>() / freqs.len() as f64,
        discarded,
        samples: model.samples,
    })
}

/// One point of a linewidth-vs-angle curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinewidthPoint {
    /// Polar angle, rad.
    pub theta: f64,
    pub fwhm: f64,
    pub t2_star: f64,
    pub discarded: usize,
}

/// Linewidth scan over a θ grid plus the refined minimum location.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinewidthScan {
    pub points: Vec<LinewidthPoint>,
    /// θ of the minimum FWHM (golden-section refined), rad.
    pub theta_min: f64,
    /// FWHM at the refined minimum, MHz.
    pub fwhm_min: f64,
}

/// Apply [`inhomogeneous_linewidth`] along a θ grid, tracking the transition
/// from the anchor field, and refine the minimum location.
///
/// The same seed (hence the same noise draws) is used at every grid point so
/// the curve is smooth and the minimum is well defined.
pub fn linewidth_scan(
    params: &SpinSystemParams,
    anchor: &FieldVector,
    pair_at_anchor: (usize, usize),
    theta_grid: &[f64],
    model: &NoiseModel,
    seed: u64,
    ops: &SpinOperatorSet,
) -> Result<LinewidthScan> {
    if theta_grid.len() < 2 {
        return Err(Error::BadGrid { min: 2 });
    }
    // tracked pair identity at each grid angle, walking out from the anchor
    let pairs = track_pair_over_thetas(params, anchor, pair_at_anchor, theta_grid, ops)?;

    let points: Vec<LinewidthPoint> = theta_grid
        .iter()
        .zip(&pairs)
        .map(|(&theta, &pair)| {
            let field = FieldVector::new_unchecked(anchor.b, theta, anchor.phi);
            let r = inhomogeneous_linewidth(params, &field, pair, model, seed, ops)?;
            Ok(LinewidthPoint {
                theta,
                fwhm: r.fwhm,
                t2_star: r.t2_star,
                discarded: r.discarded,
            })
        })
        .collect::<Result<_>>()?;

    let min_idx = (0..points.len())
        .min_by(|&a, &b| points[a].fwhm.total_cmp(&points[b].fwhm))
        .unwrap();

    // golden-section refinement between the neighbors of the grid minimum
    let (mut theta_min, mut fwhm_min) = (points[min_idx].theta, points[min_idx].fwhm);
    if min_idx > 0 && min_idx + 1 < points.len() {
        let pair = pairs[min_idx];
        let eval = |theta: f64| -> Result<f64> {
            let field = FieldVector::new_unchecked(anchor.b, theta, anchor.phi);
            Ok(inhomogeneous_linewidth(params, &field, pair, model, seed, ops)?.fwhm)
        };
        let (mut lo, mut hi) = (points[min_idx - 1].theta, points[min_idx + 1].theta);
        let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        let tol = 1e-3_f64.to_radians();
        while hi - lo > tol {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = eval(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = eval(x2)?;
            }
        }
        theta_min = 0.5 * (lo + hi);
        fwhm_min = eval(theta_min)?;
    }

    Ok(LinewidthScan {
        points,
        theta_min,
        fwhm_min,
    })
}

/// Raw pair indices at each grid angle, tracked from the anchor.
fn track_pair_over_thetas(
    params: &SpinSystemParams,
    anchor: &FieldVector,
    pair: (usize, usize),
    theta_grid: &[f64],
    ops: &SpinOperatorSet,
) -> Result<Vec<(usize, usize)>> {
    let mut out = vec![(0usize, 0usize); theta_grid.len()];
    // grid points at or beyond the anchor in each direction, finely bridged
    let step = 0.25_f64.to_radians();
    for dir in [-1.0_f64, 1.0] {
        let targets: Vec<(usize, f64)> = theta_grid
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, t)| {
                if dir < 0.0 {
                    t <= anchor.theta
                } else {
                    t > anchor.theta
                }
            })
            .collect();
        if targets.is_empty() {
            continue;
        }
        let farthest = targets
            .iter()
            .map(|&(_, t)| t)
            .fold(anchor.theta, |acc, t| {
                if (t - anchor.theta).abs() > (acc - anchor.theta).abs() {
                    t
                } else {
                    acc
                }
            });
        // fine bridge grid containing all targets
        let mut grid: Vec<f64> = Vec::new();
        let n = ((farthest - anchor.theta).abs() / step).ceil() as usize + 1;
        for k in 0..=n {
            grid.push(anchor.theta + (farthest - anchor.theta) * k as f64 / n as f64);
        }
        for &(_, t) in &targets {
            grid.push(t);
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        if dir < 0.0 {
            grid.reverse();
        }
        if grid.len() < 2 {
            for &(i, _) in &targets {
                out[i] = pair;
            }
            continue;
        }
        let spec = SweepSpec {
            parameter: SweepParameter::Theta,
            grid: grid.clone(),
        };
        let sweep = sweep_levels(params, anchor, &spec, ops)?;
        for &(i, t) in &targets {
            let g = grid
                .iter()
                .position(|&x| (x - t).abs() < 1e-12)
                .expect("target angle is on the bridge grid");
            out[i] = (
                sweep.track_to_raw[g][pair.0],
                sweep.track_to_raw[g][pair.1],
            );
        }
    }
    Ok(out)
}

/// Calibrate the isotropic noise scale so the linewidth of `pair` at `field`
/// equals `target_fwhm`, by bisection on σ.
pub fn calibrate_isotropic(
    params: &SpinSystemParams,
    field: &FieldVector,
    pair: (usize, usize),
    target_fwhm: f64,
    samples: usize,
    seed: u64,
    ops: &SpinOperatorSet,
) -> Result<NoiseModel> {
    let fwhm_of = |sigma: f64| -> Result<f64> {
        let model = NoiseModel::isotropic(sigma, field.b, samples);
        Ok(inhomogeneous_linewidth(params, field, pair, &model, seed, ops)?.fwhm)
    };
    let (mut lo, mut hi) = (0.0_f64, 0.05_f64);
    let mut guard = 0;
    while fwhm_of(hi)? < target_fwhm {
        hi *= 2.0;
        guard += 1;
        if guard > 16 {
            return Err(Error::InvalidParams(format!(
                "cannot reach target FWHM {target_fwhm} MHz at this field point"
            )));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fwhm_of(mid)? < target_fwhm {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-7 {
            break;
        }
    }
    let sigma = 0.5 * (lo + hi);
    Ok(NoiseModel::isotropic(sigma, field.b, samples))
}

/// Ensemble-averaged FID built from the same frequency samples the linewidth
/// uses: mean of cos(2π(ν_s − ν₀)t) damped by the floor kernel.
///
/// `demod` shifts the carrier so the fit sees a finite oscillation frequency.
pub fn ensemble_fid(
    params: &SpinSystemParams,
    field: &FieldVector,
    pair: (usize, usize),
    model: &NoiseModel,
    seed: u64,
    demod: f64,
    dt: f64,
    n: usize,
    ops: &SpinOperatorSet,
) -> Result<FidTrace> {
    let (freqs, _) = sample_frequencies(params, field, pair, model, seed, ops)?;
    let mean = freqs.iter().sum::<f64>() / freqs.len() as f64;
    let rate = floor_rate(model.floor_fwhm);
    let samples: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 * dt;
            let osc: f64 = freqs
                .iter()
                .map(|&f| (std::f64::consts::TAU * (f - mean + demod) * t).cos())
                .sum::<f64>()
                / freqs.len() as f64;
            osc * (-rate * t).exp()
        })
        .collect();
    Ok(FidTrace { dt, samples })
}
