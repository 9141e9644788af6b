//! Nonlinear least-squares fit of a damped cosine a·cos(2πνt)·e^{−t/T₂*}.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::FidTrace;
use crate::error::Result;

/// Levenberg-Marquardt controls.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative decrease of the squared residual that counts as converged.
    pub ftol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            ftol: 1e-12,
        }
    }
}

/// Fitted damped-cosine parameters with Jacobian-based confidence intervals.
///
/// The fit is parameterized by the decay rate r = 1/T₂* so a pure cosine
/// (T₂* → ∞) sits at r = 0 in the interior of the parameter space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FidFit {
    pub amplitude: f64,
    /// MHz.
    pub frequency: f64,
    /// 1/µs.
    pub decay_rate: f64,
    /// µs; infinite when the fitted rate is ≤ 0.
    pub t2_star: f64,
    /// 1-σ uncertainties of (amplitude, frequency, decay_rate).
    pub sigma: [f64; 3],
    /// 95% intervals of (amplitude, frequency, decay_rate).
    pub ci95: [(f64, f64); 3],
    /// 95% interval of T₂*, from the rate interval.
    pub t2_ci95: (f64, f64),
    /// Final ‖residual‖₂.
    pub residual_norm: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out; the best point is returned.
    pub converged: bool,
}

fn model_and_jacobian(
    p: &[f64; 3],
    trace: &FidTrace,
) -> (DVector<f64>, DMatrix<f64>) {
    let n = trace.samples.len();
    let (a, nu, r) = (p[0], p[1], p[2]);
    let mut resid = DVector::zeros(n);
    let mut jac = DMatrix::zeros(n, 3);
    for (k, &y) in trace.samples.iter().enumerate() {
        let t = k as f64 * trace.dt;
        let envelope = (-r * t).exp();
        let (s, c) = (TAU * nu * t).sin_cos();
        resid[k] = a * c * envelope - y;
        jac[(k, 0)] = c * envelope;
        jac[(k, 1)] = -a * TAU * t * s * envelope;
        jac[(k, 2)] = -a * t * c * envelope;
    }
    (resid, jac)
}

/// Fit a·cos(2πνt)·e^{−t/T₂*} to the trace starting from
/// `(amplitude, frequency MHz, t2 µs)`.
///
/// Non-convergence within the iteration budget is reported through
/// `converged = false` on the returned best point.
pub fn fit_fid(
    trace: &FidTrace,
    guess: (f64, f64, f64),
    opts: &FitOptions,
) -> Result<FidFit> {
    let n = trace.samples.len();
    let mut p = [guess.0, guess.1, 1.0 / guess.2];
    let (mut resid, mut jac) = model_and_jacobian(&p, trace);
    let mut ssr = resid.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iterations {
        iterations = iter + 1;
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &resid;
        let mut damped = jtj.clone();
        for k in 0..3 {
            damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
        }
        let Some(step) = damped.lu().solve(&(-&jtr)) else {
            lambda *= 10.0;
            continue;
        };
        let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
        let (trial_resid, trial_jac) = model_and_jacobian(&trial, trace);
        let trial_ssr = trial_resid.norm_squared();
        if trial_ssr < ssr {
            let improvement = (ssr - trial_ssr) / ssr.max(1e-300);
            p = trial;
            resid = trial_resid;
            jac = trial_jac;
            ssr = trial_ssr;
            lambda = (lambda / 10.0).max(1e-12);
            if improvement < opts.ftol || step.norm() < 1e-12 {
                converged = true;
                break;
            }
        } else {
            lambda = (lambda * 10.0).min(1e12);
            if lambda >= 1e12 {
                converged = ssr < 1e-20;
                break;
            }
        }
    }

    // covariance from the undamped normal matrix at the best point
    let dof = (n as f64 - 3.0).max(1.0);
    let variance = ssr / dof;
    let jtj = jac.transpose() * &jac;
    let sigma = match jtj.try_inverse() {
        Some(inv) => [
            (variance * inv[(0, 0)].max(0.0)).sqrt(),
            (variance * inv[(1, 1)].max(0.0)).sqrt(),
            (variance * inv[(2, 2)].max(0.0)).sqrt(),
        ],
        None => [f64::NAN; 3],
    };
    let ci = |v: f64, s: f64| (v - 1.96 * s, v + 1.96 * s);
    let (r_lo, r_hi) = ci(p[2], sigma[2]);
    let t2_ci95 = (
        if r_hi > 0.0 { 1.0 / r_hi } else { f64::INFINITY },
        if r_lo > 0.0 { 1.0 / r_lo } else { f64::INFINITY },
    );

    Ok(FidFit {
        amplitude: p[0],
        frequency: p[1],
        decay_rate: p[2],
        t2_star: if p[2] > 0.0 { 1.0 / p[2] } else { f64::INFINITY },
        sigma,
        ci95: [ci(p[0], sigma[0]), ci(p[1], sigma[1]), ci(p[2], sigma[2])],
        t2_ci95,
        residual_norm: ssr.sqrt(),
        iterations,
        converged,
    })
}
