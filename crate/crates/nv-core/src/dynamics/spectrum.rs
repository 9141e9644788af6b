//! Spectrum synthesis by discrete Fourier transform, line extraction, and
//! band-selective inverse transforms.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::FidTrace;
use crate::error::{Error, Result};
use crate::C64;

/// Time-domain window applied before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Apodization {
    None,
    /// Multiply by e^{−rate·t} (rate in 1/µs).
    Exponential { rate: f64 },
}

impl Apodization {
    fn weight(&self, t: f64) -> f64 {
        match self {
            Apodization::None => 1.0,
            Apodization::Exponential { rate } => (-rate * t).exp(),
        }
    }
}

/// Two-sided discrete spectrum of a mean-removed, optionally apodized trace.
///
/// Convention: S_k = dt · Σ_n s_n · e^{−i2πkn/N} on the zero-padded grid, so
/// Parseval reads Σ_n |s_n|²·dt = Σ_k |S_k|²·df with df = 1/(pad·duration).
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Original sampling step, µs.
    pub dt: f64,
    /// Original (unpadded) sample count.
    pub n_time: usize,
    pub pad_factor: usize,
    /// Frequency grid spacing of the padded transform, MHz.
    pub df: f64,
    /// Full padded DFT.
    pub complex: Vec<C64>,
    /// Mean that was removed before transforming.
    pub mean: f64,
    /// Mean-removed, apodized time samples (unpadded).
    pub windowed: Vec<f64>,
    pub apodization: Apodization,
}

impl Spectrum {
    /// Padded transform length.
    pub fn n(&self) -> usize {
        self.complex.len()
    }

    /// Unpadded trace duration N·dt, µs; the unpadded grid spacing is its
    /// inverse.
    pub fn duration(&self) -> f64 {
        self.n_time as f64 * self.dt
    }

    /// Number of non-negative-frequency bins (0..=Nyquist).
    pub fn half_len(&self) -> usize {
        self.n() / 2 + 1
    }

    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.df
    }

    /// Magnitude at bin `k` of the positive half.
    pub fn magnitude(&self, k: usize) -> f64 {
        self.complex[k].norm()
    }

    /// Linear interpolation of the magnitude at frequency `f` (positive half).
    pub fn magnitude_at(&self, f: f64) -> f64 {
        let x = f / self.df;
        let k = x.floor() as usize;
        if x < 0.0 || k + 1 >= self.half_len() {
            return 0.0;
        }
        let w = x - k as f64;
        self.magnitude(k) * (1.0 - w) + self.magnitude(k + 1) * w
    }

    /// Σ|s_n|²·dt − Σ|S_k|²·df; vanishes by Parseval up to rounding.
    pub fn parseval_defect(&self) -> f64 {
        let time: f64 = self.windowed.iter().map(|s| s * s).sum::<f64>() * self.dt;
        let freq: f64 = self.complex.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.df;
        (time - freq).abs()
    }

    /// The strongest interpolated peak within ±`window` MHz of `f`, if any
    /// local maximum exists there.
    pub fn peak_near(&self, f: f64, window: f64) -> Option<SpectralLine> {
        let lo = (((f - window) / self.df).ceil() as usize).max(1);
        let hi = (((f + window) / self.df).floor() as usize).min(self.half_len() - 2);
        let mut best: Option<usize> = None;
        for k in lo..=hi {
            if self.magnitude(k) >= self.magnitude(k - 1) && self.magnitude(k) >= self.magnitude(k + 1)
            {
                if best.map_or(true, |b| self.magnitude(k) > self.magnitude(b)) {
                    best = Some(k);
                }
            }
        }
        best.map(|k| self.interpolate_line(k))
    }

    fn interpolate_line(&self, k: usize) -> SpectralLine {
        let (m_prev, m0, m_next) = (self.magnitude(k - 1), self.magnitude(k), self.magnitude(k + 1));
        let denom = m_prev - 2.0 * m0 + m_next;
        let delta = if denom.abs() > 1e-300 {
            0.5 * (m_prev - m_next) / denom
        } else {
            0.0
        };
        let delta = delta.clamp(-0.5, 0.5);
        let center = (k as f64 + delta) * self.df;
        let amplitude = m0 - 0.25 * (m_prev - m_next) * delta;

        // half-maximum crossings by linear interpolation
        let half = amplitude / 2.0;
        let mut reliable = true;
        let mut left = None;
        for j in (1..=k).rev() {
            let (a, b) = (self.magnitude(j - 1), self.magnitude(j));
            if a <= half && b > half {
                left = Some((j as f64 - (b - half) / (b - a)) * self.df);
                break;
            }
            if b > a && b > self.magnitude(j + 1) && j < k {
                reliable = false; // climbed into a neighboring peak
            }
        }
        let mut right = None;
        for j in k..self.half_len() - 1 {
            let (a, b) = (self.magnitude(j), self.magnitude(j + 1));
            if a > half && b <= half {
                right = Some((j as f64 + (a - half) / (a - b)) * self.df);
                break;
            }
            if b > a && j > k && self.magnitude(j - 1) > b {
                reliable = false;
            }
        }
        let fwhm = match (left, right) {
            (Some(l), Some(r)) => r - l,
            _ => {
                reliable = false;
                f64::NAN
            }
        };
        SpectralLine {
            center,
            amplitude,
            fwhm,
            reliable_width: reliable,
        }
    }
}

/// One extracted spectral line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralLine {
    /// Interpolated center, MHz.
    pub center: f64,
    /// Interpolated peak magnitude.
    pub amplitude: f64,
    /// Full width at half maximum of the magnitude line, MHz.
    pub fwhm: f64,
    /// False when the half-maximum region runs into a neighboring line.
    pub reliable_width: bool,
}

/// How many lines to pick.
#[derive(Debug, Clone, Copy)]
pub enum LineCriteria {
    /// The `n` strongest resolved peaks.
    Count(usize),
    /// All peaks at least `fraction` of the strongest.
    Threshold(f64),
}

/// Discrete Fourier transform of the mean-removed, apodized trace with
/// `pad_factor`-fold zero padding (4 is the conventional choice for peak
/// interpolation).
pub fn spectrum(trace: &FidTrace, apodization: Apodization, pad_factor: usize) -> Result<Spectrum> {
    let n = trace.samples.len();
    if n < 16 {
        return Err(Error::InvalidParams(format!(
            "spectrum needs at least 16 samples, got {n}"
        )));
    }
    let pad_factor = pad_factor.max(1);
    let mean = trace.samples.iter().sum::<f64>() / n as f64;
    let windowed: Vec<f64> = trace
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| (s - mean) * apodization.weight(k as f64 * trace.dt))
        .collect();

    let n_pad = n * pad_factor;
    let mut buf: Vec<C64> = windowed
        .iter()
        .map(|&s| C64::new(s, 0.0))
        .chain(std::iter::repeat(C64::new(0.0, 0.0)))
        .take(n_pad)
        .collect();
    FftPlanner::new().plan_fft_forward(n_pad).process(&mut buf);
    for z in &mut buf {
        *z *= trace.dt;
    }

    Ok(Spectrum {
        dt: trace.dt,
        n_time: n,
        pad_factor,
        df: 1.0 / (n_pad as f64 * trace.dt),
        complex: buf,
        mean,
        windowed,
        apodization,
    })
}

/// Pick lines from the magnitude spectrum: local maxima with quadratic
/// center/height interpolation and half-maximum width estimation, accepted
/// strongest-first with a minimum mutual separation of 1.25/duration.
///
/// Returned lines are sorted by ascending center frequency.
pub fn extract_lines(spec: &Spectrum, criteria: LineCriteria) -> Result<Vec<SpectralLine>> {
    let half = spec.half_len();
    let mut maxima: Vec<usize> = (1..half - 1)
        .filter(|&k| {
            spec.magnitude(k) > spec.magnitude(k - 1) && spec.magnitude(k) >= spec.magnitude(k + 1)
        })
        .collect();
    maxima.sort_by(|&a, &b| spec.magnitude(b).total_cmp(&spec.magnitude(a)));

    let min_sep = 1.25 / spec.duration();
    let mut accepted: Vec<SpectralLine> = Vec::new();
    let limit = match criteria {
        LineCriteria::Count(n) => n,
        LineCriteria::Threshold(_) => usize::MAX,
    };
    let floor = match criteria {
        LineCriteria::Count(_) => 0.0,
        LineCriteria::Threshold(frac) => {
            frac * maxima
                .first()
                .map(|&k| spec.magnitude(k))
                .unwrap_or(0.0)
        }
    };
    for &k in &maxima {
        if accepted.len() >= limit {
            break;
        }
        if spec.magnitude(k) < floor {
            break;
        }
        let f = spec.frequency(k);
        if accepted.iter().any(|l| (l.center - f).abs() < min_sep) {
            continue;
        }
        accepted.push(spec.interpolate_line(k));
    }
    if let LineCriteria::Count(n) = criteria {
        if accepted.len() < n {
            return Err(Error::UnresolvedLines(format!(
                "found {} resolved peaks, needed {n}",
                accepted.len()
            )));
        }
    }
    accepted.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(accepted)
}

/// Band-pass the spectrum to `band` (MHz, positive frequencies; the mirror
/// bins are kept symmetrically) and inverse-transform back to a real trace
/// of the original length. The returned trace is zero-mean; the full band
/// reproduces the mean-removed input.
pub fn isolate_line(spec: &Spectrum, band: (f64, f64)) -> Result<FidTrace> {
    let (lo, hi) = band;
    if !(lo < hi) {
        return Err(Error::EmptyBand { lo, hi });
    }
    let n_pad = spec.n();
    let mut masked = vec![C64::new(0.0, 0.0); n_pad];
    let mut kept = 0usize;
    let mut energy = 0.0;
    for k in 0..spec.half_len() {
        let f = spec.frequency(k);
        if f >= lo && f <= hi {
            masked[k] = spec.complex[k];
            energy += spec.complex[k].norm_sqr();
            kept += 1;
            if k > 0 && k < n_pad - k {
                masked[n_pad - k] = spec.complex[n_pad - k];
            }
        }
    }
    if kept == 0 || energy == 0.0 {
        return Err(Error::EmptyBand { lo, hi });
    }

    FftPlanner::new()
        .plan_fft_inverse(n_pad)
        .process(&mut masked);
    let scale = 1.0 / (n_pad as f64 * spec.dt);
    let samples: Vec<f64> = masked
        .iter()
        .take(spec.n_time)
        .map(|z| z.re * scale)
        .collect();
    Ok(FidTrace {
        dt: spec.dt,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn synth(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> FidTrace {
        FidTrace {
            dt,
            samples: (0..n).map(|k| f(k as f64 * dt)).collect(),
        }
    }

    #[test]
    fn pure_cosine_peak_position() {
        // 5 MHz cosine over 12 µs: peak at 5.000 ± 0.01 MHz
        let trace = synth(|t| (TAU * 5.0 * t).cos(), 0.01, 1200);
        let spec = spectrum(&trace, Apodization::None, 4).unwrap();
        let lines = extract_lines(&spec, LineCriteria::Count(1)).unwrap();
        assert_abs_diff_eq!(lines[0].center, 5.0, epsilon = 0.01);
    }

    #[test]
    fn damped_cosine_width_matches_lorentzian() {
        // e^{−t/T2}·cos: magnitude-spectrum FWHM = √3/(π·T2) within 5%
        let t2 = 1.6;
        let trace = synth(|t| (TAU * 8.0 * t).cos() * (-t / t2).exp(), 0.01, 1200);
        let spec = spectrum(&trace, Apodization::None, 4).unwrap();
        let lines = extract_lines(&spec, LineCriteria::Count(1)).unwrap();
        let expect = 3.0_f64.sqrt() / (std::f64::consts::PI * t2);
        assert!(lines[0].reliable_width);
        assert!(
            (lines[0].fwhm - expect).abs() < 0.05 * expect,
            "fwhm {} vs {}",
            lines[0].fwhm,
            expect
        );
    }

    #[test]
    fn parseval_holds() {
        let trace = synth(
            |t| 0.3 + (TAU * 3.0 * t).cos() * (-t / 2.0).exp() + 0.2 * (TAU * 11.0 * t).cos(),
            0.01,
            700,
        );
        for apod in [Apodization::None, Apodization::Exponential { rate: 0.4 }] {
            let spec = spectrum(&trace, apod, 4).unwrap();
            assert!(spec.parseval_defect() < 1e-9, "{:?}", apod);
        }
    }

    #[test]
    fn two_line_synthesis_recovered() {
        // centers within 0.01 MHz, amplitudes within 1%
        let t2 = 3.0;
        let (a1, f1, a2, f2) = (1.0, 6.0, 0.55, 14.5);
        let trace = synth(
            |t| (a1 * (TAU * f1 * t).cos() + a2 * (TAU * f2 * t).cos()) * (-t / t2).exp(),
            0.01,
            2400,
        );
        let spec = spectrum(&trace, Apodization::None, 4).unwrap();
        let lines = extract_lines(&spec, LineCriteria::Count(2)).unwrap();
        assert_abs_diff_eq!(lines[0].center, f1, epsilon = 0.01);
        assert_abs_diff_eq!(lines[1].center, f2, epsilon = 0.01);
        // one-sided damped cosine has |S| = a/2 · T2-limited height; compare
        // the ratio rather than absolute heights
        let ratio = lines[1].amplitude / lines[0].amplitude;
        assert!((ratio - a2 / a1).abs() < 0.01 * (a2 / a1));
    }

    #[test]
    fn width_independent_of_padding() {
        let trace = synth(|t| (TAU * 7.0 * t).cos() * (-t / 1.1).exp(), 0.01, 900);
        let w: Vec<f64> = [2usize, 4, 8]
            .iter()
            .map(|&p| {
                let spec = spectrum(&trace, Apodization::None, p).unwrap();
                extract_lines(&spec, LineCriteria::Count(1)).unwrap()[0].fwhm
            })
            .collect();
        assert!((w[0] - w[1]).abs() < 0.01 * w[1]);
        assert!((w[2] - w[1]).abs() < 0.01 * w[1]);
    }

    #[test]
    fn isolation_removes_other_tone() {
        let trace = synth(
            |t| (TAU * 5.0 * t).cos() * (-t / 2.5).exp() + 0.8 * (TAU * 15.0 * t).cos() * (-t / 2.5).exp(),
            0.01,
            1600,
        );
        let spec = spectrum(&trace, Apodization::None, 4).unwrap();
        let isolated = isolate_line(&spec, (10.0, 20.0)).unwrap();
        // compare against the pure 15 MHz component
        let reference = synth(|t| 0.8 * (TAU * 15.0 * t).cos() * (-t / 2.5).exp(), 0.01, 1600);
        let mut err = 0.0;
        let mut norm = 0.0;
        // edges of the band-limited reconstruction ring; compare the interior
        for k in 100..1500 {
            err += (isolated.samples[k] - reference.samples[k]).powi(2);
            norm += reference.samples[k].powi(2);
        }
        assert!(
            err.sqrt() < 0.01 * norm.sqrt() + 0.02,
            "residual {} vs norm {}",
            err.sqrt(),
            norm.sqrt()
        );
    }

    #[test]
    fn full_band_isolation_is_identity() {
        let trace = synth(
            |t| 0.5 + 0.3 * (TAU * 4.0 * t).cos() + 0.1 * (TAU * 19.0 * t).cos(),
            0.01,
            640,
        );
        let spec = spectrum(&trace, Apodization::None, 4).unwrap();
        let nyquist = 0.5 / trace.dt;
        let back = isolate_line(&spec, (0.0, nyquist)).unwrap();
        let mean = trace.samples.iter().sum::<f64>() / trace.samples.len() as f64;
        for (out, orig) in back.samples.iter().zip(&trace.samples) {
            assert!((out - (orig - mean)).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_band_flagged() {
        let trace = synth(|t| (TAU * 5.0 * t).cos(), 0.01, 640);
        let spec = spectrum(&trace, Apodization::None, 4).unwrap();
        assert!(matches!(
            isolate_line(&spec, (30.0, 20.0)),
            Err(Error::EmptyBand { .. })
        ));
    }
}
