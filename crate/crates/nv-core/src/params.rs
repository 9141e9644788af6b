//! Static system parameters, the static field vector, and the drive field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the hyperfine-tensor symmetry check, MHz.
pub const TENSOR_SYMMETRY_TOL: f64 = 1e-12;

/// All static Hamiltonian constants.
///
/// Energies in MHz, gyromagnetic ratios in MHz/G. Hyperfine tensors are given
/// in the NV frame (z along the NV axis, x in the N-V-¹³C plane) and must be
/// symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSystemParams {
    /// Electron zero-field splitting D, MHz.
    #[serde(default = "defaults::d")]
    pub d: f64,
    /// ¹⁴N quadrupole splitting P, MHz.
    #[serde(default = "defaults::p")]
    pub p: f64,
    /// Electron gyromagnetic ratio, MHz/G.
    #[serde(default = "defaults::gamma_e")]
    pub gamma_e: f64,
    /// ¹³C gyromagnetic ratio, MHz/G.
    #[serde(default = "defaults::gamma_n1")]
    pub gamma_n1: f64,
    /// ¹⁴N gyromagnetic ratio, MHz/G.
    #[serde(default = "defaults::gamma_n2")]
    pub gamma_n2: f64,
    /// ¹³C hyperfine tensor, 3×3 row-major, MHz.
    #[serde(default = "defaults::a1")]
    pub a1: [[f64; 3]; 3],
    /// ¹⁴N hyperfine tensor, 3×3 row-major, MHz.
    #[serde(default = "defaults::a2")]
    pub a2: [[f64; 3]; 3],
}

mod defaults {
    pub fn d() -> f64 {
        2870.0
    }
    pub fn p() -> f64 {
        -4.95
    }
    pub fn gamma_e() -> f64 {
        2.802495
    }
    pub fn gamma_n1() -> f64 {
        1.0705e-3
    }
    pub fn gamma_n2() -> f64 {
        3.0766e-4
    }
    pub fn a1() -> [[f64; 3]; 3] {
        [[189.3, 0.0, 24.1], [0.0, 128.4, 0.0], [24.1, 0.0, 128.9]]
    }
    /// Axial ¹⁴N tensor; the transverse components carry the literature value
    /// -2.6 MHz on both x and y.
    pub fn a2() -> [[f64; 3]; 3] {
        [[-2.6, 0.0, 0.0], [0.0, -2.6, 0.0], [0.0, 0.0, -2.3]]
    }
}

impl Default for SpinSystemParams {
    fn default() -> Self {
        Self {
            d: defaults::d(),
            p: defaults::p(),
            gamma_e: defaults::gamma_e(),
            gamma_n1: defaults::gamma_n1(),
            gamma_n2: defaults::gamma_n2(),
            a1: defaults::a1(),
            a2: defaults::a2(),
        }
    }
}

fn max_asymmetry(a: &[[f64; 3]; 3]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            m = m.max((a[i][j] - a[j][i]).abs());
        }
    }
    m
}

impl SpinSystemParams {
    /// Validate the invariants: D > 0 and symmetric hyperfine tensors.
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0) {
            return Err(Error::InvalidParams(format!(
                "zero-field splitting D must be positive, got {}",
                self.d
            )));
        }
        for v in [self.gamma_e, self.gamma_n1, self.gamma_n2] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(
                    "gyromagnetic ratios must be finite".into(),
                ));
            }
        }
        let asym1 = max_asymmetry(&self.a1);
        if asym1 > TENSOR_SYMMETRY_TOL {
            return Err(Error::NonSymmetricTensor {
                name: "A1",
                max_asym: asym1,
            });
        }
        let asym2 = max_asymmetry(&self.a2);
        if asym2 > TENSOR_SYMMETRY_TOL {
            return Err(Error::NonSymmetricTensor {
                name: "A2",
                max_asym: asym2,
            });
        }
        Ok(())
    }

    /// Parse from the JSON config format. Missing keys fall back to the
    /// built-in defaults; unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParams(format!("params JSON: {e}")))?;
        p.validate()?;
        Ok(p)
    }
}

/// Static magnetic field in spherical form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    /// Magnitude, G.
    pub b: f64,
    /// Polar angle from the NV axis, rad.
    pub theta: f64,
    /// Azimuthal angle from the NV x-axis, rad.
    pub phi: f64,
}

impl FieldVector {
    /// Construct with range checks: B ≥ 0, θ ∈ [0, π], φ ∈ [0, 2π).
    pub fn new(b: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(b >= 0.0) {
            return Err(Error::InvalidParams(format!("B must be ≥ 0, got {b}")));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidParams(format!(
                "theta must be in [0, π], got {theta}"
            )));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::InvalidParams(format!(
                "phi must be in [0, 2π), got {phi}"
            )));
        }
        Ok(Self { b, theta, phi })
    }

    /// Construct without range checks.
    ///
    /// The Cartesian parameterization extends smoothly to any angles; the
    /// sweep and finite-difference machinery uses this to step across the
    /// nominal bounds.
    pub fn new_unchecked(b: f64, theta: f64, phi: f64) -> Self {
        Self { b, theta, phi }
    }

    /// Cartesian components (Bx, By, Bz) in the NV frame, G.
    pub fn cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.b * st * cp, self.b * st * sp, self.b * ct]
    }
}

/// MW or RF drive field: amplitude, orientation, carrier frequency and phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveField {
    /// Amplitude B_mw (or B_rf), G.
    pub b_amp: f64,
    /// Polar angle ζ of the drive field from the NV axis, rad.
    pub zeta: f64,
    /// Azimuthal angle η of the drive field from the NV x-axis, rad.
    pub eta: f64,
    /// Carrier frequency ω, MHz.
    pub omega: f64,
    /// Carrier phase φ, rad.
    pub phase: f64,
}

impl DriveField {
    /// Construct with range checks: B_amp ≥ 0, ζ ∈ [0, π], η ∈ [0, 2π).
    pub fn new(b_amp: f64, zeta: f64, eta: f64, omega: f64, phase: f64) -> Result<Self> {
        if !(b_amp >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "drive amplitude must be ≥ 0, got {b_amp}"
            )));
        }
        if !(0.0..=std::f64::consts::PI).contains(&zeta) {
            return Err(Error::InvalidParams(format!(
                "zeta must be in [0, π], got {zeta}"
            )));
        }
        if !(0.0..std::f64::consts::TAU).contains(&eta) {
            return Err(Error::InvalidParams(format!(
                "eta must be in [0, 2π), got {eta}"
            )));
        }
        Ok(Self {
            b_amp,
            zeta,
            eta,
            omega,
            phase,
        })
    }

    /// Same drive with a different carrier phase.
    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Unit vector of the drive direction in the NV frame.
    pub fn direction(&self) -> [f64; 3] {
        let (sz, cz) = self.zeta.sin_cos();
        let (se, ce) = self.eta.sin_cos();
        [sz * ce, sz * se, cz]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SpinSystemParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_nonpositive_d() {
        let p = SpinSystemParams {
            d: 0.0,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn rejects_asymmetric_tensor() {
        let mut p = SpinSystemParams::default();
        p.a1[0][2] += 1e-6;
        assert!(matches!(
            p.validate(),
            Err(Error::NonSymmetricTensor { name: "A1", .. })
        ));
    }

    #[test]
    fn json_roundtrip_and_partial_override() {
        let full = serde_json::to_string(&SpinSystemParams::default()).unwrap();
        let parsed = SpinSystemParams::from_json(&full).unwrap();
        assert_eq!(parsed, SpinSystemParams::default());

        let partial = SpinSystemParams::from_json(r#"{"d": 2868.0}"#).unwrap();
        assert_eq!(partial.d, 2868.0);
        assert_eq!(partial.p, -4.95);

        assert!(SpinSystemParams::from_json(r#"{"dd": 1.0}"#).is_err());
    }

    #[test]
    fn field_vector_ranges() {
        assert!(FieldVector::new(28.9, 0.67, 0.0).is_ok());
        assert!(FieldVector::new(-1.0, 0.0, 0.0).is_err());
        assert!(FieldVector::new(1.0, 4.0, 0.0).is_err());
        assert!(FieldVector::new(1.0, 1.0, 7.0).is_err());
    }
}
