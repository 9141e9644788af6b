//! Spin operators on the 18-dimensional electron ⊗ ¹³C ⊗ ¹⁴N product space.
//!
//! Basis ordering is |m_s⟩ ∈ {+1, 0, −1} ⊗ |m_I1⟩ ∈ {+1/2, −1/2} ⊗
//! |m_I2⟩ ∈ {+1, 0, −1}, so the product-state index is
//! `9·(electron) + 3·(carbon) + (nitrogen)` with each factor counted from
//! its highest projection.

use crate::{C64, CMat, DIM};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Spin-1 operators (Sx, Sy, Sz) in the {+1, 0, −1} basis.
pub fn spin1() -> [CMat; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sx = CMat::from_row_slice(
        3,
        3,
        &[
            c(0.0, 0.0),
            c(s, 0.0),
            c(0.0, 0.0),
            c(s, 0.0),
            c(0.0, 0.0),
            c(s, 0.0),
            c(0.0, 0.0),
            c(s, 0.0),
            c(0.0, 0.0),
        ],
    );
    let sy = CMat::from_row_slice(
        3,
        3,
        &[
            c(0.0, 0.0),
            c(0.0, -s),
            c(0.0, 0.0),
            c(0.0, s),
            c(0.0, 0.0),
            c(0.0, -s),
            c(0.0, 0.0),
            c(0.0, s),
            c(0.0, 0.0),
        ],
    );
    let sz = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(-1.0, 0.0),
    ]));
    [sx, sy, sz]
}

/// Spin-1/2 operators (Ix, Iy, Iz) in the {+1/2, −1/2} basis.
pub fn spin_half() -> [CMat; 3] {
    let ix = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
    let iy = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.0, 0.0)]);
    let iz = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5, 0.0), c(-0.5, 0.0)]));
    [ix, iy, iz]
}

fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// The nine spin operators embedded on the full product space.
#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    /// Electron spin-1 components.
    pub sx: CMat,
    pub sy: CMat,
    pub sz: CMat,
    /// ¹³C spin-1/2 components.
    pub i1x: CMat,
    pub i1y: CMat,
    pub i1z: CMat,
    /// ¹⁴N spin-1 components.
    pub i2x: CMat,
    pub i2y: CMat,
    pub i2z: CMat,
}

/// Build the embedded operators with the electron ⊗ ¹³C ⊗ ¹⁴N ordering.
pub fn build_operators() -> SpinOperatorSet {
    let s = spin1();
    let i1 = spin_half();
    let i2 = spin1();

    let embed_e = |op: &CMat| op.kronecker(&eye(2)).kronecker(&eye(3));
    let embed_c = |op: &CMat| eye(3).kronecker(op).kronecker(&eye(3));
    let embed_n = |op: &CMat| eye(3).kronecker(&eye(2)).kronecker(op);

    SpinOperatorSet {
        sx: embed_e(&s[0]),
        sy: embed_e(&s[1]),
        sz: embed_e(&s[2]),
        i1x: embed_c(&i1[0]),
        i1y: embed_c(&i1[1]),
        i1z: embed_c(&i1[2]),
        i2x: embed_n(&i2[0]),
        i2y: embed_n(&i2[1]),
        i2z: embed_n(&i2[2]),
    }
}

impl SpinOperatorSet {
    /// Electron components as an array for indexing by Cartesian axis.
    pub fn electron(&self) -> [&CMat; 3] {
        [&self.sx, &self.sy, &self.sz]
    }

    /// ¹³C components.
    pub fn carbon(&self) -> [&CMat; 3] {
        [&self.i1x, &self.i1y, &self.i1z]
    }

    /// ¹⁴N components.
    pub fn nitrogen(&self) -> [&CMat; 3] {
        [&self.i2x, &self.i2y, &self.i2z]
    }

    /// n̂ · S for a unit vector n̂ in the NV frame.
    pub fn electron_along(&self, n: [f64; 3]) -> CMat {
        let mut m = CMat::zeros(DIM, DIM);
        for (w, op) in n.iter().zip(self.electron()) {
            if *w != 0.0 {
                m += op * C64::new(*w, 0.0);
            }
        }
        m
    }
}

/// Index of the product basis state |m_s, m_I1, m_I2⟩.
///
/// `ms` ∈ {1, 0, -1}, `m1_half` ∈ {1, -1} (twice m_I1), `m2` ∈ {1, 0, -1}.
pub fn basis_index(ms: i32, m1_half: i32, m2: i32) -> usize {
    let e = (1 - ms) as usize; // +1 -> 0, 0 -> 1, -1 -> 2
    let n1 = ((1 - m1_half) / 2) as usize; // +1/2 -> 0, -1/2 -> 1
    let n2 = (1 - m2) as usize;
    6 * e + 3 * n1 + n2
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative deviation from Hermiticity, ‖M − M†‖_F / ‖M‖_F.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let diff = m - m.adjoint();
    let norm = fro_norm(m);
    if norm == 0.0 {
        0.0
    } else {
        fro_norm(&diff) / norm
    }
}
