//! Spin-1 algebra in the (m_F = +1, 0, −1) basis.

use num_complex::Complex64;

pub type Spinor = [Complex64; 3];
pub type Mat3 = [[Complex64; 3]; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMatrices {
    pub fx: Mat3,
    pub fy: Mat3,
    pub fz: Mat3,
}

impl SpinMatrices {
    pub fn new() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let is = Complex64::new(0.0, FRAC_1_SQRT_2);
        let one = Complex64::new(1.0, 0.0);
        Self {
            fx: [[ZERO, s, ZERO], [s, ZERO, s], [ZERO, s, ZERO]],
            fy: [[ZERO, -is, ZERO], [is, ZERO, -is], [ZERO, is, ZERO]],
            fz: [[one, ZERO, ZERO], [ZERO, ZERO, ZERO], [ZERO, ZERO, -one]],
        }
    }

    pub fn get(&self, axis: Axis) -> &Mat3 {
        match axis {
            Axis::X => &self.fx,
            Axis::Y => &self.fy,
            Axis::Z => &self.fz,
        }
    }
}

impl Default for SpinMatrices {
    fn default() -> Self {
        Self::new()
    }
}

pub fn mat_vec(m: &Mat3, v: &Spinor) -> Spinor {
    let mut out = [ZERO; 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn adjoint(a: &Mat3) -> Mat3 {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

pub fn apply_spin_matrix(axis: Axis, spinor: &Spinor) -> Spinor {
    let (a, b, c) = (spinor[0], spinor[1], spinor[2]);
    let s = FRAC_1_SQRT_2;
    match axis {
        Axis::X => [b * s, (a + c) * s, b * s],
        Axis::Y => {
            let i = Complex64::i();
            [-i * b * s, i * (a - c) * s, i * b * s]
        }
        Axis::Z => [a, ZERO, -c],
    }
}

/// (h·F)ψ for a real field vector `h`.
#[inline]
pub fn apply_field(h: [f64; 3], psi: &Spinor) -> Spinor {
    let s = FRAC_1_SQRT_2;
    let minus = Complex64::new(h[0], -h[1]) * s;
    let plus = Complex64::new(h[0], h[1]) * s;
    [
        minus * psi[1] + psi[0] * h[2],
        plus * psi[0] + minus * psi[2],
        plus * psi[1] - psi[2] * h[2],
    ]
}

/// (Re ψ†F_xψ, Re ψ†F_yψ, Re ψ†F_zψ); unnormalised (a spin density) when |ψ| ≠ 1.
#[inline]
pub fn local_spin_expectation(psi: &Spinor) -> [f64; 3] {
    // ψ†F₊ψ/√2 with F₊ = F_x + iF_y
    let t = psi[0].conj() * psi[1] + psi[1].conj() * psi[2];
    let s = std::f64::consts::SQRT_2;
    [s * t.re, s * t.im, psi[0].norm_sqr() - psi[2].norm_sqr()]
}

/// exp(−τ h·F) for a real field vector `h`, applied to ψ.
///
/// Uses (n̂·F)³ = n̂·F for spin 1, so
/// exp(−τ|h| n̂·F) = 1 − sinh(τ|h|) n̂·F + (cosh(τ|h|) − 1)(n̂·F)².
#[inline]
pub fn apply_exp_field(h: [f64; 3], tau: f64, psi: &Spinor) -> Spinor {
    let mag = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    if mag == 0.0 {
        return *psi;
    }
    let n = [h[0] / mag, h[1] / mag, h[2] / mag];
    let x = tau * mag;
    let p1 = apply_field(n, psi);
    let p2 = apply_field(n, &p1);
    let e = x.exp();
    let ei = 1.0 / e;
    let (sh, chm1) = (0.5 * (e - ei), 0.5 * (e + ei) - 1.0);
    [
        psi[0] - p1[0] * sh + p2[0] * chm1,
        psi[1] - p1[1] * sh + p2[1] * chm1,
        psi[2] - p1[2] * sh + p2[2] * chm1,
    ]
}

/// Rows are χ₊₁, χ₀, χ₋₁: the eigenvectors of F_r = cos φ F_x + sin φ F_y
/// with eigenvalues +1, 0, −1, written in the m_F basis.
pub fn chi_basis(phi: f64) -> Mat3 {
    let em = Complex64::from_polar(1.0, -phi);
    let ep = Complex64::from_polar(1.0, phi);
    let h = 0.5;
    let s = FRAC_1_SQRT_2;
    let r2 = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [
        [em * h, r2, ep * h],
        [em * s, ZERO, -ep * s],
        [em * h, -r2, ep * h],
    ]
}

/// Coefficients c_j = ⟨χ_j|ψ⟩.
pub fn to_chi_basis(psi: &Spinor, phi: f64) -> Spinor {
    let u = chi_basis(phi);
    let mut out = [ZERO; 3];
    for (o, row) in out.iter_mut().zip(&u) {
        *o = row[0].conj() * psi[0] + row[1].conj() * psi[1] + row[2].conj() * psi[2];
    }
    out
}

/// ψ = Σ_j c_j χ_j.
pub fn from_chi_basis(coeffs: &Spinor, phi: f64) -> Spinor {
    let u = chi_basis(phi);
    let mut out = [ZERO; 3];
    for (c, row) in coeffs.iter().zip(&u) {
        for k in 0..3 {
            out[k] += *c * row[k];
        }
    }
    out
}

/// Matrix elements ⟨χ_i|A|χ_j⟩.
pub fn operator_in_chi_basis(a: &Mat3, phi: f64) -> Mat3 {
    let u = chi_basis(phi);
    // rows of u are χ_j, so ⟨χ_i|A|χ_j⟩ = (conj(U) A Uᵀ)_ij
    let mut ut = [[ZERO; 3]; 3];
    let mut uc = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ut[i][j] = u[j][i];
            uc[i][j] = u[i][j].conj();
        }
    }
    mat_mul(&mat_mul(&uc, a), &ut)
}

/// ⟨χ_i|F_z|χ_j⟩, independent of φ: F_z only couples neighbouring F_r eigenstates.
pub fn fz_in_chi_basis() -> [[f64; 3]; 3] {
    let s = FRAC_1_SQRT_2;
    [[0.0, s, 0.0], [s, 0.0, s], [0.0, s, 0.0]]
}
