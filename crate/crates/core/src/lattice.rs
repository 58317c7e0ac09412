//! Light shifts of the six-beam hexagonal lattice.
//!
//! The envelope is E(r) = (E₀/3) Σₙ (e_z + q̂ₙ × e_z) exp(i qₙ·r) with
//! qₙ = −(2π/λ_l)(cos nπ/3, sin nπ/3, 0), n = 1..6. The scalar shift is
//! V = −(α₀/4)|E|² and the vector shift acts as a fictitious magnetic field
//! gμ_B B_fic = α₁/(4(2I+1)) · i E × E*, entering the Hamiltonian as
//! −gμ_B B_fic·F.
//!
//! Positions are in units of λ_l; energies (and gμ_B B_fic) in recoil units.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::GridSpec;
use crate::polarizability::Polarizabilities;
use crate::units::{AtomSpec, UnitSystem, C_LIGHT, EPS0};
use crate::{Error, Result};

/// Nearest-neighbour distance between lattice sites in units of λ_l.
pub const LATTICE_CONSTANT: f64 = 2.0 / 1.732_050_807_568_877_2;

/// Outer radius of the radial scan used to locate the fictitious-field maximum.
pub const CELL_SCAN_RADIUS: f64 = 0.5;

const IMAG_RESIDUE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    /// Single-beam intensity, W/m².
    pub intensity: f64,
    /// m
    pub lambda_l: f64,
}

impl BeamConfig {
    pub fn new(intensity_w_per_cm2: f64, lambda_l: f64) -> Result<Self> {
        if !(intensity_w_per_cm2 >= 0.0 && intensity_w_per_cm2.is_finite()) {
            return Err(Error::Domain(format!("intensity must be non-negative, got {intensity_w_per_cm2}")));
        }
        if !(lambda_l > 0.0) {
            return Err(Error::Domain(format!("wavelength must be positive, got {lambda_l}")));
        }
        Ok(Self { intensity: intensity_w_per_cm2 * 1e4, lambda_l })
    }

    pub fn intensity_w_per_cm2(&self) -> f64 {
        self.intensity * 1e-4
    }

    /// E₀² = 2I/(cε₀), V²/m².
    pub fn field_amplitude_sq(&self) -> f64 {
        2.0 * self.intensity / (C_LIGHT * EPS0)
    }

    /// qₙ in units of 1/λ_l, n = 1..6.
    pub fn wavevectors() -> [[f64; 2]; 6] {
        std::array::from_fn(|k| {
            let a = (k as f64 + 1.0) * PI / 3.0;
            [-2.0 * PI * a.cos(), -2.0 * PI * a.sin()]
        })
    }
}

/// Field envelope at `(x, y)` in units of E₀.
pub fn envelope(x: f64, y: f64) -> [Complex64; 3] {
    let mut e = [Complex64::new(0.0, 0.0); 3];
    for q in BeamConfig::wavevectors() {
        let norm = (q[0] * q[0] + q[1] * q[1]).sqrt();
        let (qx, qy) = (q[0] / norm, q[1] / norm);
        let phase = Complex64::from_polar(1.0, q[0] * x + q[1] * y);
        // q̂ × e_z = (q̂_y, −q̂_x, 0)
        e[0] += phase * qy;
        e[1] += phase * (-qx);
        e[2] += phase;
    }
    e.map(|c| c / 3.0)
}

fn cross(a: &[Complex64; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// The lattice light shifts for one laser configuration, reduced to two
/// dimensionless strengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeField {
    pub beams: BeamConfig,
    /// α₀E₀²/E_rec: the scalar depth, V(0) = −scalar_strength.
    pub scalar_strength: f64,
    /// α₁E₀²/((2I+1)E_rec).
    pub vector_strength: f64,
}

impl LatticeField {
    pub fn new(beams: BeamConfig, atom: &AtomSpec) -> Result<Self> {
        let units = UnitSystem::new(beams.lambda_l, atom.mass)?;
        let pol = Polarizabilities::at(units.laser_omega(), atom)?;
        let e0sq = beams.field_amplitude_sq();
        Ok(Self::from_strengths(
            beams,
            units.to_dimensionless_energy(pol.alpha0 * e0sq),
            units.to_dimensionless_energy(pol.alpha1 * e0sq) / atom.nuclear_multiplicity(),
        ))
    }

    pub fn from_strengths(beams: BeamConfig, scalar_strength: f64, vector_strength: f64) -> Self {
        Self { beams, scalar_strength, vector_strength }
    }

    /// V(r) = −(α₀/4)|E|².
    pub fn scalar_potential(&self, x: f64, y: f64) -> f64 {
        let e = envelope(x, y);
        let intensity: f64 = e.iter().map(|c| c.norm_sqr()).sum();
        -0.25 * self.scalar_strength * intensity
    }

    /// In-plane gμ_B B_fic at `(x, y)`; the z component vanishes identically.
    pub fn fictitious_field(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let [bx, by, bz] = self.fictitious_field_3d(x, y)?;
        debug_assert!(bz.abs() <= 1e-12 * self.vector_strength.abs());
        Ok([bx, by])
    }

    /// All three components, z included, for consistency checks.
    pub fn fictitious_field_3d(&self, x: f64, y: f64) -> Result<[f64; 3]> {
        let e = envelope(x, y);
        let ec = e.map(|c| c.conj());
        let w = cross(&e, &ec).map(|c| c * Complex64::i());
        let scale = 0.25 * self.vector_strength;
        let mag = w.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
        let imag = w.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if imag > IMAG_RESIDUE_TOL * mag.max(1.0) {
            return Err(Error::ImaginaryResidue { x, y, residue: imag / mag.max(1.0) });
        }
        Ok(w.map(|c| scale * c.re))
    }

    /// Radial component of the field with the vector shift written as
    /// i E* × E instead of i E × E*; equals −1 × the closed-form profile.
    pub fn fictitious_field_conjugate_convention(&self, x: f64, y: f64) -> [f64; 2] {
        let e = envelope(x, y);
        let ec = e.map(|c| c.conj());
        let w = cross(&ec, &e).map(|c| c * Complex64::i());
        [0.25 * self.vector_strength * w[0].re, 0.25 * self.vector_strength * w[1].re]
    }

    /// Closed forms near the site centre, (V(r), B_r(r)):
    /// V = −(α₀E₀²/6)[2 + 3J₀(2πr) + J₀(2√3πr)],
    /// B_r = (α₁E₀²/(3(2I+1)))[J₁(2πr) + J₁(4πr) + √3 J₁(2√3πr)].
    pub fn isotropic_profiles(&self, r: f64) -> (f64, f64) {
        let s3 = 3f64.sqrt();
        let a = 2.0 * PI * r;
        let v = -self.scalar_strength / 6.0 * (2.0 + 3.0 * libm::j0(a) + libm::j0(s3 * a));
        let b = self.vector_strength / 3.0
            * (libm::j1(a) + libm::j1(2.0 * a) + s3 * libm::j1(s3 * a));
        (v, b)
    }

    /// Location and value of the maximum of the closed-form B_r(r) on
    /// [0, CELL_SCAN_RADIUS]: a coarse scan refined by golden-section search.
    pub fn fictitious_field_maximum(&self) -> (f64, f64) {
        let n = 2000;
        let h = CELL_SCAN_RADIUS / n as f64;
        let f = |r: f64| self.isotropic_profiles(r).1;
        let best = (0..=n).max_by(|&a, &b| f(a as f64 * h).total_cmp(&f(b as f64 * h))).unwrap();
        let (mut lo, mut hi) = (((best as f64) - 1.0).max(0.0) * h, ((best + 1) as f64 * h).min(CELL_SCAN_RADIUS));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let r = 0.5 * (lo + hi);
        (r, f(r))
    }

    /// ħω of the harmonic expansion V ≈ V(0) + s π² r², in recoil units.
    pub fn harmonic_quantum(&self) -> f64 {
        self.scalar_strength.sqrt()
    }

    /// Oscillator length ℓ with ground state ∝ exp(−r²/2ℓ²), in λ_l.
    pub fn harmonic_length(&self) -> f64 {
        1.0 / (PI * 2f64.sqrt() * self.scalar_strength.powf(0.25))
    }

    pub fn render(&self, grid: &GridSpec) -> Result<FieldMaps> {
        render_field_maps(self, grid)
    }
}

/// Potentials sampled on a [`GridSpec`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMaps {
    pub grid: GridSpec,
    pub v: Vec<f64>,
    pub bx: Vec<f64>,
    pub by: Vec<f64>,
}

impl FieldMaps {
    /// Maps built from arbitrary point functions, e.g. a harmonic trap in tests.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> (f64, f64, f64) + Sync) -> Self {
        let vals: Vec<(f64, f64, f64)> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (x, y) = grid.position(idx);
                f(x, y)
            })
            .collect();
        Self {
            grid,
            v: vals.iter().map(|t| t.0).collect(),
            bx: vals.iter().map(|t| t.1).collect(),
            by: vals.iter().map(|t| t.2).collect(),
        }
    }

    pub fn min_potential(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn render_field_maps(field: &LatticeField, grid: &GridSpec) -> Result<FieldMaps> {
    if grid.side > LATTICE_CONSTANT {
        log::warn!(
            "grid side {} λ exceeds one lattice cell ({:.4} λ); the model is site-local",
            grid.side,
            LATTICE_CONSTANT
        );
    }
    // validate the imaginary residue everywhere before sampling in parallel
    let rows: Result<Vec<Vec<(f64, f64, f64)>>> = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            (0..grid.n)
                .map(|j| {
                    let (x, y) = (grid.coord(i), grid.coord(j));
                    let [bx, by] = field.fictitious_field(x, y)?;
                    Ok((field.scalar_potential(x, y), bx, by))
                })
                .collect()
        })
        .collect();
    let vals: Vec<(f64, f64, f64)> = rows?.into_iter().flatten().collect();
    Ok(FieldMaps {
        grid: *grid,
        v: vals.iter().map(|t| t.0).collect(),
        bx: vals.iter().map(|t| t.1).collect(),
        by: vals.iter().map(|t| t.2).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::DEFAULT_LAMBDA_L;

    fn field(intensity: f64) -> LatticeField {
        LatticeField::new(BeamConfig::new(intensity, DEFAULT_LAMBDA_L).unwrap(), &AtomSpec::rb87()).unwrap()
    }

    fn rot(a: f64, v: [f64; 2]) -> [f64; 2] {
        [a.cos() * v[0] - a.sin() * v[1], a.sin() * v[0] + a.cos() * v[1]]
    }

    #[test]
    fn wavevectors_sum_to_zero() {
        let q = BeamConfig::wavevectors();
        let s = q.iter().fold([0.0, 0.0], |a, v| [a[0] + v[0], a[1] + v[1]]);
        assert!(s[0].abs() < 1e-14 && s[1].abs() < 1e-14);
        for v in q {
            assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - 2.0 * PI).abs() < 1e-14);
        }
    }

    #[test]
    fn envelope_at_origin() {
        let e = envelope(0.0, 0.0);
        assert!(e[0].norm() < 1e-15 && e[1].norm() < 1e-15);
        assert!((e[2] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn envelope_rotates_with_the_lattice() {
        let a = PI / 3.0;
        for p in [[0.03, 0.01], [0.2, -0.1], [0.41, 0.33]] {
            let e = envelope(p[0], p[1]);
            let pr = rot(a, p);
            let er = envelope(pr[0], pr[1]);
            let re = rot(a, [e[0].re, e[1].re]);
            let im = rot(a, [e[0].im, e[1].im]);
            assert!((er[0] - Complex64::new(re[0], im[0])).norm() < 1e-13);
            assert!((er[1] - Complex64::new(re[1], im[1])).norm() < 1e-13);
            assert!((er[2] - e[2]).norm() < 1e-13);
        }
    }

    #[test]
    fn intensity_is_lattice_periodic() {
        // a primitive lattice vector of the intensity pattern
        let a1 = [LATTICE_CONSTANT, 0.0];
        let a1 = rot(PI / 6.0, a1);
        let int = |x: f64, y: f64| envelope(x, y).iter().map(|c| c.norm_sqr()).sum::<f64>();
        for p in [[0.05, 0.02], [0.3, -0.2], [-0.11, 0.4]] {
            assert!((int(p[0], p[1]) - int(p[0] + a1[0], p[1] + a1[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_potential_values() {
        let f = field(70.0);
        assert!((f.scalar_potential(0.0, 0.0) + f.scalar_strength).abs() < 1e-12 * f.scalar_strength);
        assert!((f.isotropic_profiles(0.0).0 + f.scalar_strength).abs() < 1e-12 * f.scalar_strength);
        // attractive: V < 0 over the cell
        let g = GridSpec::new(1.0, 64).unwrap();
        for idx in 0..g.len() {
            let (x, y) = g.position(idx);
            assert!(f.scalar_potential(x, y) <= 0.0);
        }
    }

    #[test]
    fn fictitious_field_at_origin_and_direction() {
        let f = field(70.0);
        let b = f.fictitious_field(0.0, 0.0).unwrap();
        assert!(b[0].abs() < 1e-14 && b[1].abs() < 1e-14);
        for phi in [0.0, 0.7, 2.5, 4.0] {
            let r = 0.02;
            let (x, y) = (r * f64::cos(phi), r * f64::sin(phi));
            let b = f.fictitious_field(x, y).unwrap();
            let radial = (b[0] * x + b[1] * y) / r;
            assert!(radial > 0.0, "outward near the centre");
            let tangential = (-b[0] * y + b[1] * x) / r;
            assert!(tangential.abs() < 1e-6 * radial);
        }
    }

    #[test]
    fn field_z_component_vanishes() {
        let f = field(70.0);
        for p in [[0.01, 0.02], [0.3, -0.25], [-0.4, 0.1]] {
            let b = f.fictitious_field_3d(p[0], p[1]).unwrap();
            assert!(b[2].abs() <= 1e-14 * f.vector_strength, "{}", b[2]);
        }
    }

    #[test]
    fn closed_forms_match_full_field_near_centre() {
        let f = field(70.0);
        for r in [0.005, 0.02, 0.049] {
            for phi in [0.0, 0.3, 1.1] {
                let (x, y) = (r * f64::cos(phi), r * f64::sin(phi));
                let (vi, bi) = f.isotropic_profiles(r);
                let v = f.scalar_potential(x, y);
                assert!(((v - vi) / vi).abs() < 1e-2);
                let b = f.fictitious_field(x, y).unwrap();
                let br = (b[0] * x + b[1] * y) / r;
                assert!(((br - bi) / bi).abs() < 1e-2, "{br} {bi}");
                let bc = f.fictitious_field_conjugate_convention(x, y);
                let bcr = (bc[0] * x + bc[1] * y) / r;
                assert!(((bcr + bi) / bi).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn field_maximum_is_interior() {
        let f = field(70.0);
        let (r, b) = f.fictitious_field_maximum();
        assert!(r > 0.05 && r < 0.45, "{r}");
        // independent brute-force scan
        let brute = (0..=50_000).map(|i| f.isotropic_profiles(i as f64 * 1e-5).1).fold(f64::MIN, f64::max);
        assert!((b - brute).abs() < 1e-8 * brute);
        // single maximum: rising before, falling after
        let (_, before) = f.isotropic_profiles(0.5 * r);
        let (_, after) = f.isotropic_profiles(r + 0.5 * (CELL_SCAN_RADIUS - r));
        assert!(before < b && after < b);
    }

    #[test]
    fn harmonic_expansion_matches_second_derivative() {
        let f = field(70.0);
        let h = 1e-4;
        let (v0, _) = f.isotropic_profiles(0.0);
        let (v1, _) = f.isotropic_profiles(h);
        // V(h) − V(0) ≈ s π² h²
        let k = (v1 - v0) / (h * h);
        assert!((k - f.scalar_strength * PI * PI).abs() < 1e-4 * k);
    }

    #[test]
    fn intensity_linearity() {
        let f1 = field(35.0);
        let f2 = field(70.0);
        for p in [[0.05, 0.02], [0.2, -0.1]] {
            assert!((f2.scalar_potential(p[0], p[1]) - 2.0 * f1.scalar_potential(p[0], p[1])).abs() < 1e-10);
            let b1 = f1.fictitious_field(p[0], p[1]).unwrap();
            let b2 = f2.fictitious_field(p[0], p[1]).unwrap();
            assert!((b2[0] - 2.0 * b1[0]).abs() < 1e-10 && (b2[1] - 2.0 * b1[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn divergence_nonzero_near_centre() {
        let f = field(70.0);
        let h = 1e-4;
        let div = |x: f64, y: f64| {
            let bxp = f.fictitious_field(x + h, y).unwrap()[0];
            let bxm = f.fictitious_field(x - h, y).unwrap()[0];
            let byp = f.fictitious_field(x, y + h).unwrap()[1];
            let bym = f.fictitious_field(x, y - h).unwrap()[1];
            (bxp - bxm + byp - bym) / (2.0 * h)
        };
        let d = div(0.01, 0.0);
        // B ≈ (s/3)·6π r r̂ near the centre, so ∇·B ≈ 2·(s/3)·6π
        let expect = 4.0 * PI * f.vector_strength;
        assert!(d > 0.0 && ((d - expect) / expect).abs() < 0.02, "{d} {expect}");
    }

    #[test]
    fn rendered_maps_depth() {
        let f = field(70.0);
        let maps = f.render(&GridSpec::new(0.5, 64).unwrap()).unwrap();
        assert!((maps.min_potential() + f.scalar_strength).abs() < 1e-10 * f.scalar_strength);
        // independent evaluation: α₀E₀²/E_rec from hand-typed constants
        let hbar: f64 = 1.054_571_817e-34;
        let e_a0: f64 = 1.602_176_634e-19 * 5.291_772_109_03e-11;
        let c = 299_792_458.0;
        let w1 = 2.0 * PI * c / 794.979e-9;
        let w2 = 2.0 * PI * c / 780.241e-9;
        let wl = 2.0 * PI * c / 795.456e-9;
        let a0 = (2.992 * e_a0).powi(2) / (6.0 * hbar * (w1 - wl)) + (4.227 * e_a0).powi(2) / (6.0 * hbar * (w2 - wl));
        let e0sq = 2.0 * 70e4 / (c * 8.854_187_812_8e-12);
        let m = 86.909_180_527 * 1.660_539_066_60e-27;
        let erec = (2.0 * PI * hbar).powi(2) / (2.0 * m * 795.456e-9f64.powi(2));
        assert!((f.scalar_strength - a0 * e0sq / erec).abs() < 1e-9 * f.scalar_strength);
        assert!((f.scalar_strength - 166.68).abs() < 0.05, "{}", f.scalar_strength);
    }
}
