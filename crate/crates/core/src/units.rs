//! Physical constants, ⁸⁷Rb data and the recoil unit system.
//!
//! Every SI constant used anywhere in the crate lives in this module. Other
//! modules receive dimensionless numbers (lengths in λ_l, energies in E_rec)
//! or go through [`UnitSystem`].

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

// CODATA 2018 (Tiesinga et al., Rev. Mod. Phys. 93, 025010 (2021)).
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Bohr magneton, J/T.
pub const MU_B: f64 = 9.274_010_078_3e-24;
/// Speed of light in vacuum, m/s (exact).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Elementary charge, C (exact).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Atomic mass constant, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

// ⁸⁷Rb (Steck, "Rubidium 87 D Line Data", rev. 2.2.1).
/// Atomic mass of ⁸⁷Rb in u.
pub const RB87_MASS_U: f64 = 86.909_180_527;
/// D1 (5S₁/₂ → 5P₁/₂) vacuum wavelength, m.
pub const RB87_D1_WAVELENGTH: f64 = 794.979e-9;
/// D2 (5S₁/₂ → 5P₃/₂) vacuum wavelength, m.
pub const RB87_D2_WAVELENGTH: f64 = 780.241e-9;
/// Reduced dipole matrix elements in units of e·a_B.
pub const RB87_D1_DIPOLE_EA0: f64 = 2.992;
pub const RB87_D2_DIPOLE_EA0: f64 = 4.227;
/// s-wave scattering lengths for total spin 0 and 2 of the colliding pair, m.
pub const RB87_A0: f64 = 5.387e-9;
pub const RB87_A2: f64 = 5.313e-9;

/// Default lattice laser wavelength (red of D1), m.
pub const DEFAULT_LAMBDA_L: f64 = 795.456e-9;

/// One milligauss in tesla.
pub const MILLIGAUSS: f64 = 1e-7;

/// Angular frequency of light with vacuum wavelength `lambda`.
pub fn angular_frequency(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_LIGHT / lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// kg
    pub mass: f64,
    pub nuclear_spin: f64,
    /// Landé factor of the F = 1 manifold (magnitude).
    pub g_factor: f64,
    /// m
    pub a0: f64,
    /// m
    pub a2: f64,
    /// C·m
    pub d_half: f64,
    /// C·m
    pub d_threehalf: f64,
    /// rad/s
    pub omega_half: f64,
    /// rad/s
    pub omega_threehalf: f64,
}

impl AtomSpec {
    pub fn rb87() -> Self {
        Self {
            mass: RB87_MASS_U * AMU,
            nuclear_spin: 1.5,
            g_factor: 0.5,
            a0: RB87_A0,
            a2: RB87_A2,
            d_half: RB87_D1_DIPOLE_EA0 * E_CHARGE * BOHR_RADIUS,
            d_threehalf: RB87_D2_DIPOLE_EA0 * E_CHARGE * BOHR_RADIUS,
            omega_half: angular_frequency(RB87_D1_WAVELENGTH),
            omega_threehalf: angular_frequency(RB87_D2_WAVELENGTH),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("a0", self.a0),
            ("a2", self.a2),
            ("omega_half", self.omega_half),
            ("omega_threehalf", self.omega_threehalf),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.nuclear_spin >= 0.0) || !(self.g_factor >= 0.0) {
            return Err(Error::Domain("nuclear spin and g-factor must be non-negative".into()));
        }
        if !(self.d_half >= 0.0 && self.d_threehalf >= 0.0) {
            return Err(Error::Domain("dipole matrix elements must be non-negative".into()));
        }
        if self.omega_half >= self.omega_threehalf {
            return Err(Error::Domain("D1 must lie below D2".into()));
        }
        Ok(())
    }

    /// 2I + 1, the nuclear-spin degeneracy dividing the vector light shift.
    pub fn nuclear_multiplicity(&self) -> f64 {
        2.0 * self.nuclear_spin + 1.0
    }
}

impl Default for AtomSpec {
    fn default() -> Self {
        Self::rb87()
    }
}

/// (2πħ)²/(2 m λ²) in joules.
pub fn recoil_energy(lambda_l: f64, mass: f64) -> Result<f64> {
    if !(lambda_l > 0.0 && lambda_l.is_finite()) {
        return Err(Error::Domain(format!("wavelength must be positive, got {lambda_l}")));
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Domain(format!("mass must be positive, got {mass}")));
    }
    let h = 2.0 * std::f64::consts::PI * HBAR;
    Ok(h * h / (2.0 * mass * lambda_l * lambda_l))
}

/// Length unit λ_l and energy unit E_rec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// m
    pub lambda_l: f64,
    /// J
    pub e_rec: f64,
}

impl UnitSystem {
    pub fn new(lambda_l: f64, mass: f64) -> Result<Self> {
        Ok(Self { lambda_l, e_rec: recoil_energy(lambda_l, mass)? })
    }

    pub fn rb87_default() -> Self {
        Self::new(DEFAULT_LAMBDA_L, AtomSpec::rb87().mass).expect("valid defaults")
    }

    pub fn to_dimensionless_energy(&self, joules: f64) -> f64 {
        joules / self.e_rec
    }

    pub fn to_si_energy(&self, recoil: f64) -> f64 {
        recoil * self.e_rec
    }

    pub fn to_dimensionless_length(&self, metres: f64) -> f64 {
        metres / self.lambda_l
    }

    pub fn to_si_length(&self, wavelengths: f64) -> f64 {
        wavelengths * self.lambda_l
    }

    /// ħ/E_rec in seconds.
    pub fn time_unit(&self) -> f64 {
        HBAR / self.e_rec
    }

    /// Laser angular frequency 2πc/λ_l.
    pub fn laser_omega(&self) -> f64 {
        angular_frequency(self.lambda_l)
    }
}

/// gμ_B × 1 mG in recoil units: the Zeeman shift per unit m_F per milligauss.
pub fn zeeman_energy_per_mg(atom: &AtomSpec, units: &UnitSystem) -> f64 {
    units.to_dimensionless_energy(atom.g_factor * MU_B * MILLIGAUSS)
}

/// Contact couplings after the 2D reduction, in units of E_rec·λ_l².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConstants {
    pub c0_2d: f64,
    pub c2_2d: f64,
}

impl CouplingConstants {
    pub const NONE: Self = Self { c0_2d: 0.0, c2_2d: 0.0 };
}

/// c0 = 4πħ²(a0 + 2a2)/3m and c2 = 4πħ²(a2 − a0)/3m, divided by a vertical
/// extent of one wavelength.
pub fn contact_couplings(atom: &AtomSpec, units: &UnitSystem) -> CouplingConstants {
    let pref = 4.0 * std::f64::consts::PI * HBAR * HBAR / (3.0 * atom.mass);
    let c0 = pref * (atom.a0 + 2.0 * atom.a2);
    let c2 = pref * (atom.a2 - atom.a0);
    let scale = units.lambda_l * units.e_rec * units.lambda_l * units.lambda_l;
    CouplingConstants { c0_2d: c0 / scale, c2_2d: c2 / scale }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recoil_energy_rb87() {
        // hand evaluation: h = 6.62607015e-34 J s, m = 86.909180527 u
        let h = 6.626_070_15e-34_f64;
        let m = 86.909_180_527 * 1.660_539_066_60e-27;
        let lam = 795.456e-9;
        let hand = h * h / (2.0 * m * lam * lam);
        let e = recoil_energy(lam, AtomSpec::rb87().mass).unwrap();
        assert_relative_eq!(e, hand, max_relative = 1e-9);
        assert!((e - 2.404e-30).abs() < 0.001e-30, "{e}");
    }

    #[test]
    fn recoil_energy_scaling() {
        let m = AtomSpec::rb87().mass;
        let e = recoil_energy(800e-9, m).unwrap();
        assert_relative_eq!(recoil_energy(1600e-9, m).unwrap(), e / 4.0, max_relative = 1e-14);
        assert_relative_eq!(recoil_energy(800e-9, 2.0 * m).unwrap(), e / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn recoil_energy_rejects_nonpositive() {
        assert!(recoil_energy(0.0, 1.0).is_err());
        assert!(recoil_energy(1.0, -1.0).is_err());
    }

    #[test]
    fn zeeman_per_milligauss() {
        let u = UnitSystem::rb87_default();
        let z = zeeman_energy_per_mg(&AtomSpec::rb87(), &u);
        // 0.5 * 9.2740100783e-24 * 1e-7 / 2.404003e-30
        assert!((z - 0.19289).abs() < 2e-5, "{z}");
        let mut a = AtomSpec::rb87();
        a.g_factor = 0.0;
        assert_eq!(zeeman_energy_per_mg(&a, &u), 0.0);
    }

    #[test]
    fn couplings() {
        let u = UnitSystem::rb87_default();
        let c = contact_couplings(&AtomSpec::rb87(), &u);
        assert!(c.c2_2d < 0.0);
        assert_relative_eq!(c.c2_2d / c.c0_2d, (5.313 - 5.387) / (5.387 + 2.0 * 5.313), max_relative = 1e-12);
        // reduces to 2(a0 + 2a2)/(3πλ) in these units
        let hand = 2.0 * (5.387 + 2.0 * 5.313) / (3.0 * std::f64::consts::PI * 795.456);
        assert_relative_eq!(c.c0_2d, hand, max_relative = 1e-10);

        let mut a = AtomSpec::rb87();
        a.a2 = a.a0;
        assert_eq!(contact_couplings(&a, &u).c2_2d, 0.0);
    }

    #[test]
    fn rb87_invariants() {
        let a = AtomSpec::rb87();
        a.validate().unwrap();
        assert_eq!(a.nuclear_spin, 1.5);
        assert_eq!(a.g_factor, 0.5);
        assert!(a.a2 < a.a0);
        assert!(a.omega_half < a.omega_threehalf);
    }

    #[test]
    fn unit_round_trip() {
        let u = UnitSystem::rb87_default();
        for v in [1e-33, 3.7e-30, 2.0e-27] {
            assert_relative_eq!(u.to_si_energy(u.to_dimensionless_energy(v)), v, max_relative = 1e-12);
        }
        for l in [1e-9, 4e-7, 1e-6] {
            assert_relative_eq!(u.to_si_length(u.to_dimensionless_length(l)), l, max_relative = 1e-12);
        }
    }
}
