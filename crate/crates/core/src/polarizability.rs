//! Scalar and vector dynamic polarizabilities of the Rb ground state from the
//! two D lines, linewidths neglected.
//!
//! The general rank-K expression (reduced dipole elements weighted by 6-j
//! symbols, summed over excited fine-structure levels, with the counter-rotating
//! term and linewidths kept) reduces for a J = 1/2 ground state and the two D
//! lines near resonance to the two-term forms below. Only those are
//! implemented; the tensor rank vanishes identically for J = 1/2.

use crate::units::{AtomSpec, HBAR};
use crate::{Error, Result};

/// Relative distance to a line below which the polarizability is treated as singular.
const RESONANCE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarizabilities {
    /// C²·m²/J
    pub alpha0: f64,
    /// C²·m²/J
    pub alpha1: f64,
    /// rad/s
    pub omega: f64,
}

impl Polarizabilities {
    pub fn at(omega: f64, atom: &AtomSpec) -> Result<Self> {
        Ok(Self { alpha0: alpha0(omega, atom)?, alpha1: alpha1(omega, atom)?, omega })
    }

    pub fn ratio(&self) -> Result<f64> {
        if self.alpha0 == 0.0 {
            return Err(Error::ZeroScalarPolarizability(self.omega));
        }
        Ok(self.alpha1 / self.alpha0)
    }
}

/// 1/(ħ(ω_line − ω)) for both lines.
fn line_denominators(omega: f64, atom: &AtomSpec) -> Result<(f64, f64)> {
    for (line, w) in [("D1", atom.omega_half), ("D2", atom.omega_threehalf)] {
        if (w - omega).abs() <= RESONANCE_GUARD * w {
            return Err(Error::Resonance { line, omega });
        }
    }
    Ok((
        1.0 / (HBAR * (atom.omega_half - omega)),
        1.0 / (HBAR * (atom.omega_threehalf - omega)),
    ))
}

/// α0(ω) = d²₁/₂/(6ħ(ω₁/₂ − ω)) + d²₃/₂/(6ħ(ω₃/₂ − ω)).
pub fn alpha0(omega: f64, atom: &AtomSpec) -> Result<f64> {
    let (g1, g2) = line_denominators(omega, atom)?;
    Ok(atom.d_half.powi(2) * g1 / 6.0 + atom.d_threehalf.powi(2) * g2 / 6.0)
}

/// α1(ω) = d²₁/₂/(3ħ(ω₁/₂ − ω)) − d²₃/₂/(6ħ(ω₃/₂ − ω)).
pub fn alpha1(omega: f64, atom: &AtomSpec) -> Result<f64> {
    let (g1, g2) = line_denominators(omega, atom)?;
    Ok(atom.d_half.powi(2) * g1 / 3.0 - atom.d_threehalf.powi(2) * g2 / 6.0)
}

pub fn polarizability_ratio(omega: f64, atom: &AtomSpec) -> Result<f64> {
    Polarizabilities::at(omega, atom)?.ratio()
}

/// Evenly spaced scan over `[omega_lo, omega_hi]`; resonant points are skipped.
pub fn scan(omega_lo: f64, omega_hi: f64, n: usize, atom: &AtomSpec) -> Vec<Polarizabilities> {
    let step = if n > 1 { (omega_hi - omega_lo) / (n - 1) as f64 } else { 0.0 };
    (0..n)
        .filter_map(|i| Polarizabilities::at(omega_lo + step * i as f64, atom).ok())
        .collect()
}
