//! Spin-1 ⁸⁷Rb atoms in one site of a hexagonal spin-dependent optical lattice.
//!
//! The crate builds the light-shift potentials of a six-beam lattice (a scalar
//! potential and an in-plane fictitious magnetic field), solves the
//! single-atom spectrum in the isotropic approximation sector by sector of the
//! conserved total angular momentum ζ = m_F + m_ℓ, and finds mean-field
//! ground states of an F = 1 condensate by imaginary-time evolution under an
//! additional uniform field along z.
//!
//! All solver-facing quantities are dimensionless: lengths in units of the
//! laser wavelength λ_l, energies in units of the recoil energy
//! E_rec = (2πħ)²/(2mλ_l²), imaginary time in units of ħ/E_rec. With these
//! units the kinetic operator is `-KINETIC_COEFF ∇²` with
//! `KINETIC_COEFF = 1/(4π²)`.

pub mod banded;
pub mod cartesian;
pub mod error;
pub mod gpe;
pub mod grid;
pub mod io;
pub mod lattice;
pub mod observables;
pub mod polarizability;
pub mod radial;
pub mod spectral;
pub mod spin1;
pub mod units;

pub use error::{Error, Result};
pub use gpe::{
    EnergyDecomposition, GroundStateReport, Physics, SolverParams, SpinorField, SweepRow,
    TransitionTable,
};
pub use grid::GridSpec;
pub use lattice::{BeamConfig, FieldMaps, LatticeField};
pub use observables::ObservableBundle;
pub use radial::{RadialGrid, RadialProfiles, SpectrumResult, ZetaSector};
pub use units::{AtomSpec, CouplingConstants, UnitSystem};

/// Coefficient of `-∇²` in recoil units with lengths in λ_l: ħ²/(2mλ_l²E_rec).
pub const KINETIC_COEFF: f64 = 1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI);

/// Spinor component ordering used throughout: index 0, 1, 2 ↔ m_F = +1, 0, −1.
pub const MF: [i32; 3] = [1, 0, -1];
