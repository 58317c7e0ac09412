//! Fixtures shared by the benchmarks.

use sdolp::lattice::BeamConfig;
use sdolp::units::{contact_couplings, zeeman_energy_per_mg, DEFAULT_LAMBDA_L};
use sdolp::{AtomSpec, GridSpec, LatticeField, Physics, RadialGrid, RadialProfiles, UnitSystem};

pub fn lattice(intensity_w_per_cm2: f64) -> LatticeField {
    let beams = BeamConfig::new(intensity_w_per_cm2, DEFAULT_LAMBDA_L).expect("valid beams");
    LatticeField::new(beams, &AtomSpec::rb87()).expect("valid lattice")
}

pub fn zeeman_per_mg() -> f64 {
    zeeman_energy_per_mg(&AtomSpec::rb87(), &UnitSystem::rb87_default())
}

pub fn radial_setup(n_points: usize) -> (RadialGrid, RadialProfiles) {
    let grid = RadialGrid::new(0.4, n_points).expect("valid radial grid");
    let profiles = RadialProfiles::from_lattice(&lattice(70.0), &grid, zeeman_per_mg());
    (grid, profiles)
}

/// 70 W/cm², interacting, on an `n`² grid of side one wavelength.
pub fn physics(n: usize, b_ext_mg: f64) -> Physics {
    let grid = GridSpec::new(1.0, n).expect("valid grid");
    let maps = lattice(70.0).render(&grid).expect("field maps");
    let couplings = contact_couplings(&AtomSpec::rb87(), &UnitSystem::rb87_default());
    Physics::new(maps, b_ext_mg, zeeman_per_mg(), couplings)
}
