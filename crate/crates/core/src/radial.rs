//! Single atom in the isotropic site potential, one ζ sector at a time.
//!
//! With ζ = m_F + m_ℓ conserved, Ψ(r, φ) = (2πr)^{-1/2} Σ_j u_j(r) e^{iζφ} χ_j(φ)
//! where χ_j are the eigenvectors of the radial spin projection F_r (see
//! [`crate::spin1::chi_basis`]). The three radial channels u_{+1}, u_0, u_{−1}
//! obey, in recoil units with κ = 1/(4π²),
//!
//! ```text
//! 2κ[−½u″ + M(ζ) u / r²] + V(r) u − B(r) diag(1, 0, −1) u − b Z u = E u
//! M(ζ) = [[1/8 + ζ²/2, −ζ/√2, 1/4], [−ζ/√2, 3/8 + ζ²/2, −ζ/√2], [1/4, −ζ/√2, 1/8 + ζ²/2]]
//! ```
//!
//! where Z = ⟨χ_i|F_z|χ_j⟩ and b is the Zeeman energy of the external field.
//! The off-diagonal ζ entries carry a minus sign for ζ = m_F + m_ℓ; writing
//! them with a plus sign is the same system with ζ → −ζ.
//!
//! Discretisation: staggered points r_i = (i + ½)h, finite-volume radial
//! Laplacian (exact flux zero through r = 0), Dirichlet wall just beyond
//! `r_max`. Channels are interleaved so the matrix is banded with
//! half-bandwidth 3.

use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;

use crate::banded::SymBandMatrix;
use crate::lattice::LatticeField;
use crate::{Error, Result, KINETIC_COEFF};

pub const MIN_RADIAL_POINTS: usize = 200;
pub const MIN_RADIAL_EXTENT: f64 = 0.3;

/// Relative bisection tolerance of the band eigensolver.
pub const EIGEN_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n_points: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n_points: usize) -> Result<Self> {
        if n_points < MIN_RADIAL_POINTS {
            return Err(Error::Domain(format!("radial grid needs >= {MIN_RADIAL_POINTS} points, got {n_points}")));
        }
        if !(r_max >= MIN_RADIAL_EXTENT) {
            return Err(Error::Domain(format!("radial grid must reach r >= {MIN_RADIAL_EXTENT}, got {r_max}")));
        }
        Ok(Self { r_max, n_points })
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / self.n_points as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing()
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.radius(i)).collect()
    }
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self { r_max: 0.4, n_points: 400 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaSector {
    pub zeta: i32,
    /// External field along +z, mG.
    pub b_ext_mg: f64,
}

/// V(r) and the radial field B(r) sampled on a [`RadialGrid`], plus the
/// Zeeman energy per mG, all in recoil units.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfiles {
    pub v: Vec<f64>,
    pub b: Vec<f64>,
    pub zeeman_per_mg: f64,
}

impl RadialProfiles {
    pub fn from_lattice(field: &LatticeField, grid: &RadialGrid, zeeman_per_mg: f64) -> Self {
        let (v, b) = grid.radii().into_iter().map(|r| field.isotropic_profiles(r)).unzip();
        Self { v, b, zeeman_per_mg }
    }

    pub fn from_fn(grid: &RadialGrid, zeeman_per_mg: f64, f: impl Fn(f64) -> (f64, f64)) -> Self {
        let (v, b) = grid.radii().into_iter().map(f).unzip();
        Self { v, b, zeeman_per_mg }
    }
}

/// M(ζ) + I/8: the full inverse-square coupling in the χ basis, in units of 2κ/r².
pub fn centrifugal_matrix(zeta: i32) -> [[f64; 3]; 3] {
    let z = zeta as f64;
    let c = -z * FRAC_1_SQRT_2;
    let d = 0.5 * z * z;
    [[0.25 + d, c, 0.25], [c, 0.5 + d, c], [0.25, c, 0.25 + d]]
}

/// Centrifugal matrix with the sign of the ζ coupling as usually printed
/// for these equations (+ζ/√2), without the I/8 shift.
pub fn printed_centrifugal_matrix(zeta: i32) -> [[f64; 3]; 3] {
    let z = zeta as f64;
    let c = z * FRAC_1_SQRT_2;
    let d = 0.5 * z * z;
    [[0.125 + d, c, 0.25], [c, 0.375 + d, c], [0.25, c, 0.125 + d]]
}

pub fn build_radial_hamiltonian(sector: ZetaSector, grid: &RadialGrid, profiles: &RadialProfiles) -> Result<SymBandMatrix> {
    let n = grid.n_points;
    if profiles.v.len() != n || profiles.b.len() != n {
        return Err(Error::Domain("radial profiles not sampled on this grid".into()));
    }
    let h = grid.spacing();
    let kap = KINETIC_COEFF;
    let cent = centrifugal_matrix(sector.zeta);
    let zee = profiles.zeeman_per_mg * sector.b_ext_mg;
    let fz = crate::spin1::fz_in_chi_basis();
    let spin_b = [-1.0, 0.0, 1.0];

    let mut m = SymBandMatrix::zeros(3 * n, 3);
    for i in 0..n {
        let r = grid.radius(i);
        let r_out = r + 0.5 * h;
        let r_in = r - 0.5 * h;
        let diag_kin = kap * (r_out + r_in) / (r * h * h);
        for a in 0..3 {
            let row = 3 * i + a;
            m.add(row, row, diag_kin + profiles.v[i] + spin_b[a] * profiles.b[i]);
            for b in 0..=a {
                let v = 2.0 * kap * cent[a][b] / (r * r) - zee * fz[a][b];
                if v != 0.0 {
                    m.add(row, 3 * i + b, v);
                }
            }
            if i + 1 < n {
                let rn = grid.radius(i + 1);
                m.add(row, 3 * (i + 1) + a, -kap * r_out / (h * h * (r * rn).sqrt()));
            }
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub sector: ZetaSector,
    /// Ascending, recoil units.
    pub energies: Vec<f64>,
    /// Per level, the χ-basis channels (χ₊₁, χ₀, χ₋₁) on the radial grid,
    /// normalised to Σ_c Σ_i u_c(r_i)² h = 1.
    pub states: Vec<[Vec<f64>; 3]>,
    pub spacing: f64,
}

impl SpectrumResult {
    /// Principal quantum number of level `k` in this sector: n = |ζ| + 2k.
    pub fn principal(&self, k: usize) -> u32 {
        self.sector.zeta.unsigned_abs() + 2 * k as u32
    }

    /// Populations of m_F = +1, 0, −1 for level `k`.
    pub fn mf_populations(&self, k: usize) -> [f64; 3] {
        let s = &self.states[k];
        let half = 0.5;
        let r2 = FRAC_1_SQRT_2;
        let mut p = [0.0; 3];
        for i in 0..s[0].len() {
            // ψ_m = Σ_j c_j χ_j[m]; the azimuthal phases drop out of |ψ_m|²
            let (a, b, c) = (s[0][i], s[1][i], s[2][i]);
            p[0] += (half * a + r2 * b + half * c).powi(2);
            p[1] += (r2 * a - r2 * c).powi(2);
            p[2] += (half * a - r2 * b + half * c).powi(2);
        }
        p.map(|x| x * self.spacing)
    }

    pub fn fz_expectation(&self, k: usize) -> f64 {
        let p = self.mf_populations(k);
        p[0] - p[2]
    }
}

pub fn solve_sector(sector: ZetaSector, grid: &RadialGrid, profiles: &RadialProfiles, n_levels: usize) -> Result<SpectrumResult> {
    let h = build_radial_hamiltonian(sector, grid, profiles)?;
    let (energies, vecs) = h.lowest_eigenpairs(n_levels, EIGEN_REL_TOL)?;
    let scale = 1.0 / grid.spacing().sqrt();
    let n = grid.n_points;
    let states = vecs
        .into_iter()
        .map(|v| std::array::from_fn(|c| (0..n).map(|i| v[3 * i + c] * scale).collect()))
        .collect();
    Ok(SpectrumResult { sector, energies, states, spacing: grid.spacing() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRow {
    pub b_ext_mg: f64,
    pub zeta: i32,
    pub n: u32,
    pub energy: f64,
}

/// Level diagram over a set of fields and sectors; one job per (B, ζ),
/// rows ordered by B, then ζ, then energy.
pub fn level_diagram(
    profiles: &RadialProfiles,
    grid: &RadialGrid,
    zetas: &[i32],
    fields_mg: &[f64],
    n_levels: usize,
) -> Result<Vec<LevelRow>> {
    let jobs: Vec<(f64, i32)> = fields_mg.iter().flat_map(|&b| zetas.iter().map(move |&z| (b, z))).collect();
    let results: Result<Vec<SpectrumResult>> = jobs
        .par_iter()
        .map(|&(b, z)| solve_sector(ZetaSector { zeta: z, b_ext_mg: b }, grid, profiles, n_levels))
        .collect();
    let mut rows = Vec::new();
    for s in results? {
        for (k, &e) in s.energies.iter().enumerate() {
            rows.push(LevelRow { b_ext_mg: s.sector.b_ext_mg, zeta: s.sector.zeta, n: s.principal(k), energy: e });
        }
    }
    Ok(rows)
}

fn sector_ground(profiles: &RadialProfiles, grid: &RadialGrid, zeta: i32, b: f64) -> Result<f64> {
    Ok(solve_sector(ZetaSector { zeta, b_ext_mg: b }, grid, profiles, 1)?.energies[0])
}

/// E_{ζ=0} − E_{ζ=1} of the two sector ground levels.
pub fn sector_gap(profiles: &RadialProfiles, grid: &RadialGrid, b_ext_mg: f64) -> Result<f64> {
    Ok(sector_ground(profiles, grid, 0, b_ext_mg)? - sector_ground(profiles, grid, 1, b_ext_mg)?)
}

/// Field at which the ζ = 1 ground level drops below the ζ = 0 one, by
/// bisection on [lo, hi] mG.
pub fn ground_crossing(profiles: &RadialProfiles, grid: &RadialGrid, lo: f64, hi: f64, tol_mg: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (sector_gap(profiles, grid, a)?, sector_gap(profiles, grid, b)?);
    if ga.signum() == gb.signum() {
        return Err(Error::NoTransition { lo, hi });
    }
    while b - a > tol_mg {
        let m = 0.5 * (a + b);
        let gm = sector_gap(profiles, grid, m)?;
        if gm.signum() == ga.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// (intensity W/cm², E_{ζ=0} − E_{ζ=1}) at fixed external field.
pub fn crossing_intensity_scan(
    make_field: impl Fn(f64) -> Result<LatticeField> + Sync,
    grid: &RadialGrid,
    zeeman_per_mg: f64,
    b_ext_mg: f64,
    intensities: &[f64],
) -> Result<Vec<(f64, f64)>> {
    intensities
        .par_iter()
        .map(|&i| {
            let f = make_field(i)?;
            let p = RadialProfiles::from_lattice(&f, grid, zeeman_per_mg);
            Ok((i, sector_gap(&p, grid, b_ext_mg)?))
        })
        .collect()
}

/// Intensity at which the sector gap changes sign, by bisection in [lo, hi] W/cm².
pub fn crossing_intensity(
    make_field: impl Fn(f64) -> Result<LatticeField>,
    grid: &RadialGrid,
    zeeman_per_mg: f64,
    b_ext_mg: f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<f64> {
    let gap = |i: f64| -> Result<f64> {
        let p = RadialProfiles::from_lattice(&make_field(i)?, grid, zeeman_per_mg);
        sector_gap(&p, grid, b_ext_mg)
    };
    let (mut a, mut b) = (lo, hi);
    let ga = gap(a)?;
    if ga.signum() == gap(b)?.signum() {
        return Err(Error::NoTransition { lo, hi });
    }
    while b - a > rel_tol * b {
        let m = 0.5 * (a + b);
        if gap(m)?.signum() == ga.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BeamConfig;
    use crate::units::{zeeman_energy_per_mg, AtomSpec, UnitSystem, DEFAULT_LAMBDA_L};
    use nalgebra::{DMatrix, SymmetricEigen};

    fn lattice(intensity: f64) -> LatticeField {
        LatticeField::new(BeamConfig::new(intensity, DEFAULT_LAMBDA_L).unwrap(), &AtomSpec::rb87()).unwrap()
    }

    fn zpm() -> f64 {
        zeeman_energy_per_mg(&AtomSpec::rb87(), &UnitSystem::rb87_default())
    }

    fn profiles(grid: &RadialGrid) -> RadialProfiles {
        RadialProfiles::from_lattice(&lattice(70.0), grid, zpm())
    }

    #[test]
    fn centrifugal_matrix_is_rotated_mf_centrifugal() {
        // ½ O diag((ζ − m)²) Oᵀ with O the χ basis at φ = 0 (real rows)
        let s = FRAC_1_SQRT_2;
        let o = [[0.5, s, 0.5], [s, 0.0, -s], [0.5, -s, 0.5]];
        for zeta in -3..=3 {
            let d: Vec<f64> = [1, 0, -1].iter().map(|m| ((zeta - m) as f64).powi(2)).collect();
            let c = centrifugal_matrix(zeta);
            for i in 0..3 {
                for j in 0..3 {
                    let v: f64 = (0..3).map(|k| 0.5 * o[i][k] * d[k] * o[j][k]).sum();
                    assert!((c[i][j] - v).abs() < 1e-14, "zeta {zeta} ({i},{j})");
                }
            }
            // printed form + I/8 is the same matrix with ζ → −ζ
            let p = printed_centrifugal_matrix(-zeta);
            for i in 0..3 {
                for j in 0..3 {
                    let shift = if i == j { 0.125 } else { 0.0 };
                    assert!((p[i][j] + shift - c[i][j]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn hamiltonian_symmetric_and_matches_dense_solver() {
        let grid = RadialGrid::new(0.4, 200).unwrap();
        let p = profiles(&grid);
        let sector = ZetaSector { zeta: 1, b_ext_mg: 40.0 };
        let h = build_radial_hamiltonian(sector, &grid, &p).unwrap();
        let n = h.dim();
        let dense = DMatrix::from_fn(n, n, |i, j| h.get(i, j));
        assert!((&dense - dense.transpose()).amax() < 1e-12);
        let mut e: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        let s = solve_sector(sector, &grid, &p, 4).unwrap();
        for k in 0..4 {
            assert!((s.energies[k] - e[k]).abs() < 1e-8 * e[k].abs());
        }
    }

    #[test]
    fn harmonic_limit_reproduces_oscillator_levels() {
        // V = k r², B = 0: E = ħω(n + 1) with ħω = 2√(κk), n = n₁ + n₂, ζ = n₁ − n₂
        let k = 4000.0;
        let hw = 2.0 * (KINETIC_COEFF * k).sqrt();
        let grid = RadialGrid::new(0.4, 800).unwrap();
        let p = RadialProfiles::from_fn(&grid, 0.0, |r| (k * r * r, 0.0));
        for zeta in -3i32..=3 {
            let s = solve_sector(ZetaSector { zeta, b_ext_mg: 0.0 }, &grid, &p, 3).unwrap();
            // channel orbital momenta m_ℓ = ζ − m_F; each contributes levels
            // ħω(|m_ℓ| + 2j + 1); collect the oracle spectrum for this sector
            let mut oracle: Vec<f64> = [1, 0, -1]
                .iter()
                .flat_map(|m| (0..4).map(move |j| hw * (((zeta - m).abs() + 2 * j + 1) as f64)))
                .collect();
            oracle.sort_by(f64::total_cmp);
            for lvl in 0..3 {
                assert!((s.energies[lvl] - oracle[lvl]).abs() < 2e-3 * hw, "zeta {zeta}: {} vs {}", s.energies[lvl], oracle[lvl]);
            }
        }
    }

    #[test]
    fn zero_field_sectors_degenerate_and_ground_in_zeta_zero() {
        let grid = RadialGrid::default();
        let p = profiles(&grid);
        let e = |z| solve_sector(ZetaSector { zeta: z, b_ext_mg: 0.0 }, &grid, &p, 3).unwrap().energies;
        let e0 = e(0);
        for z in 1..=3 {
            let (a, b) = (e(z), e(-z));
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-9 * a[k].abs());
            }
            assert!(a[0] > e0[0]);
        }
    }

    #[test]
    fn eigenvectors_normalised() {
        let grid = RadialGrid::default();
        let s = solve_sector(ZetaSector { zeta: 2, b_ext_mg: 30.0 }, &grid, &profiles(&grid), 3).unwrap();
        for k in 0..3 {
            let norm: f64 = s.states[k].iter().flatten().map(|u| u * u).sum::<f64>() * s.spacing;
            assert!((norm - 1.0).abs() < 1e-10);
            let pops = s.mf_populations(k);
            assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            for j in 0..k {
                let ov: f64 = (0..3).map(|c| s.states[k][c].iter().zip(&s.states[j][c]).map(|(a, b)| a * b).sum::<f64>()).sum::<f64>() * s.spacing;
                assert!(ov.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zeeman_slope_matches_spin_polarisation() {
        let grid = RadialGrid::default();
        let p = profiles(&grid);
        for zeta in [0, 1] {
            let b = 10.0;
            let db = 1e-3;
            let s = solve_sector(ZetaSector { zeta, b_ext_mg: b }, &grid, &p, 1).unwrap();
            let ep = solve_sector(ZetaSector { zeta, b_ext_mg: b + db }, &grid, &p, 1).unwrap().energies[0];
            let em = solve_sector(ZetaSector { zeta, b_ext_mg: b - db }, &grid, &p, 1).unwrap().energies[0];
            let slope = (ep - em) / (2.0 * db);
            // Hellmann–Feynman: dE/dB = −gμ_B⟨F_z⟩
            let hf = -p.zeeman_per_mg * s.fz_expectation(0);
            assert!((slope - hf).abs() < 1e-6, "zeta {zeta}: {slope} vs {hf}");
        }
    }

    #[test]
    fn refinement_converges_at_second_order() {
        let e = |n: usize| {
            let g = RadialGrid::new(0.4, n).unwrap();
            solve_sector(ZetaSector { zeta: 0, b_ext_mg: 0.0 }, &g, &profiles(&g), 2).unwrap().energies
        };
        let (e1, e2, e3) = (e(200), e(400), e(800));
        for k in 0..2 {
            let order = ((e1[k] - e2[k]) / (e2[k] - e3[k])).abs().log2();
            assert!(order > 1.8, "level {k}: observed order {order}");
        }
    }

    #[test]
    fn ground_level_crossing_near_73_mg() {
        let grid = RadialGrid::default();
        let b = ground_crossing(&profiles(&grid), &grid, 40.0, 120.0, 0.05).unwrap();
        assert!((b - 73.0).abs() < 10.0, "{b}");
    }

    #[test]
    fn zero_intensity_gap_is_zeeman_sign() {
        let grid = RadialGrid::default();
        let scan = crossing_intensity_scan(
            |i| Ok(lattice(i)),
            &grid,
            zpm(),
            20.0,
            &[0.0],
        )
        .unwrap();
        assert!(scan[0].1 > 0.0);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(RadialGrid::new(0.4, 100).is_err());
        assert!(RadialGrid::new(0.1, 400).is_err());
    }
}
