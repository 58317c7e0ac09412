//! Diagnostics of a spinor state: populations, spin and orbital angular
//! momentum, per-component vortex windings and the local spin texture.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::gpe::SpinorField;
use crate::grid::GridSpec;
use crate::spectral::{gradient, Fft2};
use crate::spin1::local_spin_expectation;
use crate::{Error, Result, MF};

/// Radius of the loop used for windings, λ_l.
pub const WINDING_LOOP_RADIUS: f64 = 0.05;
/// Minimum |ψ| on the loop relative to the component's peak.
pub const WINDING_THRESHOLD: f64 = 1e-6;
/// Default texture window: x, y ∈ [0, TEXTURE_EXTENT].
pub const TEXTURE_EXTENT: f64 = 0.077;

pub fn populations(state: &SpinorField) -> [f64; 3] {
    state.component_norms()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularMomentum {
    pub fz_mean: f64,
    pub lz_per_component: [f64; 3],
    /// Σ_c (N_c/N)|⟨ℓ_z⟩_c|.
    pub abs_lz_mean: f64,
    /// ⟨F_z⟩ + Σ_c (N_c/N)⟨ℓ_z⟩_c, per atom.
    pub zeta_measured: f64,
}

/// ⟨ℓ_z⟩ of one component about the site centre, per atom in that
/// component; zero for an empty component.
pub fn component_lz(fft: &mut Fft2, grid: &GridSpec, psi: &[Complex64]) -> f64 {
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if norm == 0.0 {
        return 0.0;
    }
    let (dx, dy) = gradient(fft, grid, psi);
    let mut acc = 0.0;
    for idx in 0..psi.len() {
        let (x, y) = grid.position(idx);
        // ψ* (−i)(x∂_y − y∂_x) ψ
        let l = (dy[idx] * x - dx[idx] * y) * Complex64::new(0.0, -1.0);
        acc += (psi[idx].conj() * l).re;
    }
    acc / norm
}

pub fn angular_momentum(state: &SpinorField, fft: &mut Fft2) -> AngularMomentum {
    let pops = populations(state);
    let total: f64 = pops.iter().sum();
    let mut lz = [0.0; 3];
    for c in 0..3 {
        lz[c] = component_lz(fft, &state.grid, &state.psi[c]);
    }
    let w = pops.map(|p| if total > 0.0 { p / total } else { 0.0 });
    let fz_mean = w[0] - w[2];
    let abs_lz_mean = (0..3).map(|c| w[c] * lz[c].abs()).sum();
    let orbital: f64 = (0..3).map(|c| w[c] * lz[c]).sum();
    AngularMomentum { fz_mean, lz_per_component: lz, abs_lz_mean, zeta_measured: fz_mean + orbital }
}

fn bilinear(grid: &GridSpec, field: &[Complex64], x: f64, y: f64) -> Complex64 {
    let n = grid.n;
    let h = grid.spacing();
    let fx = x / h + (n / 2) as f64;
    let fy = y / h + (n / 2) as f64;
    let (i0, j0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - i0, fy - j0);
    let wrap = |k: f64| (k as i64).rem_euclid(n as i64) as usize;
    let (i0, j0) = (wrap(i0), wrap(j0));
    let (i1, j1) = ((i0 + 1) % n, (j0 + 1) % n);
    field[i0 * n + j0] * ((1.0 - tx) * (1.0 - ty))
        + field[i1 * n + j0] * (tx * (1.0 - ty))
        + field[i0 * n + j1] * ((1.0 - tx) * ty)
        + field[i1 * n + j1] * (tx * ty)
}

/// Phase circulation of `field` around a circle of `loop_radius` about the
/// site centre, in units of 2π.
pub fn winding_number(grid: &GridSpec, field: &[Complex64], loop_radius: f64, threshold: f64) -> Result<i32> {
    let peak = field.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = threshold * peak;
    let samples = ((2.0 * PI * loop_radius / grid.spacing()) as usize * 4).max(64);
    let pts: Vec<Complex64> = (0..samples)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / samples as f64;
            bilinear(grid, field, loop_radius * t.cos(), loop_radius * t.sin())
        })
        .collect();
    let weakest = pts.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if peak == 0.0 || weakest <= floor {
        return Err(Error::UndefinedWinding { amplitude: weakest, threshold: floor });
    }
    let total: f64 = (0..samples).map(|k| (pts[(k + 1) % samples] * pts[k].conj()).arg()).sum();
    Ok((total / (2.0 * PI)).round() as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TexturePoint {
    pub x: f64,
    pub y: f64,
    /// ⟨F⟩ per atom at this point; zero where the density vanishes.
    pub f: [f64; 3],
    pub density: f64,
}

/// Local spin vectors for grid points with x, y in `[lo, hi]`.
pub fn spin_texture(state: &SpinorField, lo: f64, hi: f64) -> Vec<TexturePoint> {
    let grid = &state.grid;
    let mut out = Vec::new();
    for idx in 0..grid.len() {
        let (x, y) = grid.position(idx);
        if x < lo || x > hi || y < lo || y > hi {
            continue;
        }
        let s = state.spinor(idx);
        let density: f64 = s.iter().map(|z| z.norm_sqr()).sum();
        let f = if density > 0.0 { local_spin_expectation(&s).map(|v| v / density) } else { [0.0; 3] };
        out.push(TexturePoint { x, y, f, density });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableBundle {
    pub populations: [f64; 3],
    pub fz_mean: f64,
    pub lz_per_component: [f64; 3],
    pub abs_lz_mean: f64,
    /// `None` where the component is too weak on the loop.
    pub windings: [Option<i32>; 3],
    pub zeta_measured: f64,
    pub spin_texture: Vec<TexturePoint>,
}

impl ObservableBundle {
    pub fn measure(state: &SpinorField, fft: &mut Fft2) -> Self {
        let am = angular_momentum(state, fft);
        let windings = std::array::from_fn(|c| winding_number(&state.grid, &state.psi[c], WINDING_LOOP_RADIUS, WINDING_THRESHOLD).ok());
        Self {
            populations: populations(state),
            fz_mean: am.fz_mean,
            lz_per_component: am.lz_per_component,
            abs_lz_mean: am.abs_lz_mean,
            windings,
            zeta_measured: am.zeta_measured,
            spin_texture: spin_texture(state, 0.0, TEXTURE_EXTENT),
        }
    }

    /// ζ implied by each populated component's winding (winding + m_F).
    pub fn zeta_from_windings(&self, min_fraction: f64) -> Vec<i32> {
        let total: f64 = self.populations.iter().sum();
        (0..3)
            .filter(|&c| self.populations[c] > min_fraction * total)
            .filter_map(|c| self.windings[c].map(|w| w + MF[c]))
            .collect()
    }
}
