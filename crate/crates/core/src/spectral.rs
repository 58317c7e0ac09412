//! Square 2D FFTs on row-major grids (row index i ↔ x, column j ↔ y).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;

pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    column: Vec<Complex64>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Clone for Fft2 {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            scratch: self.scratch.clone(),
            column: self.column.clone(),
        }
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { n, forward, inverse, scratch: vec![Complex64::default(); len], column: vec![Complex64::default(); n * n] }
    }

    pub fn for_grid(grid: &GridSpec) -> Self {
        Self::new(grid.n)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Unnormalised forward transform.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        let plan = Arc::clone(&self.forward);
        self.transform(&*plan, data);
    }

    /// Inverse transform including the 1/n² factor.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let plan = Arc::clone(&self.inverse);
        self.transform(&*plan, data);
        let s = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// Inverse transform without the 1/n² factor.
    pub fn inverse_unscaled(&mut self, data: &mut [Complex64]) {
        let plan = Arc::clone(&self.inverse);
        self.transform(&*plan, data);
    }

    /// Shifts every row `r` of `data` by `shift(r)` along the contiguous
    /// axis, f(t) → f(t − s), by Fourier phase factors; `dk` is the
    /// wavenumber spacing.
    fn shift_rows(&mut self, data: &mut [Complex64], dk: f64, shift: impl Fn(usize) -> f64) {
        let n = self.n;
        let (fwd, inv) = (Arc::clone(&self.forward), Arc::clone(&self.inverse));
        let scale = 1.0 / n as f64;
        for (r, row) in data.chunks_exact_mut(n).enumerate() {
            let s = shift(r);
            fwd.process_with_scratch(row, &mut self.scratch);
            for (p, z) in row.iter_mut().enumerate() {
                let phase = if 2 * p == n {
                    Complex64::new((0.5 * n as f64 * dk * s).cos(), 0.0)
                } else {
                    let k = if 2 * p < n { p as f64 } else { p as f64 - n as f64 } * dk;
                    Complex64::from_polar(1.0, -k * s)
                };
                *z *= phase * scale;
            }
            inv.process_with_scratch(row, &mut self.scratch);
        }
    }

    fn transform(&mut self, plan: &dyn Fft<f64>, data: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "grid size mismatch");
        plan.process_with_scratch(data, &mut self.scratch);
        transpose(data, &mut self.column, n);
        plan.process_with_scratch(&mut self.column, &mut self.scratch);
        transpose(&self.column, data, n);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// ∂ψ/∂x and ∂ψ/∂y by spectral differentiation.
pub fn gradient(fft: &mut Fft2, grid: &GridSpec, psi: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = grid.n;
    let k = grid.wavenumbers();
    let mut hat = psi.to_vec();
    fft.forward(&mut hat);
    let mut dx = hat.clone();
    let mut dy = hat;
    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            dx[idx] *= Complex64::new(0.0, k[i]);
            dy[idx] *= Complex64::new(0.0, k[j]);
        }
    }
    fft.inverse(&mut dx);
    fft.inverse(&mut dy);
    (dx, dy)
}

/// The field rotated by `quarter_turns`·90° + `theta` about the grid centre,
/// g(r) = f(R⁻¹r). The quarter turns are an exact index permutation; the
/// residual angle uses three Fourier shears and should stay within ±45°.
/// Content near the box edge wraps, so the field must be localised.
pub fn rotate(fft: &mut Fft2, grid: &GridSpec, field: &[Complex64], quarter_turns: i32, theta: f64) -> Vec<Complex64> {
    let n = grid.n;
    let dk = 2.0 * std::f64::consts::PI / grid.side;
    let mut cur = field.to_vec();
    let mut tmp = vec![Complex64::default(); n * n];
    let a = -(0.5 * theta).tan();
    let b = theta.sin();
    // x shear: g(x, y) = f(x − a·y, y); along i, so work on the transpose
    transpose(&cur, &mut tmp, n);
    fft.shift_rows(&mut tmp, dk, |j| a * grid.coord(j));
    // y shear: g(x, y) = f(x, y − b·x)
    transpose(&tmp, &mut cur, n);
    fft.shift_rows(&mut cur, dk, |i| b * grid.coord(i));
    transpose(&cur, &mut tmp, n);
    fft.shift_rows(&mut tmp, dk, |j| a * grid.coord(j));
    transpose(&tmp, &mut cur, n);
    let turns = quarter_turns.rem_euclid(4);
    if turns == 0 {
        return cur;
    }
    let c = (n / 2) as i64;
    let wrap = |k: i64| k.rem_euclid(n as i64) as usize;
    let mut out = vec![Complex64::default(); n * n];
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (i as i64 - c, j as i64 - c);
            // source point R⁻¹(u, v)
            let (su, sv) = match turns {
                1 => (v, -u),
                2 => (-u, -v),
                _ => (-v, u),
            };
            out[i * n + j] = cur[wrap(su + c) * n + wrap(sv + c)];
        }
    }
    out
}
