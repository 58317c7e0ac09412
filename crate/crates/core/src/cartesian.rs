//! Single-atom spectrum on a 2D Cartesian grid with the full hexagonal
//! potentials: an independent check of the radial solver that needs no
//! isotropy assumption.
//!
//! Five-point Laplacian with Dirichlet walls, the local 3×3 spin block
//! V − (B_fic + b e_z)·F at every node. The lowest levels come from
//! Chebyshev-filtered subspace iteration with Rayleigh–Ritz; a block method
//! resolves the exact ±ζ degeneracies at zero external field.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::FieldMaps;
use crate::spin1::apply_field;
use crate::{Error, Result, KINETIC_COEFF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    pub filter_degree: usize,
    /// Extra block vectors beyond the requested levels.
    pub guard_vectors: usize,
    pub max_iters: usize,
    /// Residual ‖Hx − θx‖ relative to max(1, |θ|).
    pub tol: f64,
    pub seed: u64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self { filter_degree: 24, guard_vectors: 4, max_iters: 400, tol: 1e-8, seed: 7 }
    }
}

/// Matrix-free Hamiltonian; vectors are interleaved as `3·idx + c`.
#[derive(Debug, Clone)]
pub struct CartesianHamiltonian<'a> {
    maps: &'a FieldMaps,
    zeeman: f64,
    hop: f64,
}

impl<'a> CartesianHamiltonian<'a> {
    pub fn new(maps: &'a FieldMaps, zeeman: f64) -> Self {
        let h = maps.grid.spacing();
        Self { maps, zeeman, hop: KINETIC_COEFF / (h * h) }
    }

    pub fn dim(&self) -> usize {
        3 * self.maps.grid.len()
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.maps.grid.n;
        let m = self.maps;
        for i in 0..n {
            for j in 0..n {
                let idx = i * n + j;
                let s = [x[3 * idx], x[3 * idx + 1], x[3 * idx + 2]];
                let spin = apply_field([-m.bx[idx], -m.by[idx], -self.zeeman], &s);
                let diag = 4.0 * self.hop + m.v[idx];
                for c in 0..3 {
                    let mut nb = Complex64::default();
                    if i > 0 {
                        nb += x[3 * (idx - n) + c];
                    }
                    if i + 1 < n {
                        nb += x[3 * (idx + n) + c];
                    }
                    if j > 0 {
                        nb += x[3 * (idx - 1) + c];
                    }
                    if j + 1 < n {
                        nb += x[3 * (idx + 1) + c];
                    }
                    y[3 * idx + c] = s[c] * diag - nb * self.hop + spin[c];
                }
            }
        }
    }

    /// Gershgorin upper bound on the spectrum.
    pub fn upper_bound(&self) -> f64 {
        let m = self.maps;
        let local = (0..m.grid.len())
            .map(|k| m.v[k] + self.zeeman.abs() + std::f64::consts::SQRT_2 * m.bx[k].hypot(m.by[k]))
            .fold(f64::NEG_INFINITY, f64::max);
        8.0 * self.hop + local
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram–Schmidt, applied twice.
fn orthonormalize(block: &mut [Vec<Complex64>]) -> Result<()> {
    for _ in 0..2 {
        for k in 0..block.len() {
            let (done, rest) = block.split_at_mut(k);
            let v = &mut rest[0];
            for q in done.iter() {
                let p = dot(q, v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
            }
            let nv = norm(v);
            if !(nv > 1e-300) {
                return Err(Error::EigenConvergence { iterations: 0, residual: f64::NAN });
            }
            v.iter_mut().for_each(|x| *x /= nv);
        }
    }
    Ok(())
}

/// Lowest `n_levels` eigenvalues of the Cartesian Hamiltonian at external
/// Zeeman energy `zeeman` (recoil units), ascending.
pub fn cartesian_oracle(maps: &FieldMaps, zeeman: f64, n_levels: usize, params: &OracleParams) -> Result<Vec<f64>> {
    let h = CartesianHamiltonian::new(maps, zeeman);
    let dim = h.dim();
    let m = n_levels + params.guard_vectors;
    if n_levels == 0 || m > dim {
        return Err(Error::Domain(format!("cannot extract {n_levels} levels from dimension {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut x: Vec<Vec<Complex64>> = (0..m)
        .map(|_| (0..dim).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .collect();
    orthonormalize(&mut x)?;
    let upper = h.upper_bound();
    let (mut theta, mut hx) = rayleigh_ritz(&h, &mut x);
    let mut worst = f64::INFINITY;
    for it in 0..params.max_iters {
        worst = (0..n_levels)
            .map(|k| {
                let r: f64 = hx[k].iter().zip(&x[k]).map(|(a, b)| (a - b * theta[k]).norm_sqr()).sum::<f64>().sqrt();
                r / theta[k].abs().max(1.0)
            })
            .fold(0.0, f64::max);
        if worst < params.tol {
            log::debug!("cartesian oracle converged in {it} filter sweeps");
            theta.truncate(n_levels);
            return Ok(theta);
        }
        let cutoff = theta[m - 1];
        let lowest = theta[0];
        for v in x.iter_mut() {
            *v = chebyshev_filter(&h, v, params.filter_degree, cutoff, upper, lowest);
        }
        orthonormalize(&mut x)?;
        (theta, hx) = rayleigh_ritz(&h, &mut x);
    }
    Err(Error::EigenConvergence { iterations: params.max_iters, residual: worst })
}

/// Rotates `x` onto Ritz vectors; returns ascending Ritz values and H·x.
fn rayleigh_ritz(h: &CartesianHamiltonian, x: &mut [Vec<Complex64>]) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let m = x.len();
    let dim = h.dim();
    let hx: Vec<Vec<Complex64>> = x
        .iter()
        .map(|v| {
            let mut out = vec![Complex64::default(); dim];
            h.apply(v, &mut out);
            out
        })
        .collect();
    let g = DMatrix::from_fn(m, m, |i, j| dot(&x[i], &hx[j]));
    let g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let rotate = |src: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        order
            .iter()
            .map(|&k| {
                let mut out = vec![Complex64::default(); dim];
                for (j, v) in src.iter().enumerate() {
                    let c = eig.eigenvectors[(j, k)];
                    out.iter_mut().zip(v).for_each(|(o, a)| *o += a * c);
                }
                out
            })
            .collect()
    };
    let new_x = rotate(x);
    let new_hx = rotate(&hx);
    x.clone_from_slice(&new_x);
    (order.iter().map(|&k| eig.eigenvalues[k]).collect(), new_hx)
}

/// Scaled Chebyshev filter damping [cutoff, upper] and amplifying below.
fn chebyshev_filter(h: &CartesianHamiltonian, x: &[Complex64], degree: usize, cutoff: f64, upper: f64, lowest: f64) -> Vec<Complex64> {
    let e = 0.5 * (upper - cutoff);
    let c = 0.5 * (upper + cutoff);
    let mut sigma = e / (lowest - c);
    let tau = 2.0 / sigma;
    let dim = x.len();
    let mut hv = vec![Complex64::default(); dim];
    h.apply(x, &mut hv);
    let mut prev = x.to_vec();
    let mut cur: Vec<Complex64> = hv.iter().zip(x).map(|(a, b)| (a - b * c) * (sigma / e)).collect();
    for _ in 1..degree {
        let s_new = 1.0 / (tau - sigma);
        h.apply(&cur, &mut hv);
        let next: Vec<Complex64> = hv
            .iter()
            .zip(&cur)
            .zip(&prev)
            .map(|((a, y), p)| (a - y * c) * (2.0 * s_new / e) - p * (sigma * s_new))
            .collect();
        prev = std::mem::replace(&mut cur, next);
        sigma = s_new;
    }
    cur
}
