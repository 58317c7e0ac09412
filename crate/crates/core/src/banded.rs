//! Real symmetric band matrices: lowest eigenpairs by Sturm-count bisection
//! and inverse iteration.
//!
//! The inertia of A − σI is read off the pivots of an LDLᵀ factorisation
//! (Sylvester's law), so the number of eigenvalues below σ costs O(n·kd²).

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymBandMatrix {
    n: usize,
    kd: usize,
    /// `lower[i * (kd + 1) + d]` = A[i][i − d]
    lower: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self { n, kd, lower: vec![0.0; n * (kd + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.kd {
            0.0
        } else {
            self.lower[i * (self.kd + 1) + (i - j)]
        }
    }

    /// Adds `v` to A[i][j] (and, implicitly, A[j][i]).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.kd, "entry ({i}, {j}) outside band {}", self.kd);
        self.lower[i * (self.kd + 1) + (i - j)] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.lower[i * (self.kd + 1)..(i + 1) * (self.kd + 1)];
            y[i] += row[0] * x[i];
            for d in 1..=self.kd.min(i) {
                y[i] += row[d] * x[i - d];
                y[i - d] += row[d] * x[i];
            }
        }
        y
    }

    /// Gershgorin bounds on the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let lo_j = i.saturating_sub(self.kd);
            let hi_j = (i + self.kd).min(self.n - 1);
            let r: f64 = (lo_j..=hi_j).filter(|&j| j != i).map(|j| self.get(i, j).abs()).sum();
            lo = lo.min(self.get(i, i) - r);
            hi = hi.max(self.get(i, i) + r);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let (n, kd) = (self.n, self.kd);
        let scale = self.gershgorin().1.abs().max(1.0);
        let tiny = f64::EPSILON * scale;
        // l[i * kd + (d - 1)] = L[i][i − d]
        let mut l = vec![0.0; n * kd.max(1)];
        let mut dvec = vec![0.0; n];
        let mut count = 0;
        for j in 0..n {
            let mut dj = self.get(j, j) - sigma;
            for d in 1..=kd.min(j) {
                let lj = l[j * kd + d - 1];
                dj -= lj * lj * dvec[j - d];
            }
            if dj.abs() < tiny {
                dj = -tiny;
            }
            dvec[j] = dj;
            if dj < 0.0 {
                count += 1;
            }
            for i in j + 1..=(j + kd).min(n - 1) {
                let mut v = self.get(i, j);
                // Σ_k L[i][k] L[j][k] d_k over k within both bands
                let k_lo = i.saturating_sub(kd);
                for k in k_lo..j {
                    v -= l[i * kd + (i - k) - 1] * l[j * kd + (j - k) - 1] * dvec[k];
                }
                l[i * kd + (i - j) - 1] = v / dj;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection to `tol` absolute.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        lo -= 1.0;
        hi += 1.0;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `count` eigenpairs, ascending. Eigenvalues are bisected down to
    /// rounding level; `rel_tol` (relative to the spectral scale) sets the
    /// inverse-iteration shift and residual target. Eigenvectors are
    /// orthonormal in the Euclidean inner product.
    pub fn lowest_eigenpairs(&self, count: usize, rel_tol: f64) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let count = count.min(self.n);
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(1.0);
        let tol = rel_tol * scale;
        let values: Vec<f64> = (0..count).map(|k| self.eigenvalue(k, 4.0 * f64::EPSILON * scale)).collect();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
        for (k, &lambda) in values.iter().enumerate() {
            let shift = lambda + 10.0 * tol;
            let lu = BandLu::factor(self, shift);
            let mut x: Vec<f64> = (0..self.n).map(|i| 1.0 + 0.1 * ((i * 7919 + k * 104_729) % 97) as f64 / 97.0).collect();
            normalize(&mut x);
            let mut residual = f64::INFINITY;
            let max_iter = 60;
            let mut it = 0;
            while it < max_iter {
                it += 1;
                let mut y = lu.solve(&x);
                // deflate previously found vectors from the same cluster
                for (v, &lv) in vectors.iter().zip(&values) {
                    if (lv - lambda).abs() < 1e3 * tol {
                        let p = dot(v, &y);
                        y.iter_mut().zip(v).for_each(|(a, b)| *a -= p * b);
                    }
                }
                normalize(&mut y);
                x = y;
                let ax = self.matvec(&x);
                residual = ax.iter().zip(&x).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
                if residual < 1e3 * tol.max(f64::EPSILON * scale) {
                    break;
                }
            }
            if residual >= 1e3 * tol.max(f64::EPSILON * scale) {
                return Err(Error::EigenConvergence { iterations: it, residual });
            }
            // full reorthogonalisation against every earlier vector
            for v in &vectors {
                let p = dot(v, &x);
                x.iter_mut().zip(v).for_each(|(a, b)| *a -= p * b);
            }
            normalize(&mut x);
            vectors.push(x);
        }
        Ok((values, vectors))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

/// LU with partial pivoting of A − σI in general band storage.
struct BandLu {
    n: usize,
    kl: usize,
    /// row width: kl (fill) + kd + 1
    width: usize,
    /// `rows[i * width + (j + kl − i)]`, j ∈ [i − kl, i + kl + ku]
    rows: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn factor(a: &SymBandMatrix, sigma: f64) -> Self {
        let n = a.n;
        let kl = a.kd;
        let ku = a.kd + kl; // fill-in from pivoting
        let width = kl + ku + 1;
        let mut rows = vec![0.0; n * width];
        let at = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + a.kd).min(n - 1);
            for j in lo..=hi {
                rows[at(i, j)] = a.get(i, j) - if i == j { sigma } else { 0.0 };
            }
        }
        let scale = a.gershgorin().1.abs().max(1.0);
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[at(k, k)].abs();
            for i in k + 1..=last {
                let v = rows[at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            let jmax = (k + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    // row p may not store column j if j > p + ku; it never does here
                    let (ik, ip) = (at(k, j), at(p, j));
                    rows.swap(ik, ip);
                }
            }
            if rows[at(k, k)].abs() < f64::EPSILON * scale {
                rows[at(k, k)] = f64::EPSILON * scale;
            }
            let piv = rows[at(k, k)];
            for i in k + 1..=last {
                let f = rows[at(i, k)] / piv;
                rows[at(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..=jmax {
                        rows[at(i, j)] -= f * rows[at(k, j)];
                    }
                }
            }
        }
        Self { n, kl, width, rows, pivots }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl, width) = (self.n, self.kl, self.width);
        let ku = width - kl - 1;
        let at = |i: usize, j: usize| i * width + (j + kl - i);
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                x[i] -= self.rows[at(i, k)] * x[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + ku).min(n - 1);
            let mut v = x[k];
            for j in k + 1..=jmax {
                v -= self.rows[at(k, j)] * x[j];
            }
            x[k] = v / self.rows[at(k, k)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn sample(n: usize, kd: usize) -> SymBandMatrix {
        let mut a = SymBandMatrix::zeros(n, kd);
        for i in 0..n {
            a.add(i, i, ((i * 37) % 11) as f64 - 5.0 + 0.01 * i as f64);
            for d in 1..=kd.min(i) {
                a.add(i, i - d, (((i + 3 * d) * 13) % 7) as f64 * 0.3 - 1.0);
            }
        }
        a
    }

    fn dense_eigs(a: &SymBandMatrix) -> Vec<f64> {
        let m = DMatrix::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j));
        let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn sturm_counts_match_dense_spectrum() {
        let a = sample(60, 3);
        let e = dense_eigs(&a);
        for s in [-8.0, -2.5, 0.0, 1.3, 6.0] {
            let c = e.iter().filter(|&&x| x < s).count();
            assert_eq!(a.count_below(s), c, "sigma {s}");
        }
    }

    #[test]
    fn lowest_pairs_match_dense() {
        let a = sample(90, 5);
        let e = dense_eigs(&a);
        let (vals, vecs) = a.lowest_eigenpairs(6, 1e-13).unwrap();
        for (k, v) in vals.iter().enumerate() {
            assert!((v - e[k]).abs() < 1e-9, "{k}: {v} vs {}", e[k]);
            let av = a.matvec(&vecs[k]);
            let res: f64 = av.iter().zip(&vecs[k]).map(|(x, y)| (x - v * y).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-8);
        }
        for i in 0..vecs.len() {
            for j in 0..vecs.len() {
                let d = dot(&vecs[i], &vecs[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_pair_gets_orthogonal_vectors() {
        // two decoupled identical tridiagonal blocks interleaved
        let n = 40;
        let mut a = SymBandMatrix::zeros(2 * n, 2);
        for i in 0..n {
            for c in 0..2 {
                a.add(2 * i + c, 2 * i + c, 2.0);
                if i > 0 {
                    a.add(2 * i + c, 2 * (i - 1) + c, -1.0);
                }
            }
        }
        let (vals, vecs) = a.lowest_eigenpairs(2, 1e-13).unwrap();
        assert!((vals[0] - vals[1]).abs() < 1e-10);
        assert!(dot(&vecs[0], &vecs[1]).abs() < 1e-8);
    }
}
