use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Square periodic box of side `side` (λ_l units) centred on the site, with
/// `n` points per side. Point `(i, j)` sits at `((i − n/2)·dx, (j − n/2)·dx)`
/// so the site centre is a grid node. Storage is row-major in `i` (x index).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub side: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(side: f64, n: usize) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::Domain(format!("grid side must be positive, got {side}")));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::Domain(format!("grid needs an even number >= 4 of points, got {n}")));
        }
        Ok(Self { side, n })
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn position(&self, idx: usize) -> (f64, f64) {
        (self.coord(idx / self.n), self.coord(idx % self.n))
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        let dk = 2.0 * std::f64::consts::PI / self.side;
        (0..n).map(|i| if i < n / 2 { i as f64 } else { (i - n) as f64 } * dk).collect()
    }

    /// |k|² on the full grid, FFT order, same layout as real-space data.
    pub fn k_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        let mut out = Vec::with_capacity(self.len());
        for kx in &k {
            for ky in &k {
                out.push(kx * kx + ky * ky);
            }
        }
        out
    }
}
