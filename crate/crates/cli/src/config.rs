use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sdolp::gpe::SolverParams;
use sdolp::units::DEFAULT_LAMBDA_L;
use sdolp::{AtomSpec, GridSpec, RadialGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const ENV_OUT_DIR: &str = "SDOLP_OUT_DIR";
pub const ENV_THREADS: &str = "SDOLP_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub n_atoms: f64,
    pub laser: LaserConfig,
    pub atom: AtomSpec,
    pub grid: GridConfig,
    pub fields: FieldRange,
    pub radial: RadialConfig,
    pub solver: SolverParams,
    pub sweep: SweepConfig,
    pub polarizability: PolarizabilityScan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaserConfig {
    pub intensity_w_cm2: f64,
    pub wavelength_nm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Box side, λ_l.
    pub side: f64,
    pub n: usize,
}

/// Either an explicit list or `start..=stop` in `step` increments, mG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldRange {
    pub values: Vec<f64>,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialConfig {
    pub r_max: f64,
    pub n_points: usize,
    pub n_levels: usize,
    pub zetas: Vec<i32>,
    /// Intensities (W/cm²) for the gap-versus-intensity table; empty skips it.
    pub intensities: Vec<f64>,
    /// Field at which the intensity table is evaluated, mG.
    pub intensity_scan_b_mg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Bisection tolerance on B*, mG.
    pub tol_mg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolarizabilityScan {
    pub wavelength_lo_nm: f64,
    pub wavelength_hi_nm: f64,
    pub points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            threads: 0,
            n_atoms: 100.0,
            laser: LaserConfig::default(),
            atom: AtomSpec::rb87(),
            grid: GridConfig::default(),
            fields: FieldRange::default(),
            radial: RadialConfig::default(),
            solver: SolverParams::default(),
            sweep: SweepConfig::default(),
            polarizability: PolarizabilityScan::default(),
        }
    }
}

impl Default for LaserConfig {
    fn default() -> Self {
        Self { intensity_w_cm2: 70.0, wavelength_nm: DEFAULT_LAMBDA_L * 1e9 }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { side: 1.0, n: 256 }
    }
}

impl Default for FieldRange {
    fn default() -> Self {
        Self { values: Vec::new(), start: 0.0, stop: 100.0, step: 10.0 }
    }
}

impl Default for RadialConfig {
    fn default() -> Self {
        let g = RadialGrid::default();
        Self {
            r_max: g.r_max,
            n_points: g.n_points,
            n_levels: 5,
            zetas: vec![-3, -2, -1, 0, 1, 2, 3],
            intensities: Vec::new(),
            intensity_scan_b_mg: 40.0,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { tol_mg: 0.25 }
    }
}

impl Default for PolarizabilityScan {
    fn default() -> Self {
        Self { wavelength_lo_nm: 770.0, wavelength_hi_nm: 820.0, points: 501 }
    }
}

impl FieldRange {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let v = if !self.values.is_empty() {
            self.values.clone()
        } else {
            if !(self.step > 0.0) || self.stop < self.start {
                bail!("field range needs step > 0 and stop >= start");
            }
            let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
            (0..=n).map(|k| self.start + self.step * k as f64).collect()
        };
        if v.windows(2).any(|w| !(w[1] > w[0])) {
            bail!("field values must be strictly increasing");
        }
        if v.iter().any(|b| !b.is_finite() || *b < 0.0) {
            bail!("field values must be finite and non-negative");
        }
        Ok(v)
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Self::from_toml(&text).with_context(|| format!("parsing {}", p.display()))
            }
            None => Ok(Self::default()),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Environment overrides, applied before command-line flags.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(dir) = std::env::var(ENV_OUT_DIR) {
            self.out_dir = PathBuf::from(dir);
        }
        if let Ok(t) = std::env::var(ENV_THREADS) {
            self.threads = t.parse().with_context(|| format!("{ENV_THREADS}={t} is not a thread count"))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_atoms", self.n_atoms),
            ("laser.wavelength_nm", self.laser.wavelength_nm),
            ("grid.side", self.grid.side),
            ("radial.r_max", self.radial.r_max),
            ("sweep.tol_mg", self.sweep.tol_mg),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                bail!("{name} must be positive, got {v}");
            }
        }
        if !(self.laser.intensity_w_cm2.is_finite() && self.laser.intensity_w_cm2 >= 0.0) {
            bail!("laser.intensity_w_cm2 must be non-negative");
        }
        if self.polarizability.points == 0 || !(self.polarizability.wavelength_hi_nm > self.polarizability.wavelength_lo_nm) {
            bail!("polarizability scan needs points > 0 and hi > lo");
        }
        self.atom.validate()?;
        self.grid_spec()?;
        self.radial_grid()?;
        self.solver.validate()?;
        self.fields.resolve()?;
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        Ok(GridSpec::new(self.grid.side, self.grid.n)?)
    }

    pub fn radial_grid(&self) -> Result<RadialGrid> {
        Ok(RadialGrid::new(self.radial.r_max, self.radial.n_points)?)
    }

    pub fn lambda_l(&self) -> f64 {
        self.laser.wavelength_nm * 1e-9
    }

    /// SHA-256 of the resolved configuration in canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}
