//! Mean-field ground states of an F = 1 condensate in one lattice site.
//!
//! Energy functional (recoil units, lengths in λ_l):
//!
//! ```text
//! E[Ψ] = ∫ κ|∇Ψ|² + V n − B_fic·F − b F_z + (c₀/2) n² + (c₂/2) |F|²
//! ```
//!
//! with n = Ψ†Ψ, F = Ψ†FΨ the spin density and b the Zeeman energy of the
//! external field along z. Ground states come from imaginary-time
//! evolution with Strang splitting: half a local step (exact 3×3 spin
//! exponential at every grid point, density and spin density frozen at the
//! start of the half step), a full kinetic step in Fourier space, the second
//! half local step, then renormalisation to N atoms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::GridSpec;
use crate::lattice::FieldMaps;
use crate::observables::ObservableBundle;
use crate::spectral::{rotate, Fft2};
use crate::spin1::{apply_exp_field, apply_field, local_spin_expectation, Spinor};
use crate::units::CouplingConstants;
use crate::{Error, Result, KINETIC_COEFF, MF};

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: GridSpec,
    /// m_F = +1, 0, −1.
    pub psi: [Vec<Complex64>; 3],
    pub n_atoms: f64,
}

impl SpinorField {
    /// Takes the amplitudes and rescales them to hold `n_atoms`.
    pub fn new(grid: GridSpec, psi: [Vec<Complex64>; 3], n_atoms: f64) -> Result<Self> {
        if psi.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Domain("spinor component size does not match grid".into()));
        }
        if !(n_atoms > 0.0) {
            return Err(Error::Domain(format!("atom number must be positive, got {n_atoms}")));
        }
        let mut s = Self { grid, psi, n_atoms };
        s.normalize()?;
        Ok(s)
    }

    pub fn from_fn(grid: GridSpec, n_atoms: f64, f: impl Fn(f64, f64) -> Spinor) -> Result<Self> {
        let mut psi: [Vec<Complex64>; 3] = Default::default();
        for idx in 0..grid.len() {
            let (x, y) = grid.position(idx);
            let s = f(x, y);
            for c in 0..3 {
                psi[c].push(s[c]);
            }
        }
        Self::new(grid, psi, n_atoms)
    }

    #[inline]
    pub fn spinor(&self, idx: usize) -> Spinor {
        [self.psi[0][idx], self.psi[1][idx], self.psi[2][idx]]
    }

    pub fn component_norms(&self) -> [f64; 3] {
        let da = self.grid.cell_area();
        self.psi.each_ref().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>() * da)
    }

    pub fn norm(&self) -> f64 {
        self.component_norms().iter().sum()
    }

    pub fn density(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.psi.iter().map(|c| c[i].norm_sqr()).sum()).collect()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Divergence { term: "norm" });
        }
        let s = (self.n_atoms / norm).sqrt();
        self.psi.iter_mut().flatten().for_each(|z| *z *= s);
        Ok(())
    }

    /// Largest density on the outermost ring of grid points relative to the peak.
    pub fn boundary_density_ratio(&self) -> f64 {
        let n = self.grid.n;
        let rho = self.density();
        let peak = rho.iter().copied().fold(0.0, f64::max);
        let mut edge: f64 = 0.0;
        for k in 0..n {
            for idx in [k, (n - 1) * n + k, k * n, k * n + n - 1] {
                edge = edge.max(rho[idx]);
            }
        }
        if peak > 0.0 {
            edge / peak
        } else {
            0.0
        }
    }
}

/// Everything the functional needs apart from the state.
#[derive(Debug, Clone)]
pub struct Physics {
    pub maps: Arc<FieldMaps>,
    pub b_ext_mg: f64,
    pub zeeman_per_mg: f64,
    pub couplings: CouplingConstants,
}

impl Physics {
    pub fn new(maps: FieldMaps, b_ext_mg: f64, zeeman_per_mg: f64, couplings: CouplingConstants) -> Self {
        Self { maps: Arc::new(maps), b_ext_mg, zeeman_per_mg, couplings }
    }

    pub fn with_field(&self, b_ext_mg: f64) -> Self {
        Self { b_ext_mg, ..self.clone() }
    }

    /// Zeeman energy b = gμ_B B_ext in recoil units.
    pub fn zeeman(&self) -> f64 {
        self.zeeman_per_mg * self.b_ext_mg
    }

    pub fn grid(&self) -> &GridSpec {
        &self.maps.grid
    }

    /// Oscillator length from the curvature of V at the site centre.
    pub fn harmonic_length(&self) -> f64 {
        let g = self.grid();
        let n = g.n;
        let c = g.index(n / 2, n / 2);
        let h = g.spacing();
        let v = &self.maps.v;
        let curv = (v[c + n] + v[c - n] + v[c + 1] + v[c - 1] - 4.0 * v[c]) / (2.0 * h * h);
        // V ≈ V₀ + k r² with ∇²V = 4k
        let k = 0.5 * curv;
        if k > 0.0 {
            (KINETIC_COEFF / k).powf(0.25)
        } else {
            0.25 * g.side
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyDecomposition {
    pub kinetic: f64,
    pub scalar_potential: f64,
    pub fictitious: f64,
    pub zeeman: f64,
    pub interaction_c0: f64,
    pub interaction_c2: f64,
}

impl EnergyDecomposition {
    pub fn total(&self) -> f64 {
        self.kinetic + self.scalar_potential + self.fictitious + self.zeeman + self.interaction_c0 + self.interaction_c2
    }

    fn check(&self) -> Result<()> {
        let terms = [
            ("kinetic", self.kinetic),
            ("scalar_potential", self.scalar_potential),
            ("fictitious", self.fictitious),
            ("zeeman", self.zeeman),
            ("interaction_c0", self.interaction_c0),
            ("interaction_c2", self.interaction_c2),
        ];
        match terms.iter().find(|t| !t.1.is_finite()) {
            Some(&(term, _)) => Err(Error::Divergence { term }),
            None => Ok(()),
        }
    }
}

pub fn energy_functional(state: &SpinorField, physics: &Physics, fft: &mut Fft2) -> Result<EnergyDecomposition> {
    let grid = &state.grid;
    let da = grid.cell_area();
    let maps = &physics.maps;
    let b = physics.zeeman();
    let CouplingConstants { c0_2d: c0, c2_2d: c2 } = physics.couplings;

    let k2 = grid.k_squared();
    let mut kinetic = 0.0;
    let mut work = vec![Complex64::default(); grid.len()];
    for c in &state.psi {
        work.copy_from_slice(c);
        fft.forward(&mut work);
        kinetic += work.iter().zip(&k2).map(|(z, k)| k * z.norm_sqr()).sum::<f64>();
    }
    kinetic *= KINETIC_COEFF * da / grid.len() as f64;

    let (mut pot, mut fic, mut zee, mut int0, mut int2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for idx in 0..grid.len() {
        let s = state.spinor(idx);
        let n: f64 = s.iter().map(|z| z.norm_sqr()).sum();
        let f = local_spin_expectation(&s);
        pot += maps.v[idx] * n;
        fic -= maps.bx[idx] * f[0] + maps.by[idx] * f[1];
        zee -= b * f[2];
        int0 += n * n;
        int2 += f[0] * f[0] + f[1] * f[1] + f[2] * f[2];
    }
    let e = EnergyDecomposition {
        kinetic,
        scalar_potential: pot * da,
        fictitious: fic * da,
        zeeman: zee * da,
        interaction_c0: 0.5 * c0 * int0 * da,
        interaction_c2: 0.5 * c2 * int2 * da,
    };
    e.check()?;
    Ok(e)
}

/// Split-step propagator for a fixed grid and step size.
#[derive(Debug, Clone)]
pub struct ImaginaryTimeStepper {
    fft: Fft2,
    kinetic_factor: Vec<f64>,
    dtau: f64,
    k2: Vec<f64>,
    work: Vec<Complex64>,
}

impl ImaginaryTimeStepper {
    pub fn new(grid: &GridSpec, dtau: f64) -> Result<Self> {
        if !(dtau > 0.0 && dtau.is_finite()) {
            return Err(Error::Domain(format!("imaginary time step must be positive, got {dtau}")));
        }
        let scale = 1.0 / grid.len() as f64;
        let k2 = grid.k_squared();
        let kinetic_factor = k2.iter().map(|k| (-dtau * KINETIC_COEFF * k).exp() * scale).collect();
        Ok(Self { fft: Fft2::for_grid(grid), kinetic_factor, dtau, k2, work: vec![Complex64::default(); grid.len()] })
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn fft(&mut self) -> &mut Fft2 {
        &mut self.fft
    }

    fn local(&self, state: &mut SpinorField, physics: &Physics, t: f64) {
        let maps = &physics.maps;
        let b = physics.zeeman();
        let CouplingConstants { c0_2d: c0, c2_2d: c2 } = physics.couplings;
        let [p0, p1, p2] = &mut state.psi;
        for idx in 0..p0.len() {
            let s = [p0[idx], p1[idx], p2[idx]];
            let n: f64 = s.iter().map(|z| z.norm_sqr()).sum();
            let f = local_spin_expectation(&s);
            let h = [c2 * f[0] - maps.bx[idx], c2 * f[1] - maps.by[idx], c2 * f[2] - b];
            let r = apply_exp_field(h, t, &s);
            let damp = (-t * (maps.v[idx] + c0 * n)).exp();
            p0[idx] = r[0] * damp;
            p1[idx] = r[1] * damp;
            p2[idx] = r[2] * damp;
        }
    }

    fn kinetic(&mut self, state: &mut SpinorField) {
        for c in state.psi.iter_mut() {
            self.fft.forward(c);
            c.iter_mut().zip(&self.kinetic_factor).for_each(|(z, f)| *z *= f);
            self.fft.inverse_unscaled(c);
        }
    }

    pub fn step(&mut self, state: &mut SpinorField, physics: &Physics) -> Result<()> {
        let half = 0.5 * self.dtau;
        self.local(state, physics, half);
        self.kinetic(state);
        self.local(state, physics, half);
        state.normalize()
    }

    /// HΨ for the mean-field Hamiltonian (the functional derivative of E).
    pub fn hamiltonian(&mut self, state: &SpinorField, physics: &Physics) -> [Vec<Complex64>; 3] {
        let grid = state.grid;
        let maps = &physics.maps;
        let b = physics.zeeman();
        let CouplingConstants { c0_2d: c0, c2_2d: c2 } = physics.couplings;
        let mut hpsi: [Vec<Complex64>; 3] = Default::default();
        for c in 0..3 {
            self.work.copy_from_slice(&state.psi[c]);
            self.fft.forward(&mut self.work);
            self.work.iter_mut().zip(&self.k2).for_each(|(z, k)| *z *= KINETIC_COEFF * k);
            self.fft.inverse(&mut self.work);
            hpsi[c] = self.work.clone();
        }
        for idx in 0..grid.len() {
            let s = state.spinor(idx);
            let n: f64 = s.iter().map(|z| z.norm_sqr()).sum();
            let f = local_spin_expectation(&s);
            let h = [c2 * f[0] - maps.bx[idx], c2 * f[1] - maps.by[idx], c2 * f[2] - b];
            let spin = apply_field(h, &s);
            let scalar = maps.v[idx] + c0 * n;
            for c in 0..3 {
                hpsi[c][idx] += s[c] * scalar + spin[c];
            }
        }
        hpsi
    }

    /// μ = ⟨Ψ|H|Ψ⟩/‖Ψ‖², the gradient R = HΨ − μΨ, and ‖R‖/‖μΨ‖.
    fn gradient(&mut self, state: &SpinorField, physics: &Physics) -> (f64, [Vec<Complex64>; 3], f64) {
        let mut hpsi = self.hamiltonian(state, physics);
        let mut num = Complex64::default();
        let mut den = 0.0;
        for c in 0..3 {
            for (h, p) in hpsi[c].iter().zip(&state.psi[c]) {
                num += p.conj() * h;
                den += p.norm_sqr();
            }
        }
        let mu = num.re / den;
        let mut res = 0.0;
        for c in 0..3 {
            for (h, p) in hpsi[c].iter_mut().zip(&state.psi[c]) {
                *h -= p * mu;
                res += h.norm_sqr();
            }
        }
        (mu, hpsi, (res / (mu * mu * den)).sqrt())
    }

    /// μ and ‖HΨ − μΨ‖/‖μΨ‖.
    pub fn residual(&mut self, state: &SpinorField, physics: &Physics) -> (f64, f64) {
        let (mu, _, r) = self.gradient(state, physics);
        (mu, r)
    }

    /// One kinetic-preconditioned gradient step Ψ ← Ψ − β(α + κk²)⁻¹(HΨ − μΨ),
    /// renormalised. Its fixed points are exact stationary states, unlike
    /// those of the split step. Returns the residual before the step.
    pub fn preconditioned_step(&mut self, state: &mut SpinorField, physics: &Physics, alpha: f64, beta: f64) -> Result<f64> {
        let (_, mut g, res) = self.gradient(state, physics);
        let scale = 1.0 / state.grid.len() as f64;
        for (c, gc) in g.iter_mut().enumerate() {
            self.fft.forward(gc);
            gc.iter_mut().zip(&self.k2).for_each(|(z, k)| *z *= beta * scale / (alpha + KINETIC_COEFF * k));
            self.fft.inverse_unscaled(gc);
            state.psi[c].iter_mut().zip(gc.iter()).for_each(|(p, d)| *p -= d);
        }
        state.normalize()?;
        Ok(res)
    }
}

/// Spread of the local potential energy, used as the preconditioner shift.
fn local_energy_scale(physics: &Physics) -> f64 {
    let m = &physics.maps;
    let (lo, hi) = m.v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let bmax = m.bx.iter().zip(&m.by).map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max);
    (hi - lo) + bmax + physics.zeeman().abs() + 1.0
}

/// Projects onto the sector class ζ mod 3 of the joint threefold rotation
/// about the site centre, (Uψ)_m(r) = e^{−imθ} ψ_m(R_θ⁻¹ r) with θ = 2π/3:
/// Ψ ← (Ψ + e^{iζθ}UΨ + e^{−iζθ}U⁻¹Ψ)/3. The lattice fields are invariant
/// under U, so this removes the components through which rounding noise
/// and grid anisotropy would seed a lower sector.
pub fn project_sector(state: &mut SpinorField, zeta: i32, fft: &mut Fft2) {
    let theta = 2.0 * PI / 3.0;
    let grid = state.grid;
    for (c, &m) in MF.iter().enumerate() {
        let p = &state.psi[c];
        let fwd = rotate(fft, &grid, p, 1, PI / 6.0);
        let back = rotate(fft, &grid, p, -1, -PI / 6.0);
        let w = Complex64::from_polar(1.0 / 3.0, (zeta - m) as f64 * theta);
        let out: Vec<Complex64> =
            p.iter().zip(fwd.iter().zip(&back)).map(|(a, (f, b))| a / 3.0 + w * f + w.conj() * b).collect();
        state.psi[c] = out;
    }
}

/// One split step with a freshly planned propagator.
pub fn imaginary_time_step(state: &mut SpinorField, physics: &Physics, dtau: f64) -> Result<()> {
    ImaginaryTimeStepper::new(&state.grid, dtau)?.step(state, physics)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Imaginary-time step, ħ/E_rec.
    pub dtau: f64,
    pub max_iters: usize,
    /// Split-step phase ends when the relative energy change over
    /// `check_interval` steps falls below this.
    pub energy_tol: f64,
    pub check_interval: usize,
    /// Energy is evaluated every `energy_stride` steps (must divide `check_interval`).
    pub energy_stride: usize,
    /// Split steps between sector projections when a sector is imposed.
    pub projection_interval: usize,
    /// Target for ‖HΨ − μΨ‖/‖μΨ‖, reached by preconditioned gradient steps
    /// after the split-step phase.
    pub residual_tol: f64,
    pub polish_iters: usize,
    pub polish_step: f64,
    /// Allowed relative energy rise between evaluations before the run
    /// is rejected as unstable.
    pub monotonic_tol: f64,
    /// Relative energy rise accepted as the split-step plateau; larger
    /// rises abort with a step-size error.
    pub plateau_tol: f64,
    pub noise_amplitude: f64,
    pub seed: u64,
    pub restart_sectors: Vec<i32>,
    /// Gaussian width of the ansatz; `None` uses the harmonic length of V.
    pub ansatz_sigma: Option<f64>,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            dtau: 1e-3,
            max_iters: 100_000,
            energy_tol: 1e-10,
            check_interval: 100,
            energy_stride: 10,
            projection_interval: 10,
            residual_tol: 1e-6,
            polish_iters: 2_000,
            polish_step: 1.0,
            monotonic_tol: 1e-10,
            plateau_tol: 1e-6,
            noise_amplitude: 0.1,
            seed: 0,
            restart_sectors: vec![0, 1],
            ansatz_sigma: None,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dtau > 0.0 && self.dtau.is_finite()) {
            return Err(Error::Domain("imaginary time step must be positive".into()));
        }
        if self.energy_stride == 0 || self.check_interval == 0 || self.check_interval % self.energy_stride != 0 {
            return Err(Error::Domain("energy_stride must divide a nonzero check_interval".into()));
        }
        if self.projection_interval == 0 {
            return Err(Error::Domain("projection_interval must be nonzero".into()));
        }
        if !(self.polish_step > 0.0) {
            return Err(Error::Domain("polish step must be positive".into()));
        }
        if self.restart_sectors.iter().any(|z| z.abs() > 3) {
            return Err(Error::Domain("restart sectors must satisfy |zeta| <= 3".into()));
        }
        Ok(())
    }
}

/// ψ_{m_F} ∝ (x ± iy)^{|ζ − m_F|} exp(−r²/2σ²), equal weight per component.
pub fn sector_ansatz(zeta: i32, grid: &GridSpec, n_atoms: f64, sigma: f64) -> Result<SpinorField> {
    if zeta.abs() > 3 {
        return Err(Error::Domain(format!("sector ansatz needs |zeta| <= 3, got {zeta}")));
    }
    let mut psi: [Vec<Complex64>; 3] = Default::default();
    for (c, &m) in MF.iter().enumerate() {
        let l = zeta - m;
        let mut comp: Vec<Complex64> = (0..grid.len())
            .map(|idx| {
                let (x, y) = grid.position(idx);
                let z = if l >= 0 { Complex64::new(x, y) } else { Complex64::new(x, -y) };
                z.powi(l.abs()) * (-(x * x + y * y) / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let norm: f64 = comp.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_area();
        let s = (n_atoms / 3.0 / norm).sqrt();
        comp.iter_mut().for_each(|z| *z *= s);
        psi[c] = comp;
    }
    SpinorField::new(*grid, psi, n_atoms)
}

/// Adds uniform complex noise of relative size `amplitude` (times the
/// peak amplitude) to every component, then renormalises.
pub fn perturb(state: &mut SpinorField, amplitude: f64, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let peak = state.psi.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let a = amplitude * peak;
    for z in state.psi.iter_mut().flatten() {
        *z += Complex64::new(rng.random_range(-a..=a), rng.random_range(-a..=a));
    }
    state.normalize()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub state: SpinorField,
    pub energy: EnergyDecomposition,
    /// Split steps taken.
    pub iterations: usize,
    /// Preconditioned gradient steps taken after the split-step phase.
    pub polish_iterations: usize,
    pub converged: bool,
    pub chemical_potential: f64,
    pub residual: f64,
}

/// Imaginary-time evolution until convergence or `max_iters`. With
/// `sector = Some(ζ)` the state is kept in the class ζ mod 3 (see
/// [`project_sector`]).
pub fn evolve(state: SpinorField, physics: &Physics, params: &SolverParams, sector: Option<i32>) -> Result<Evolution> {
    evolve_observed(state, physics, params, sector, |_, _, _| {})
}

/// As [`evolve`], calling `observe(step, state, energy)` every time the
/// energy is evaluated. Steps after the split-step phase continue the count.
pub fn evolve_observed(
    mut state: SpinorField,
    physics: &Physics,
    params: &SolverParams,
    sector: Option<i32>,
    mut observe: impl FnMut(usize, &SpinorField, &EnergyDecomposition),
) -> Result<Evolution> {
    params.validate()?;
    if state.grid != *physics.grid() {
        return Err(Error::Domain("state and field maps live on different grids".into()));
    }
    let mut stepper = ImaginaryTimeStepper::new(&state.grid, params.dtau)?;
    if let Some(z) = sector {
        project_sector(&mut state, z, stepper.fft());
        state.normalize()?;
    }

    let mut energy = energy_functional(&state, physics, stepper.fft())?;
    observe(0, &state, &energy);
    let mut last = energy.total();
    let mut at_check = last;
    let mut iterations = 0;
    let mut settled = false;
    let mut accepted = (state.clone(), energy);

    while iterations < params.max_iters {
        stepper.step(&mut state, physics)?;
        iterations += 1;
        if let Some(z) = sector.filter(|_| iterations % params.projection_interval == 0) {
            project_sector(&mut state, z, stepper.fft());
            state.normalize()?;
        }
        if iterations % params.energy_stride != 0 {
            continue;
        }
        energy = energy_functional(&state, physics, stepper.fft())?;
        let e = energy.total();
        let rise = e - last;
        if iterations > 10 && rise > params.monotonic_tol * last.abs() {
            // the split-step fixed point sits slightly above the true
            // minimum; a small rise means it has been reached
            if rise > params.plateau_tol * last.abs() {
                return Err(Error::StepSize { step: iterations, rise, dtau: stepper.dtau() });
            }
            (state, energy) = accepted;
            settled = true;
            break;
        }
        observe(iterations, &state, &energy);
        last = e;
        accepted = (state.clone(), energy);
        if iterations % params.check_interval != 0 {
            continue;
        }
        let rel = (e - at_check).abs() / e.abs().max(f64::MIN_POSITIVE);
        at_check = e;
        if rel < params.energy_tol {
            settled = true;
            break;
        }
    }

    // finish on the exact stationary point
    let alpha = local_energy_scale(physics);
    let mut beta = params.polish_step;
    let (mut mu, mut residual) = stepper.residual(&state, physics);
    let mut polish = 0;
    while settled && residual >= params.residual_tol && polish < params.polish_iters && beta > 1e-6 {
        let backup = state.clone();
        stepper.preconditioned_step(&mut state, physics, alpha, beta)?;
        if let Some(z) = sector {
            project_sector(&mut state, z, stepper.fft());
            state.normalize()?;
        }
        polish += 1;
        let trial = energy_functional(&state, physics, stepper.fft())?;
        if trial.total() > last + params.monotonic_tol * last.abs() {
            state = backup;
            beta *= 0.5;
            continue;
        }
        energy = trial;
        last = trial.total();
        observe(iterations + polish, &state, &energy);
        (mu, residual) = stepper.residual(&state, physics);
    }
    let converged = settled && residual < params.residual_tol;
    if !converged {
        log::warn!("ground-state search stopped after {iterations} + {polish} steps, residual {residual:.3e}");
    }
    Ok(Evolution { state, energy, iterations, polish_iterations: polish, converged, chemical_potential: mu, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSummary {
    pub label: String,
    pub energy_total: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateReport {
    pub b_ext_mg: f64,
    pub state: SpinorField,
    pub energy: EnergyDecomposition,
    pub energy_total: f64,
    pub observables: ObservableBundle,
    pub converged: bool,
    pub iterations: usize,
    pub chemical_potential: f64,
    pub residual: f64,
    pub candidates: Vec<CandidateSummary>,
}

impl GroundStateReport {
    fn from_evolution(run: Evolution, physics: &Physics, candidates: Vec<CandidateSummary>) -> Self {
        let mut fft = Fft2::for_grid(&run.state.grid);
        let observables = ObservableBundle::measure(&run.state, &mut fft);
        Self {
            b_ext_mg: physics.b_ext_mg,
            energy_total: run.energy.total(),
            energy: run.energy,
            observables,
            converged: run.converged,
            iterations: run.iterations,
            chemical_potential: run.chemical_potential,
            residual: run.residual,
            state: run.state,
            candidates,
        }
    }
}

fn ansatz_sigma(physics: &Physics, params: &SolverParams) -> f64 {
    params.ansatz_sigma.unwrap_or_else(|| physics.harmonic_length())
}

/// Multi-start search: one run per restart sector plus, when
/// `noise_amplitude > 0`, a noise-perturbed ζ = 0 start. Returns the lowest
/// converged candidate.
pub fn find_ground_state(physics: &Physics, params: &SolverParams, n_atoms: f64) -> Result<GroundStateReport> {
    params.validate()?;
    let grid = *physics.grid();
    let sigma = ansatz_sigma(physics, params);
    let mut starts = Vec::new();
    for &z in &params.restart_sectors {
        starts.push((format!("zeta={z}"), Some(z), sector_ansatz(z, &grid, n_atoms, sigma)?));
    }
    if params.noise_amplitude > 0.0 {
        let mut s = sector_ansatz(0, &grid, n_atoms, sigma)?;
        perturb(&mut s, params.noise_amplitude, params.seed)?;
        starts.push((format!("noise(seed={})", params.seed), None, s));
    }
    let runs: Vec<(String, Result<Evolution>)> = {
        use rayon::prelude::*;
        starts.into_par_iter().map(|(label, z, s)| (label, evolve(s, physics, params, z))).collect()
    };
    let mut candidates = Vec::new();
    let mut best: Option<Evolution> = None;
    let mut failures = Vec::new();
    for (label, run) in runs {
        match run {
            Ok(ev) => {
                candidates.push(CandidateSummary {
                    label,
                    energy_total: ev.energy.total(),
                    converged: ev.converged,
                    iterations: ev.iterations,
                    residual: ev.residual,
                });
                if ev.converged && best.as_ref().is_none_or(|b| ev.energy.total() < b.energy.total()) {
                    best = Some(ev);
                }
            }
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    match best {
        Some(ev) => Ok(GroundStateReport::from_evolution(ev, physics, candidates)),
        None => {
            let mut diag: Vec<String> = candidates
                .iter()
                .map(|c| format!("{}: E = {:.10}, residual {:.3e} after {} steps", c.label, c.energy_total, c.residual, c.iterations))
                .collect();
            diag.extend(failures);
            Err(Error::NoConvergence(diag.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub b_mg: f64,
    pub e_zeta0: f64,
    pub e_zeta1: f64,
    pub ekin_zeta0: f64,
    pub ekin_zeta1: f64,
    pub winner_zeta: i32,
    /// Observables of the lower-energy branch.
    pub populations: [f64; 3],
    pub fz_mean: f64,
    pub lz: [f64; 3],
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionTable {
    pub rows: Vec<SweepRow>,
    /// Field where E_{ζ=0} − E_{ζ=1} changes sign, refined by bisection.
    pub crossing_mg: Option<f64>,
    /// Field where the kinetic energies of the two branches cross.
    pub kinetic_crossing_mg: Option<f64>,
    /// Every (B, E_{ζ=0} − E_{ζ=1}, Ekin_{ζ=0} − Ekin_{ζ=1}) evaluated,
    /// including bisection points, sorted by B.
    pub gap_samples: Vec<(f64, f64, f64)>,
}

impl TransitionTable {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

struct BranchPair {
    b: f64,
    zeta0: Evolution,
    zeta1: Evolution,
}

fn run_pair(physics: &Physics, params: &SolverParams, b: f64, s0: SpinorField, s1: SpinorField) -> Result<BranchPair> {
    let p = physics.with_field(b);
    let (r0, r1) = rayon::join(|| evolve(s0, &p, params, Some(0)), || evolve(s1, &p, params, Some(1)));
    Ok(BranchPair { b, zeta0: r0?, zeta1: r1? })
}

/// Follows the ζ = 0 and ζ = 1 branches across `fields_mg` (each point
/// starts from the previous converged state of the same branch) and
/// bisects the first sign change of E_{ζ=0} − E_{ζ=1} down to `tol_mg`.
pub fn transition_sweep(
    fields_mg: &[f64],
    physics: &Physics,
    params: &SolverParams,
    n_atoms: f64,
    tol_mg: f64,
) -> Result<TransitionTable> {
    params.validate()?;
    if fields_mg.is_empty() || fields_mg.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("sweep fields must be strictly increasing".into()));
    }
    let grid = *physics.grid();
    let sigma = ansatz_sigma(physics, params);
    let mut s0 = sector_ansatz(0, &grid, n_atoms, sigma)?;
    let mut s1 = sector_ansatz(1, &grid, n_atoms, sigma)?;
    let mut pairs: Vec<BranchPair> = Vec::with_capacity(fields_mg.len());
    let mut fft = Fft2::for_grid(&grid);
    let mut rows = Vec::new();
    for &b in fields_mg {
        let pair = run_pair(physics, params, b, s0, s1)?;
        let (e0, e1) = (pair.zeta0.energy.total(), pair.zeta1.energy.total());
        let (winner_zeta, w) = if e1 < e0 { (1, &pair.zeta1) } else { (0, &pair.zeta0) };
        let obs = ObservableBundle::measure(&w.state, &mut fft);
        rows.push(SweepRow {
            b_mg: b,
            e_zeta0: e0,
            e_zeta1: e1,
            ekin_zeta0: pair.zeta0.energy.kinetic,
            ekin_zeta1: pair.zeta1.energy.kinetic,
            winner_zeta,
            populations: obs.populations,
            fz_mean: obs.fz_mean,
            lz: obs.lz_per_component,
            converged: pair.zeta0.converged && pair.zeta1.converged,
        });
        s0 = pair.zeta0.state.clone();
        s1 = pair.zeta1.state.clone();
        pairs.push(pair);
    }

    let gap = |p: &BranchPair| p.zeta0.energy.total() - p.zeta1.energy.total();
    let kin_gap = |p: &BranchPair| p.zeta0.energy.kinetic - p.zeta1.energy.kinetic;
    let mut samples: Vec<(f64, f64, f64)> = pairs.iter().map(|p| (p.b, gap(p), kin_gap(p))).collect();

    let mut crossing_mg = None;
    if let Some(k) = pairs.windows(2).position(|w| gap(&w[0]).signum() != gap(&w[1]).signum()) {
        let (lo, hi) = (k, k + 1);
        let mut lo_pair = None::<BranchPair>;
        let mut hi_pair = None::<BranchPair>;
        let (mut b_lo, mut b_hi) = (pairs[lo].b, pairs[hi].b);
        let sign_lo = gap(&pairs[lo]).signum();
        while b_hi - b_lo > tol_mg {
            let mid = 0.5 * (b_lo + b_hi);
            let src = lo_pair.as_ref().unwrap_or(&pairs[lo]);
            let pair = run_pair(physics, params, mid, src.zeta0.state.clone(), src.zeta1.state.clone())?;
            samples.push((mid, gap(&pair), kin_gap(&pair)));
            if gap(&pair).signum() == sign_lo {
                b_lo = mid;
                lo_pair = Some(pair);
            } else {
                b_hi = mid;
                hi_pair = Some(pair);
            }
        }
        // linear interpolation of the gap inside the final bracket
        let g_lo = lo_pair.as_ref().map_or(gap(&pairs[lo]), gap);
        let g_hi = hi_pair.as_ref().map_or(gap(&pairs[hi]), gap);
        crossing_mg = Some(b_lo + (b_hi - b_lo) * g_lo / (g_lo - g_hi));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let kinetic_crossing_mg = kinetic_crossing(&samples, crossing_mg);
    Ok(TransitionTable { rows, crossing_mg, kinetic_crossing_mg, gap_samples: samples })
}

/// Sign change of the kinetic gap closest to `near` (or the first one),
/// linearly interpolated.
fn kinetic_crossing(samples: &[(f64, f64, f64)], near: Option<f64>) -> Option<f64> {
    let roots: Vec<f64> = samples
        .windows(2)
        .filter(|w| w[0].2.signum() != w[1].2.signum())
        .map(|w| w[0].0 + (w[1].0 - w[0].0) * w[0].2 / (w[0].2 - w[1].2))
        .collect();
    match near {
        Some(b) => roots.into_iter().min_by(|x, y| (x - b).abs().total_cmp(&(y - b).abs())),
        None => roots.first().copied(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{angular_momentum, winding_number, WINDING_LOOP_RADIUS, WINDING_THRESHOLD};

    const K_TRAP: f64 = 4000.0;

    fn trap(n: usize, bx: f64) -> Physics {
        let grid = GridSpec::new(0.6, n).unwrap();
        let maps = FieldMaps::from_fn(grid, |x, y| (K_TRAP * (x * x + y * y), bx * x, bx * y));
        Physics::new(maps, 0.0, 0.2, CouplingConstants::NONE)
    }

    fn gaussian(grid: GridSpec, weights: [f64; 3], n_atoms: f64) -> SpinorField {
        SpinorField::from_fn(grid, n_atoms, |x, y| {
            let g = (-(x * x + y * y) / (2.0 * 0.05f64.powi(2))).exp();
            weights.map(|w| Complex64::new(w * g, 0.0))
        })
        .unwrap()
    }

    #[test]
    fn step_preserves_norm() {
        let mut phys = trap(48, 30.0);
        phys.couplings = CouplingConstants { c0_2d: 0.01, c2_2d: -0.001 };
        let mut state = sector_ansatz(1, phys.grid(), 25.0, 0.05).unwrap();
        let mut stepper = ImaginaryTimeStepper::new(phys.grid(), 1e-3).unwrap();
        for _ in 0..20 {
            stepper.step(&mut state, &phys).unwrap();
            assert!((state.norm() - 25.0).abs() < 1e-12 * 25.0);
        }
    }

    #[test]
    fn energy_decreases_along_evolution() {
        let mut phys = trap(48, 30.0);
        phys.couplings = CouplingConstants { c0_2d: 0.01, c2_2d: -0.001 };
        phys.b_ext_mg = 10.0;
        let mut state = sector_ansatz(0, phys.grid(), 10.0, 0.08).unwrap();
        perturb(&mut state, 0.05, 3).unwrap();
        let mut stepper = ImaginaryTimeStepper::new(phys.grid(), 2e-4).unwrap();
        let mut fft = Fft2::for_grid(phys.grid());
        let mut last = energy_functional(&state, &phys, &mut fft).unwrap().total();
        for _ in 0..200 {
            stepper.step(&mut state, &phys).unwrap();
            let e = energy_functional(&state, &phys, &mut fft).unwrap().total();
            assert!(e <= last + 1e-10 * last.abs(), "{e} > {last}");
            last = e;
        }
    }

    #[test]
    fn harmonic_trap_ground_state() {
        let phys = trap(64, 0.0);
        let hw = 2.0 * (KINETIC_COEFF * K_TRAP).sqrt();
        let start = gaussian(*phys.grid(), [0.3, 1.0, 0.2], 1.0);
        let run = evolve(start, &phys, &SolverParams::default(), None).unwrap();
        assert!(run.converged);
        assert!((run.energy.total() - hw).abs() < 1e-8 * hw, "{} vs {hw}", run.energy.total());
        assert!((run.chemical_potential - hw).abs() < 1e-6 * hw);
        // the oscillator ground mode is a Gaussian of width (κ/k)^¼
        assert!((phys.harmonic_length() - (KINETIC_COEFF / K_TRAP).powf(0.25)).abs() < 1e-3);
    }

    #[test]
    fn ansatz_carries_its_sector() {
        let grid = GridSpec::new(0.6, 96).unwrap();
        let mut fft = Fft2::for_grid(&grid);
        for (zeta, want) in [(0, [-1, 0, 1]), (1, [0, 1, 2]), (-1, [-2, -1, 0])] {
            let s = sector_ansatz(zeta, &grid, 100.0, 0.05).unwrap();
            assert!((s.norm() - 100.0).abs() < 1e-10);
            let am = angular_momentum(&s, &mut fft);
            assert!((am.zeta_measured - zeta as f64).abs() < 1e-9, "{zeta}: {}", am.zeta_measured);
            for c in 0..3 {
                assert_eq!(winding_number(&grid, &s.psi[c], WINDING_LOOP_RADIUS, WINDING_THRESHOLD).unwrap(), want[c]);
            }
        }
        assert!(sector_ansatz(4, &grid, 1.0, 0.05).is_err());
    }

    #[test]
    fn sector_projection_keeps_and_removes() {
        let grid = GridSpec::new(0.8, 128).unwrap();
        let mut fft = Fft2::for_grid(&grid);
        let zero = sector_ansatz(0, &grid, 1.0, 0.05).unwrap();
        let one = sector_ansatz(1, &grid, 1.0, 0.05).unwrap();
        let mut kept = zero.clone();
        project_sector(&mut kept, 0, &mut fft);
        let mut killed = one.clone();
        project_sector(&mut killed, 0, &mut fft);
        let mut shifted = zero.clone();
        project_sector(&mut shifted, 3, &mut fft);
        let peak = zero.psi.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = 1e-9 * peak;
        for c in 0..3 {
            for idx in 0..grid.len() {
                assert!((kept.psi[c][idx] - zero.psi[c][idx]).norm() < tol);
                assert!((shifted.psi[c][idx] - zero.psi[c][idx]).norm() < tol);
                assert!(killed.psi[c][idx].norm() < tol);
            }
        }
    }

    #[test]
    fn stretched_state_zeeman_energy() {
        let mut phys = trap(32, 0.0);
        phys.b_ext_mg = 50.0;
        let state = gaussian(*phys.grid(), [1.0, 0.0, 0.0], 7.0);
        let e = energy_functional(&state, &phys, &mut Fft2::for_grid(phys.grid())).unwrap();
        assert!((e.zeeman + phys.zeeman() * 7.0).abs() < 1e-12 * phys.zeeman() * 7.0);
    }

    #[test]
    fn zero_component_gaussian_terms() {
        let mut phys = trap(48, 40.0);
        phys.couplings = CouplingConstants { c0_2d: 0.02, c2_2d: -0.003 };
        phys.b_ext_mg = 30.0;
        let state = gaussian(*phys.grid(), [0.0, 1.0, 0.0], 3.0);
        let e = energy_functional(&state, &phys, &mut Fft2::for_grid(phys.grid())).unwrap();
        assert!(e.fictitious.abs() < 1e-12);
        assert!(e.zeeman.abs() < 1e-12);
        assert!(e.interaction_c2.abs() < 1e-12);
        // analytic integrals for a normalised Gaussian of width s
        let s: f64 = 0.05;
        let n = 3.0;
        let kin = n * KINETIC_COEFF / (s * s);
        let pot = n * K_TRAP * s * s;
        let c0 = 0.02 * n * n / (4.0 * PI * s * s);
        assert!((e.kinetic - kin).abs() < 1e-8 * kin);
        assert!((e.scalar_potential - pot).abs() < 1e-6 * pot);
        assert!((e.interaction_c0 - c0).abs() < 1e-8 * c0);
        let sum = e.kinetic + e.scalar_potential + e.fictitious + e.zeeman + e.interaction_c0 + e.interaction_c2;
        assert!((e.total() - sum).abs() <= 1e-10 * sum.abs());
    }

    #[test]
    fn polarised_states_win_for_negative_c2() {
        let mut phys = trap(32, 0.0);
        phys.couplings = CouplingConstants { c0_2d: 0.0, c2_2d: -0.01 };
        let mut fft = Fft2::for_grid(phys.grid());
        let polar = energy_functional(&gaussian(*phys.grid(), [1.0, 0.0, 0.0], 5.0), &phys, &mut fft).unwrap();
        let zero = energy_functional(&gaussian(*phys.grid(), [0.0, 1.0, 0.0], 5.0), &phys, &mut fft).unwrap();
        assert!(polar.interaction_c2 < 0.0);
        assert!(polar.total() < zero.total());
    }

    #[test]
    fn preconditioned_steps_reach_stationary_state() {
        let phys = trap(48, 25.0);
        let start = sector_ansatz(0, phys.grid(), 1.0, 0.06).unwrap();
        let mut stepper = ImaginaryTimeStepper::new(phys.grid(), 1e-3).unwrap();
        let mut state = start;
        let alpha = local_energy_scale(&phys);
        let mut res = f64::INFINITY;
        for _ in 0..3000 {
            res = stepper.preconditioned_step(&mut state, &phys, alpha, 1.0).unwrap();
            if res < 1e-10 {
                break;
            }
        }
        assert!(res < 1e-10, "{res}");
    }

    #[test]
    fn rejects_mismatched_grids() {
        let phys = trap(32, 0.0);
        let other = sector_ansatz(0, &GridSpec::new(0.6, 16).unwrap(), 1.0, 0.05).unwrap();
        assert!(evolve(other, &phys, &SolverParams::default(), Some(0)).is_err());
        let bad = SolverParams { energy_stride: 7, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
