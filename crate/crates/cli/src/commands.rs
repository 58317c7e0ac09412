use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::{info, warn};
use sdolp::gpe::{find_ground_state, transition_sweep, CandidateSummary};
use sdolp::io;
use sdolp::polarizability::{polarizability_ratio, scan};
use sdolp::radial::{crossing_intensity_scan, ground_crossing, level_diagram};
use sdolp::units::{angular_frequency, contact_couplings, zeeman_energy_per_mg};
use sdolp::{BeamConfig, GroundStateReport, LatticeField, Physics, RadialProfiles, UnitSystem};

use crate::config::RunConfig;

/// Resolved configuration plus the derived quantities every command needs.
pub struct Session {
    pub config: RunConfig,
    pub hash: String,
    pub units: UnitSystem,
    pub zeeman_per_mg: f64,
}

impl Session {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let hash = config.hash()?;
        let units = UnitSystem::new(config.lambda_l(), config.atom.mass)?;
        let zeeman_per_mg = zeeman_energy_per_mg(&config.atom, &units);
        std::fs::create_dir_all(&config.out_dir)
            .with_context(|| format!("creating output directory {}", config.out_dir.display()))?;
        Ok(Self { config, hash, units, zeeman_per_mg })
    }

    fn header(&self, what: &str) -> Vec<String> {
        let c = &self.config;
        vec![
            format!("sdolp {} {what}", env!("CARGO_PKG_VERSION")),
            format!("config_sha256 {}", self.hash),
            format!("intensity_W_cm2 {}", c.laser.intensity_w_cm2),
            format!("lambda_l_nm {}", c.laser.wavelength_nm),
            "units length=lambda_l energy=E_rec field=mG".to_string(),
        ]
    }

    fn create(&self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.config.out_dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok((path, BufWriter::new(f)))
    }

    fn field_at(&self, intensity: f64) -> sdolp::Result<LatticeField> {
        LatticeField::new(BeamConfig::new(intensity, self.config.lambda_l())?, &self.config.atom)
    }

    fn lattice(&self) -> Result<LatticeField> {
        Ok(self.field_at(self.config.laser.intensity_w_cm2)?)
    }

    fn physics(&self, field: &LatticeField) -> Result<Physics> {
        let maps = field.render(&self.config.grid_spec()?)?;
        let couplings = contact_couplings(&self.config.atom, &self.units);
        Ok(Physics::new(maps, 0.0, self.zeeman_per_mg, couplings))
    }

    /// max_r B(r) converted to mG.
    fn max_field_mg(&self, field: &LatticeField) -> f64 {
        field.fictitious_field_maximum().1 / self.zeeman_per_mg
    }
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

pub fn potential(s: &Session) -> Result<bool> {
    let field = s.lattice()?;
    let maps = field.render(&s.config.grid_spec()?)?;
    let (path, mut w) = s.create("field_maps.dat")?;
    io::write_field_dump(&mut w, &maps, &s.header("potential"))?;
    finish(&path, w)?;

    let grid = s.config.radial_grid()?;
    let rows: Vec<(f64, f64, f64)> = grid
        .radii()
        .into_iter()
        .map(|r| {
            let (v, b) = field.isotropic_profiles(r);
            (r, v, b)
        })
        .collect();
    let (path, mut w) = s.create("radial_profiles.csv")?;
    let (r_peak, b_peak) = field.fictitious_field_maximum();
    let mut header = s.header("potential");
    header.push(format!("B_fic_max_recoil {b_peak:.10e} at r {r_peak:.6}"));
    header.push(format!("B_fic_max_mG {:.6}", s.max_field_mg(&field)));
    io::write_radial_profiles(&mut w, &rows, &header)?;
    finish(&path, w)?;
    Ok(true)
}

pub fn polarizability(s: &Session) -> Result<bool> {
    let c = &s.config;
    let omega_l = angular_frequency(c.lambda_l());
    let ratio = polarizability_ratio(omega_l, &c.atom)?;
    println!("alpha1/alpha0 at {} nm: {ratio:.6}", c.laser.wavelength_nm);
    // ω decreases with λ, so the high wavelength is the low frequency
    let lo = angular_frequency(c.polarizability.wavelength_hi_nm * 1e-9);
    let hi = angular_frequency(c.polarizability.wavelength_lo_nm * 1e-9);
    let rows = scan(lo, hi, c.polarizability.points, &c.atom);
    let (path, mut w) = s.create("polarizability.csv")?;
    let mut header = s.header("polarizability");
    header.push(format!("ratio_at_lambda_l {ratio:.10}"));
    io::write_header(&mut w, &header)?;
    writeln!(w, "{}", io::POLARIZABILITY_HEADER)?;
    for p in rows {
        let r = p.ratio().map_or(f64::NAN, |v| v);
        writeln!(w, "{:.10e},{:.10e},{:.10e},{:.10e}", p.omega, p.alpha0, p.alpha1, r)?;
    }
    finish(&path, w)?;
    Ok(true)
}

pub fn single_atom(s: &Session) -> Result<bool> {
    let c = &s.config;
    let field = s.lattice()?;
    let grid = s.config.radial_grid()?;
    let profiles = RadialProfiles::from_lattice(&field, &grid, s.zeeman_per_mg);
    let fields = c.fields.resolve()?;
    let rows = level_diagram(&profiles, &grid, &c.radial.zetas, &fields, c.radial.n_levels)?;
    let mut header = s.header("single-atom");
    let (lo, hi) = (fields[0], fields[fields.len() - 1]);
    match ground_crossing(&profiles, &grid, lo, hi, 0.01) {
        Ok(b) => {
            println!("ground-level crossing zeta 0 -> 1 at {b:.3} mG");
            header.push(format!("ground_crossing_mG {b:.6}"));
        }
        Err(e) => {
            println!("no ground-level crossing: {e}");
            header.push("ground_crossing_mG none".into());
        }
    }
    let (path, mut w) = s.create("levels.csv")?;
    io::write_level_csv(&mut w, &rows, &header)?;
    finish(&path, w)?;

    if !c.radial.intensities.is_empty() {
        let b = c.radial.intensity_scan_b_mg;
        let table = crossing_intensity_scan(|i| s.field_at(i), &grid, s.zeeman_per_mg, b, &c.radial.intensities)?;
        let (path, mut w) = s.create("crossing_intensity.csv")?;
        io::write_intensity_csv(&mut w, b, &table, &s.header("single-atom intensity scan"))?;
        finish(&path, w)?;
    }
    Ok(true)
}

fn format_candidates(c: &[CandidateSummary]) -> Vec<String> {
    c.iter()
        .map(|c| {
            format!(
                "candidate {} E {:.12e} converged {} iterations {} residual {:.3e}",
                c.label, c.energy_total, c.converged, c.iterations, c.residual
            )
        })
        .collect()
}

fn write_report(s: &Session, tag: &str, r: &GroundStateReport) -> Result<()> {
    let (path, mut w) = s.create(&format!("report_{tag}.txt"))?;
    io::write_header(&mut w, &s.header("ground"))?;
    let o = &r.observables;
    writeln!(w, "B_ext_mG {}", r.b_ext_mg)?;
    writeln!(w, "n_atoms {}", r.state.n_atoms)?;
    writeln!(w, "converged {}", r.converged)?;
    writeln!(w, "iterations {}", r.iterations)?;
    writeln!(w, "residual {:.6e}", r.residual)?;
    writeln!(w, "chemical_potential {:.14e}", r.chemical_potential)?;
    writeln!(w, "energy_total {:.14e}", r.energy_total)?;
    writeln!(w, "energy_kinetic {:.14e}", r.energy.kinetic)?;
    writeln!(w, "energy_scalar_potential {:.14e}", r.energy.scalar_potential)?;
    writeln!(w, "energy_fictitious {:.14e}", r.energy.fictitious)?;
    writeln!(w, "energy_zeeman {:.14e}", r.energy.zeeman)?;
    writeln!(w, "energy_interaction_c0 {:.14e}", r.energy.interaction_c0)?;
    writeln!(w, "energy_interaction_c2 {:.14e}", r.energy.interaction_c2)?;
    writeln!(w, "populations {:.10e} {:.10e} {:.10e}", o.populations[0], o.populations[1], o.populations[2])?;
    writeln!(w, "fz_mean {:.10e}", o.fz_mean)?;
    writeln!(w, "lz {:.10e} {:.10e} {:.10e}", o.lz_per_component[0], o.lz_per_component[1], o.lz_per_component[2])?;
    writeln!(w, "abs_lz_mean {:.10e}", o.abs_lz_mean)?;
    let wind: Vec<String> = o.windings.iter().map(|x| x.map_or("undefined".into(), |v| v.to_string())).collect();
    writeln!(w, "windings {}", wind.join(" "))?;
    writeln!(w, "zeta_measured {:.10e}", o.zeta_measured)?;
    writeln!(w, "boundary_density_ratio {:.3e}", r.state.boundary_density_ratio())?;
    for line in format_candidates(&r.candidates) {
        writeln!(w, "{line}")?;
    }
    finish(&path, w)
}

fn write_failure(s: &Session, name: &str, what: &str, err: &dyn std::fmt::Display) -> Result<()> {
    let (path, mut w) = s.create(name)?;
    io::write_header(&mut w, &s.header(what))?;
    writeln!(w, "error {err}")?;
    finish(&path, w)
}

fn field_tag(b: f64) -> String {
    format!("B{b}mG")
}

pub fn ground(s: &Session) -> Result<bool> {
    let c = &s.config;
    let field = s.lattice()?;
    let base = s.physics(&field)?;
    let mut all = true;
    for b in c.fields.resolve()? {
        let tag = field_tag(b);
        let physics = base.with_field(b);
        match find_ground_state(&physics, &c.solver, c.n_atoms) {
            Ok(r) => {
                let o = &r.observables;
                println!(
                    "B {b} mG: E {:.10} zeta {:.6} windings {:?} populations {:.4?}{}",
                    r.energy_total,
                    o.zeta_measured,
                    o.windings,
                    o.populations,
                    if r.converged { "" } else { " (not converged)" }
                );
                all &= r.converged;
                if r.state.boundary_density_ratio() > 1e-8 {
                    warn!("density at the box edge is {:.2e} of the peak; enlarge the grid", r.state.boundary_density_ratio());
                }
                let header = s.header("ground");
                let (path, mut w) = s.create(&format!("state_{tag}.dat"))?;
                io::write_state_dump(&mut w, &r.state, b, &r.energy, &header)?;
                finish(&path, w)?;
                let (path, mut w) = s.create(&format!("texture_{tag}.dat"))?;
                io::write_texture(&mut w, &o.spin_texture, &header)?;
                finish(&path, w)?;
                write_report(s, &tag, &r)?;
            }
            Err(e) => {
                all = false;
                eprintln!("B {b} mG: {e}");
                write_failure(s, &format!("diagnostics_{tag}.txt"), "ground", &e)?;
            }
        }
    }
    Ok(all)
}

pub fn sweep(s: &Session) -> Result<bool> {
    let c = &s.config;
    let field = s.lattice()?;
    let physics = s.physics(&field)?;
    let fields = c.fields.resolve()?;
    let table = match transition_sweep(&fields, &physics, &c.solver, c.n_atoms, c.sweep.tol_mg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("sweep failed: {e}");
            write_failure(s, "diagnostics_sweep.txt", "sweep", &e)?;
            return Ok(false);
        }
    };
    let b_max = s.max_field_mg(&field);
    let (path, mut w) = s.create("sweep.csv")?;
    io::write_sweep_csv(&mut w, &table, &s.header("sweep"))?;
    let summary = match table.crossing_mg {
        Some(b) => format!("B_star_mG {b:.4} kinetic_crossing_mG {} B_fic_max_mG {b_max:.4} ratio {:.4}",
            table.kinetic_crossing_mg.map_or("none".into(), |k| format!("{k:.4}")), b / b_max),
        None => format!("B_star_mG none (no transition in range) B_fic_max_mG {b_max:.4}"),
    };
    writeln!(w, "# {summary}")?;
    finish(&path, w)?;
    println!("{summary}");
    Ok(table.all_converged())
}
