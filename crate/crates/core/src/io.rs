//! Plain-text output formats. Every file starts with `# `-prefixed header
//! lines supplied by the caller, followed by the records.

use std::io::{BufRead, Write};

use crate::gpe::{EnergyDecomposition, SpinorField, TransitionTable};
use crate::grid::GridSpec;
use crate::lattice::FieldMaps;
use crate::observables::TexturePoint;
use crate::radial::LevelRow;
use crate::{Error, Result};

pub const LEVEL_CSV_HEADER: &str = "B_ext_mG,zeta,n,energy_recoil";
pub const INTENSITY_CSV_HEADER: &str = "intensity_W_cm2,B_ext_mG,gap_recoil";
pub const SWEEP_CSV_HEADER: &str =
    "B_mG,E_zeta0,E_zeta1,Ekin_zeta0,Ekin_zeta1,winner_zeta,N_p1,N_0,N_m1,Fz_mean,lz_p1,lz_0,lz_m1";
pub const RADIAL_PROFILE_HEADER: &str = "r,V,B";
pub const POLARIZABILITY_HEADER: &str = "omega_rad_s,alpha0_si,alpha1_si,ratio";

pub fn write_header<W: Write>(w: &mut W, lines: &[String]) -> Result<()> {
    for l in lines {
        writeln!(w, "# {l}")?;
    }
    Ok(())
}

/// Row-major "x y V Bx By" records after the header.
pub fn write_field_dump<W: Write>(w: &mut W, maps: &FieldMaps, header: &[String]) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "# grid_n {} side {}", maps.grid.n, maps.grid.side)?;
    writeln!(w, "# x y V Bx By")?;
    for idx in 0..maps.grid.len() {
        let (x, y) = maps.grid.position(idx);
        writeln!(w, "{x:.10e} {y:.10e} {:.12e} {:.12e} {:.12e}", maps.v[idx], maps.bx[idx], maps.by[idx])?;
    }
    Ok(())
}

fn parse_err(line: usize, what: &str) -> Error {
    Error::Parse(format!("line {line}: {what}"))
}

/// Reads a file written by [`write_field_dump`].
pub fn read_field_dump<R: BufRead>(r: R) -> Result<FieldMaps> {
    let mut grid = None;
    let (mut v, mut bx, mut by) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if let Some(rest) = line.strip_prefix("# grid_n ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 || parts[1] != "side" {
                return Err(parse_err(k + 1, "malformed grid line"));
            }
            let n = parts[0].parse().map_err(|_| parse_err(k + 1, "bad grid size"))?;
            let side = parts[2].parse().map_err(|_| parse_err(k + 1, "bad grid side"))?;
            grid = Some(GridSpec::new(side, n)?);
            continue;
        }
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(k + 1, "non-numeric field"))?;
        if vals.len() != 5 {
            return Err(parse_err(k + 1, "expected 5 columns"));
        }
        v.push(vals[2]);
        bx.push(vals[3]);
        by.push(vals[4]);
    }
    let grid = grid.ok_or_else(|| Error::Parse("missing grid line".into()))?;
    if v.len() != grid.len() {
        return Err(Error::Parse(format!("expected {} records, found {}", grid.len(), v.len())));
    }
    Ok(FieldMaps { grid, v, bx, by })
}

pub fn write_radial_profiles<W: Write>(w: &mut W, rows: &[(f64, f64, f64)], header: &[String]) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "{RADIAL_PROFILE_HEADER}")?;
    for (r, v, b) in rows {
        writeln!(w, "{r:.8e},{v:.12e},{b:.12e}")?;
    }
    Ok(())
}

pub fn write_energy_header<W: Write>(w: &mut W, e: &EnergyDecomposition) -> Result<()> {
    writeln!(w, "# energy_total {:.14e}", e.total())?;
    writeln!(w, "# energy_kinetic {:.14e}", e.kinetic)?;
    writeln!(w, "# energy_scalar_potential {:.14e}", e.scalar_potential)?;
    writeln!(w, "# energy_fictitious {:.14e}", e.fictitious)?;
    writeln!(w, "# energy_zeeman {:.14e}", e.zeeman)?;
    writeln!(w, "# energy_interaction_c0 {:.14e}", e.interaction_c0)?;
    writeln!(w, "# energy_interaction_c2 {:.14e}", e.interaction_c2)?;
    Ok(())
}

/// "x y Re ψ₊₁ Im ψ₊₁ Re ψ₀ Im ψ₀ Re ψ₋₁ Im ψ₋₁" records.
pub fn write_state_dump<W: Write>(
    w: &mut W,
    state: &SpinorField,
    b_ext_mg: f64,
    energy: &EnergyDecomposition,
    header: &[String],
) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "# grid_n {} side {}", state.grid.n, state.grid.side)?;
    writeln!(w, "# B_ext_mG {b_ext_mg}")?;
    writeln!(w, "# n_atoms {}", state.n_atoms)?;
    write_energy_header(w, energy)?;
    writeln!(w, "# x y re_p1 im_p1 re_0 im_0 re_m1 im_m1")?;
    for idx in 0..state.grid.len() {
        let (x, y) = state.grid.position(idx);
        let s = state.spinor(idx);
        writeln!(
            w,
            "{x:.10e} {y:.10e} {:.12e} {:.12e} {:.12e} {:.12e} {:.12e} {:.12e}",
            s[0].re, s[0].im, s[1].re, s[1].im, s[2].re, s[2].im
        )?;
    }
    Ok(())
}

pub fn write_texture<W: Write>(w: &mut W, texture: &[TexturePoint], header: &[String]) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "# x y Fx Fy Fz density")?;
    for p in texture {
        writeln!(w, "{:.10e} {:.10e} {:.10e} {:.10e} {:.10e} {:.10e}", p.x, p.y, p.f[0], p.f[1], p.f[2], p.density)?;
    }
    Ok(())
}

pub fn write_level_csv<W: Write>(w: &mut W, rows: &[LevelRow], header: &[String]) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "{LEVEL_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{:.12e}", r.b_ext_mg, r.zeta, r.n, r.energy)?;
    }
    Ok(())
}

pub fn write_intensity_csv<W: Write>(w: &mut W, b_ext_mg: f64, rows: &[(f64, f64)], header: &[String]) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "{INTENSITY_CSV_HEADER}")?;
    for (i, gap) in rows {
        writeln!(w, "{i},{b_ext_mg},{gap:.12e}")?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(w: &mut W, table: &TransitionTable, header: &[String]) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
            r.b_mg,
            r.e_zeta0,
            r.e_zeta1,
            r.ekin_zeta0,
            r.ekin_zeta1,
            r.winner_zeta,
            r.populations[0],
            r.populations[1],
            r.populations[2],
            r.fz_mean,
            r.lz[0],
            r.lz[1],
            r.lz[2]
        )?;
    }
    Ok(())
}
