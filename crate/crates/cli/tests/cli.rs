use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn sdolp(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_sdolp"))
        .arg("--config")
        .arg(&cfg)
        .args(args)
        .env_remove("SDOLP_OUT_DIR")
        .env_remove("SDOLP_THREADS")
        .output()
        .unwrap()
}

fn header_value(text: &str, key: &str) -> String {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_string()))
        .unwrap_or_else(|| panic!("no {key} in header"))
}

fn out_config(dir: &Path, extra: &str) -> String {
    format!("out_dir = {:?}\n{extra}", dir.join("out").display().to_string())
}

#[test]
fn potential_writes_maps_with_provenance_header() {
    let tmp = TempDir::new().unwrap();
    let cfg = out_config(tmp.path(), "[grid]\nside = 1.0\nn = 32\n");
    let out = sdolp(tmp.path(), &cfg, &["potential"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let maps = fs::read_to_string(tmp.path().join("out/field_maps.dat")).unwrap();
    let hash = header_value(&maps, "config_sha256");
    assert_eq!(hash.len(), 64);
    let profiles = fs::read_to_string(tmp.path().join("out/radial_profiles.csv")).unwrap();
    assert_eq!(header_value(&profiles, "config_sha256"), hash);
    let b_max: f64 = header_value(&profiles, "B_fic_max_mG").parse().unwrap();
    assert!((b_max - 267.5).abs() < 1.0, "{b_max}");
    assert!(profiles.lines().any(|l| l == "r,V,B"));

    // any change to the configuration changes the hash
    let cfg = out_config(tmp.path(), "[grid]\nside = 1.0\nn = 64\n");
    assert!(sdolp(tmp.path(), &cfg, &["potential"]).status.success());
    let maps = fs::read_to_string(tmp.path().join("out/field_maps.dat")).unwrap();
    assert_ne!(header_value(&maps, "config_sha256"), hash);
}

#[test]
fn polarizability_ratio_reported() {
    let tmp = TempDir::new().unwrap();
    let out = sdolp(tmp.path(), &out_config(tmp.path(), ""), &["polarizability"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let ratio: f64 = stdout.split(':').nth(1).unwrap().trim().parse().unwrap();
    assert!((ratio - 1.82637).abs() < 1e-3, "{ratio}");
    let csv = fs::read_to_string(tmp.path().join("out/polarizability.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 502);
}

fn crossing(tmp: &Path, intensity: f64) -> f64 {
    let cfg = out_config(tmp, &format!("[laser]\nintensity_w_cm2 = {intensity}\n[fields]\nstart = 0.0\nstop = 150.0\nstep = 50.0\n"));
    let out = sdolp(tmp, &cfg, &["single-atom"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let levels = fs::read_to_string(tmp.join("out/levels.csv")).unwrap();
    assert!(levels.lines().any(|l| l == "B_ext_mG,zeta,n,energy_recoil"));
    header_value(&levels, "ground_crossing_mG").parse().unwrap()
}

#[test]
fn single_atom_crossing_scales_with_intensity() {
    let tmp = TempDir::new().unwrap();
    let b70 = crossing(tmp.path(), 70.0);
    assert!((b70 - 73.0).abs() < 10.0, "{b70}");
    let b35 = crossing(tmp.path(), 35.0);
    let ratio = b70 / b35;
    assert!((ratio - 2.0).abs() < 0.15, "{b35} {b70}");
}

#[test]
fn environment_and_flags_override_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, out_config(tmp.path(), "")).unwrap();
    let env_dir = tmp.path().join("from_env");
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_sdolp"))
            .arg("--config")
            .arg(&cfg)
            .args(extra)
            .env("SDOLP_OUT_DIR", &env_dir)
            .env("SDOLP_THREADS", "1")
            .output()
            .unwrap()
    };
    let out = run(&["--print-config", "polarizability"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("from_env"), "{text}");
    assert!(text.contains("threads = 1"));

    assert!(run(&["polarizability"]).status.success());
    assert!(env_dir.join("polarizability.csv").exists());
    let flag_dir = tmp.path().join("from_flag");
    assert!(run(&["--out", flag_dir.to_str().unwrap(), "polarizability"]).status.success());
    assert!(flag_dir.join("polarizability.csv").exists());
}

#[test]
fn bad_configuration_exits_with_error() {
    let tmp = TempDir::new().unwrap();
    let out = sdolp(tmp.path(), "n_atom = 3.0\n", &["potential"]);
    assert_eq!(out.status.code(), Some(1));
    let out = sdolp(tmp.path(), &out_config(tmp.path(), "[grid]\nn = 101\n"), &["potential"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ground_state_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = out_config(tmp.path(), "n_atoms = 1.0\n[grid]\nside = 1.0\nn = 64\n[fields]\nvalues = [40.0]\n");
    let out = sdolp(tmp.path(), &cfg, &["ground"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(tmp.path().join("out/report_B40mG.txt")).unwrap();
    assert!(report.contains("converged true"));
    assert!(report.contains("windings"));
    assert!(tmp.path().join("out/state_B40mG.dat").exists());
    assert!(tmp.path().join("out/texture_B40mG.dat").exists());
}

#[test]
fn unconverged_solve_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = out_config(
        tmp.path(),
        "n_atoms = 1.0\n[grid]\nside = 1.0\nn = 32\n[fields]\nvalues = [40.0]\n[solver]\nmax_iters = 20\npolish_iters = 0\n",
    );
    let out = sdolp(tmp.path(), &cfg, &["ground"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("out/diagnostics_B40mG.txt").exists());
}
