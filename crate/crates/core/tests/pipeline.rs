use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use levlw::config::RunConfig;
use levlw::pipeline::{cmd_analyze, cmd_bounds, cmd_simulate, cmd_sweep, exit_code, sha256_file, EXIT_IO, EXIT_NUMERICAL};
use levlw::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tempfile::TempDir;

fn cfg(text: &str) -> RunConfig {
    RunConfig::from_toml_str(text).unwrap()
}

fn levlw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levlw"))
}

/// Data files of a run directory keyed by name, manifest excluded.
fn data_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.txt")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

const THERMAL: &str = r#"
seed = 4
[particle]
mass_kg = 9.6e-17
[sim]
engine = "secular"
duration_s = 20.0
output_rate_hz = 2000.0
frequencies_hz = [327.0]
gamma_hz = 1.0
"#;

#[test]
fn same_config_and_seed_reproduce_every_data_file() {
    let c = cfg(THERMAL);
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    cmd_simulate(&c, a.path()).unwrap();
    cmd_simulate(&c, b.path()).unwrap();
    let (fa, fb) = (data_files(a.path()), data_files(b.path()));
    assert!(fa.keys().any(|k| k.ends_with(".levt")) && fa.keys().any(|k| k.ends_with(".csv")));
    assert_eq!(fa, fb);

    let other = TempDir::new().unwrap();
    let mut c2 = c.clone();
    c2.seed = 5;
    cmd_simulate(&c2, other.path()).unwrap();
    assert_ne!(data_files(other.path())["sim_x.levt"], fa["sim_x.levt"]);
}

#[test]
fn manifest_lists_every_output_with_its_checksum() {
    let c = cfg(THERMAL);
    let dir = TempDir::new().unwrap();
    let m = cmd_simulate(&c, dir.path()).unwrap();
    let files = data_files(dir.path());
    assert_eq!(m.outputs.len(), files.len());
    for e in &m.outputs {
        let path = PathBuf::from(&e.path);
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        assert!(files.contains_key(&name), "{name} not on disk");
        assert_eq!(sha256_file(&dir.path().join(&name)).unwrap(), e.sha256);
    }
    let text = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    for e in &m.outputs {
        assert!(text.contains(&e.sha256));
    }
}

fn closure_config(seed: u64, gamma_hz: f64, drift: &str) -> RunConfig {
    cfg(&format!(
        r#"
seed = {seed}
[particle]
mass_kg = 9.6e-17
[sim]
engine = "quadrature"
duration_s = 1e5
output_rate_hz = 2.0
frequencies_hz = [327.0]
gamma_hz = {gamma_hz}
format = "levt"
{drift}
"#
    ))
}

/// Nine (γ, drift) combinations through simulate and analyze. γ comes from
/// the R² fit and T from the quadrature variance; both are drift-immune and
/// must land within 3σ. ω_o comes from the zoomed displacement fit: within
/// 3σ of the shifted line for a static offset, and within a tenth of the
/// excursion of the time-averaged frequency under sinusoidal drift, where
/// the line is no longer Lorentzian.
#[test]
fn simulate_then_analyze_recovers_the_injected_parameters() {
    let drifts = [
        ("none", "", 0.0, None),
        ("offset", "[sim.drift]\nshape = \"none\"\noffset_hz = 0.01", 0.01, None),
        (
            "sinusoidal",
            "[sim.drift]\nshape = \"sinusoidal\"\namplitude_hz = 0.5\nperiod_s = 3600.0",
            0.0,
            Some(0.5),
        ),
    ];
    let mut seed = 100;
    for gamma_hz in [5e-3, 10e-3, 20e-3] {
        for (label, drift, offset, excursion) in drifts {
            seed += 1;
            let c = closure_config(seed, gamma_hz, drift);
            let dir = TempDir::new().unwrap();
            cmd_simulate(&c, dir.path()).unwrap();
            let a = cmd_analyze(&c, &[dir.path().join("sim_x_quad.levt")], &dir.path().join("analysis")).unwrap();
            let r = &a.records[0];
            let case = format!("gamma {gamma_hz} Hz, {label}");

            let f = &r.r2_fit;
            assert!(
                (f.gamma_hz - gamma_hz).abs() < 3.0 * f.gamma_err_hz,
                "{case}: gamma {} +/- {}",
                f.gamma_hz,
                f.gamma_err_hz
            );
            let t = r.temperature.unwrap();
            assert!(
                (t.temperature - 293.0).abs() < 3.0 * t.stderr,
                "{case}: T {} +/- {}",
                t.temperature,
                t.stderr
            );

            let d = r.displacement_fit.as_ref().unwrap();
            let f0 = d.omega0 / TAU;
            let expected = 327.0 + offset;
            match excursion {
                None => {
                    let err = d.errors[0] / TAU;
                    assert!((f0 - expected).abs() < 3.0 * err, "{case}: f0 {f0} +/- {err}");
                }
                Some(a) => assert!((f0 - expected).abs() < 0.1 * a, "{case}: f0 {f0}"),
            }
        }
    }
}

#[test]
fn corrupt_magic_is_an_io_error_with_offset() {
    let dir = TempDir::new().unwrap();
    let c = cfg(THERMAL);
    cmd_simulate(&c, dir.path()).unwrap();
    let path = dir.path().join("sim_x.levt");
    let mut bytes = fs::read(&path).unwrap();
    bytes[0] = b'X';
    fs::write(&path, bytes).unwrap();
    let mut c = c.clone();
    c.lockin = cfg("[lockin]\ncutoff_hz = 20.0").lockin;
    match cmd_analyze(&c, &[path.clone()], &dir.path().join("a")) {
        Err(e @ Error::Format { offset: 0, .. }) => assert_eq!(exit_code(&e), EXIT_IO),
        other => panic!("expected a format error at offset 0, got {other:?}"),
    }
}

#[test]
fn untrapped_axis_exits_with_numerical_failure_naming_the_axis() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("untrapped.toml");
    fs::write(
        &config,
        r#"
[particle]
mass_kg = 9.6e-17
charge_count = 500
[trap]
r_o_m = 1.1e-3
z_o_m = 3.5e-3
eta_ac = 0.3
kappa_dc = 0.08
u_dc_v = 200.0
v_ac_v = 1.0
drive_freq_hz = 3000.0
[sim]
engine = "secular"
duration_s = 1.0
output_rate_hz = 1000.0
axes = ["x", "y", "z"]
"#,
    )
    .unwrap();
    let out = levlw()
        .arg("simulate")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_NUMERICAL));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("axis x is not trapped"), "{err}");
}

#[test]
fn pure_noise_record_is_flagged_but_exits_cleanly() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let normal: Normal<f64> = Normal::new(0.0, 1e-9).unwrap();
    let mut s = String::from("t,x\n");
    for i in 0..20_000 {
        s.push_str(&format!("{},{}\n", i as f64 / 1000.0, normal.sample(&mut rng)));
    }
    let record = dir.path().join("noise.csv");
    fs::write(&record, s).unwrap();
    let config = dir.path().join("noise.toml");
    fs::write(
        &config,
        "[particle]\nmass_kg = 9.6e-17\n[lockin]\nf_lo_hz = 327.0\ncutoff_hz = 20.0\ndecimation = 10\n[fit]\ngamma_guess_hz = 1.0\n",
    )
    .unwrap();
    let out = levlw()
        .arg("analyze")
        .arg(&record)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{err}");
    assert!(err.contains("unreliable"), "{err}");
}

#[test]
fn noiseless_sweep_on_an_exact_line_is_recovered_exactly() {
    let dir = TempDir::new().unwrap();
    let points = dir.path().join("points.csv");
    let (excess, slope) = (3e-6, 285.0);
    let mut s = String::from("pressure_mbar,gamma_hz,sigma_hz\n");
    for p in [3e-7, 1e-6, 3e-6, 1e-5, 3e-5, 1e-4] {
        s.push_str(&format!("{p},{},{}\n", excess + slope * p, 1e-5 * (p / 3e-7f64).powf(0.7)));
    }
    fs::write(&points, s).unwrap();
    let c = cfg(&format!("[sweep]\nmode = \"file\"\npoints_csv = {:?}\n", points.to_str().unwrap()));
    let o = cmd_sweep(&c, &dir.path().join("o")).unwrap();
    assert!((o.fit.intercept - excess).abs() < 1e-12, "{}", o.fit.intercept);
    assert!((o.fit.slope / slope - 1.0).abs() < 1e-9, "{}", o.fit.slope);
    assert!(o.fit.chi2 < 1e-12);
}

#[test]
fn zero_bound_excludes_both_full_grids() {
    let c = cfg("[bounds]\ngamma_cm_upper_hz = 0.0\ngrid_points = 50\n");
    let o = cmd_bounds(&c, TempDir::new().unwrap().path()).unwrap();
    assert_eq!(o.dcsl.excluded_count(), o.dcsl.cell_count());
    assert_eq!(o.ddp.excluded_count(), o.ddp.cell_count());
}

#[test]
fn bigger_particle_with_tighter_bound_excludes_more() {
    let now = cmd_bounds(&cfg("[bounds]\ngrid_points = 60\n"), TempDir::new().unwrap().path()).unwrap();
    let next = cmd_bounds(
        &cfg("[particle]\nradius_m = 10e-6\n[bounds]\ngrid_points = 60\ngamma_cm_upper_hz = 4.8e-6\n"),
        TempDir::new().unwrap().path(),
    )
    .unwrap();
    assert!(now.dcsl.is_subset_of(&next.dcsl));
    assert!(now.ddp.is_subset_of(&next.ddp));
    assert!(next.dcsl.excluded_count() > now.dcsl.excluded_count());
}

#[test]
fn thread_override_is_validated() {
    let dir = TempDir::new().unwrap();
    let run = |threads: &str| {
        levlw()
            .env("LEVLW_THREADS", threads)
            .args(["bounds", "--out"])
            .arg(dir.path())
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("2"), Some(0));
    assert_eq!(run("zero"), Some(levlw::pipeline::EXIT_CONFIG));
}
