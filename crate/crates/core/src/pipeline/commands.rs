use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manifest::{Manifest, Outputs, Timer};
use crate::collapse::{exclusion_map, exclusion_scan, ExclusionGrid, GridAxis, GridModel, Interval, Variant};
use crate::config::RunConfig;
use crate::demod::{amplitude, lockin, rayleigh_stats, LockinConfig, RayleighStats};
use crate::error::{Error, Result};
use crate::io::{
    read_levt, read_timeseries_csv, write_levt, write_levt_quadrature, write_quadrature_csv, write_timeseries_csv, LevtRecord,
};
use crate::series::QuadratureSeries;
use crate::simulate::{rng::stream_id, simulate_mathieu, simulate_quadrature, simulate_secular, AxisPlan, Engine, SimPlan};
use crate::specfit::{
    bootstrap_intercept, effective_samples, fit_displacement_psd, fit_r2_record, inverse_variance_mean, linewidth_vs_pressure,
    temperature_from_quadratures, zoom_psd, BootstrapSummary, DisplacementFit, DisplacementGuess, FitWindow, LineFit, LorentzFit,
    PressurePoint, R2Guess, TemperatureEstimate,
};
use crate::trapphys::{gas_damping, mathieu_params, secular_frequencies, thermal_force_psd, voltage_noise_force_psd, GasEnvironment};

/// Welch segment length that puts a line of half-width `gamma_hz` across
/// roughly 15 bins: the power of two nearest 15·fs/γ, limited to between
/// 16 samples and a quarter of the record.
pub fn auto_segment(sample_rate: f64, gamma_hz: f64, n: usize) -> Result<usize> {
    if n < 64 {
        return Err(Error::RecordTooShort { len: n, segment: 64 });
    }
    let target = 15.0 * sample_rate / gamma_hz;
    let seg = 2f64.powf(target.log2().round()).clamp(16.0, 1e12) as usize;
    let cap = 1usize << (n / 4).ilog2();
    Ok(seg.min(cap).max(16))
}

fn force_psd(cfg: &RunConfig, gamma: f64, mass: f64, temperature: f64, charge: u32) -> Result<f64> {
    let mut sf = thermal_force_psd(temperature, mass, gamma) + cfg.noise.extra_force_psd;
    if cfg.noise.voltage_psd_v2_per_hz > 0.0 {
        let d = cfg.noise.electrode_distance_m.unwrap_or(f64::NAN);
        sf += voltage_noise_force_psd(charge, cfg.noise.voltage_psd_v2_per_hz, d)?;
    }
    Ok(sf)
}

/// Secular angular frequencies for the configured axes, from
/// `sim.frequencies_hz` or from the trap geometry.
fn axis_omegas(cfg: &RunConfig) -> Result<Vec<(crate::Axis, f64)>> {
    let s = cfg.sim()?;
    let axes = cfg.axes()?;
    match &s.frequencies_hz {
        Some(f) => Ok(axes.into_iter().zip(f.iter().map(|f| TAU * f)).collect()),
        None => {
            let trap = cfg
                .trap()?
                .ok_or_else(|| Error::Config("sim.frequencies_hz or [trap] required".into()))?;
            let mp = mathieu_params(&trap, &cfg.particle()?)?;
            let w = secular_frequencies(&mp, trap.drive_angular_freq)?;
            Ok(axes.into_iter().map(|a| (a, w[a.index()])).collect())
        }
    }
}

/// Simulation plan described by `[sim]`, with the linewidth from
/// `sim.gamma_hz` or gas damping and the force noise from `[noise]`.
pub fn build_plan(cfg: &RunConfig) -> Result<SimPlan> {
    let s = cfg.sim()?;
    let p = cfg.particle()?;
    let gas = cfg.gas()?;
    let gamma = match s.gamma_hz {
        Some(g) => TAU * g,
        None => gas_damping(&p, &gas),
    };
    let sf = force_psd(cfg, gamma, p.mass(), gas.temperature(), p.charge_count())?;
    let drift = cfg.drift()?;
    let mut plan = SimPlan::new(cfg.engine()?, s.duration_s, s.output_rate_hz, p.mass(), gamma)
        .with_seed(cfg.seed)
        .with_anti_alias((s.anti_alias_order > 0).then_some(s.anti_alias_order))
        .with_noise_floor(cfg.noise.measurement_floor);
    if let Some(h) = s.solver_step_s {
        plan = plan.with_solver_step(h);
    }
    for (axis, w) in axis_omegas(cfg)? {
        plan = plan.with_axis(AxisPlan::new(axis, w, sf).with_drift(drift));
    }
    plan.validate()?;
    Ok(plan)
}

fn wants_levt(cfg: &RunConfig) -> bool {
    cfg.sim.as_ref().is_none_or(|s| s.format != "csv")
}

fn wants_csv(cfg: &RunConfig) -> bool {
    cfg.sim.as_ref().is_none_or(|s| s.format != "levt")
}

/// Runs the configured engine and writes one LEVT and/or CSV file per axis
/// plus `sim_summary.csv`.
pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path) -> Result<Manifest> {
    let timer = Timer::start();
    let plan = build_plan(cfg)?;
    let mut out = Outputs::create(out_dir)?;
    match plan.engine {
        Engine::Quadrature => {
            for q in simulate_quadrature(&plan)? {
                if wants_levt(cfg) {
                    let p = out.path(&format!("sim_{}_quad.levt", q.axis));
                    write_levt_quadrature(&p, &q)?;
                    out.record(p);
                }
                if wants_csv(cfg) {
                    let p = out.path(&format!("sim_{}_quad.csv", q.axis));
                    write_quadrature_csv(&p, &q)?;
                    out.record(p);
                }
            }
        }
        Engine::Secular | Engine::Mathieu => {
            let records = if plan.engine == Engine::Secular {
                simulate_secular(&plan)?
            } else {
                let trap = cfg
                    .trap()?
                    .ok_or_else(|| Error::Config("the mathieu engine needs a [trap] section".into()))?;
                simulate_mathieu(&plan, &trap, &cfg.particle()?)?
            };
            for ts in records {
                if wants_levt(cfg) {
                    let p = out.path(&format!("sim_{}.levt", ts.axis));
                    write_levt(&p, &ts)?;
                    out.record(p);
                }
                if wants_csv(cfg) {
                    let p = out.path(&format!("sim_{}.csv", ts.axis));
                    write_timeseries_csv(&p, &ts)?;
                    out.record(p);
                }
            }
        }
    }
    let mut s = String::from("axis,omega_rad_s,frequency_hz,gamma_rad_s,gamma_hz,force_psd_n2_hz,thermal_variance_m2\n");
    for a in &plan.axes {
        let var = a.force_psd / (2.0 * plan.mass * plan.mass * a.omega * a.omega * plan.gamma);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            a.axis,
            a.omega,
            a.omega / TAU,
            plan.gamma,
            plan.gamma / TAU,
            a.force_psd,
            var
        );
    }
    out.write("sim_summary.csv", s)?;
    Manifest::new("simulate", cfg.seed, &cfg.source, timer)
        .note("engine", format!("{:?}", plan.engine))
        .note("samples_per_axis", plan.sample_count())
        .finish(&mut out, &[])
}

/// Analysis of one record.
#[derive(Debug, Clone)]
pub struct RecordAnalysis {
    pub name: String,
    pub axis: String,
    pub quadratures: QuadratureSeries,
    pub r2_fit: LorentzFit,
    pub segment_length: usize,
    pub rayleigh: RayleighStats,
    pub temperature: Option<TemperatureEstimate>,
    pub displacement_fit: Option<DisplacementFit>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub manifest: Manifest,
    pub records: Vec<RecordAnalysis>,
    pub warnings: Vec<String>,
}

/// Reference frequency for `axis`: `lockin.f_lo_hz`, else the configured
/// secular frequency of that axis.
fn reference_frequency(cfg: &RunConfig, axis: &str) -> Option<f64> {
    if let Some(f) = cfg.lockin.as_ref().and_then(|l| l.f_lo_hz) {
        return Some(f);
    }
    let omegas = axis_omegas(cfg).ok()?;
    omegas.iter().find(|(a, _)| a.label() == axis).map(|(_, w)| w / TAU)
}

fn expected_gamma_hz(cfg: &RunConfig) -> Result<f64> {
    if let Some(g) = cfg.fit.gamma_guess_hz {
        return Ok(g);
    }
    if let Some(g) = cfg.sim.as_ref().and_then(|s| s.gamma_hz) {
        return Ok(g);
    }
    Ok(gas_damping(&cfg.particle()?, &cfg.gas()?) / TAU)
}

fn fit_csv(rows: &[(&str, f64, Option<f64>)], warning: Option<&str>) -> String {
    let mut s = String::from("parameter,value,error\n");
    for (k, v, e) in rows {
        match e {
            Some(e) => {
                let _ = writeln!(s, "{k},{v},{e}");
            }
            None => {
                let _ = writeln!(s, "{k},{v},");
            }
        }
    }
    if let Some(w) = warning {
        let _ = writeln!(s, "warning,\"{}\",", w.replace('"', "'"));
    }
    s
}

fn psd_csv(f: &[f64], v: &[f64], model: impl Fn(f64) -> f64) -> String {
    let mut s = String::from("frequency_hz,psd,model\n");
    for (f, v) in f.iter().zip(v) {
        let _ = writeln!(s, "{f},{v},{}", model(*f));
    }
    s
}

fn load_quadratures(cfg: &RunConfig, path: &Path, warnings: &mut Vec<String>) -> Result<(QuadratureSeries, bool)> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let record = match ext.as_str() {
        "levt" => read_levt(path, 1.0)?,
        "csv" => {
            let axis = cfg.sim.as_ref().and_then(|s| s.axes.first().cloned()).unwrap_or_else(|| "x".into());
            LevtRecord::Displacement(read_timeseries_csv(path, &axis)?)
        }
        _ => return Err(Error::Config(format!("{}: expected a .levt or .csv input", path.display()))),
    };
    match record {
        LevtRecord::Quadrature(mut q) => {
            match reference_frequency(cfg, &q.axis) {
                Some(f) => q.f_lo = f,
                None => {
                    warnings.push(format!(
                        "{}: reference frequency unknown, temperature and displacement fit skipped",
                        path.display()
                    ));
                    q.f_lo = f64::NAN;
                }
            }
            Ok((q, false))
        }
        LevtRecord::Displacement(ts) => {
            let l = cfg
                .lockin
                .as_ref()
                .ok_or_else(|| Error::Config("analysing a displacement record needs a [lockin] section".into()))?;
            let f_lo =
                reference_frequency(cfg, &ts.axis).ok_or_else(|| Error::Config("lockin.f_lo_hz is required for this record".into()))?;
            let mut lc = LockinConfig::new(f_lo, l.cutoff_hz)
                .with_order(l.order)
                .with_decimation(l.decimation);
            if let Some(g) = cfg.fit.gamma_guess_hz {
                lc = lc.with_expected_linewidth(g);
            }
            Ok((lockin(&ts, &lc)?, true))
        }
    }
}

fn analyze_record(cfg: &RunConfig, path: &Path, out: &mut Outputs, warnings: &mut Vec<String>) -> Result<RecordAnalysis> {
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("record").to_string();
    let (q, demodulated) = load_quadratures(cfg, path, warnings)?;
    if demodulated {
        let p = out.path(&format!("{name}_quadratures.csv"));
        write_quadrature_csv(&p, &q)?;
        out.record(p);
    }
    let mass = cfg.particle()?.mass();
    let guess_hz = expected_gamma_hz(cfg)?;
    let seg = match cfg.fit.segment_length {
        Some(n) => n,
        None => auto_segment(q.sample_rate, guess_hz, q.len())?,
    };
    let (r, r2) = amplitude(&q);
    let window = match (cfg.fit.f_min_hz, cfg.fit.f_max_hz) {
        (None, None) => None,
        (lo, hi) => Some(FitWindow {
            f_min: lo.unwrap_or(0.0),
            f_max: hi.unwrap_or(0.5 * q.sample_rate),
        }),
    };
    let guess = R2Guess {
        gamma_hz: cfg.fit.gamma_guess_hz,
        s: None,
    };
    let (psd, fit) = fit_r2_record(&r2, q.sample_rate, seg, cfg.fit.overlap, guess, window)?;
    if let Some(w) = &fit.warning {
        warnings.push(format!("{name}: R² fit unreliable: {w}"));
    }
    out.write(
        &format!("{name}_r2_psd.csv"),
        psd_csv(&psd.frequencies, &psd.values, |f| fit.model(f)),
    )?;
    out.write(
        &format!("{name}_fit_r2.csv"),
        fit_csv(
            &[
                ("gamma_hz", fit.gamma_hz, Some(fit.gamma_err_hz)),
                ("s", fit.s, Some(fit.s_err)),
                ("sigma2", fit.sigma2(), None),
                ("gamma_err_curve_fit_hz", fit.analytic_gamma_err_hz, None),
                ("jackknife_groups", fit.jackknife_groups as f64, None),
                ("reduced_chi2", fit.reduced_chi2, None),
                ("dof", fit.dof as f64, None),
                ("segment_length", seg as f64, None),
                ("window_f_min_hz", fit.window.f_min, None),
                ("window_f_max_hz", fit.window.f_max, None),
            ],
            fit.warning.as_deref(),
        ),
    )?;

    let n_eff = effective_samples(q.duration(), Some(fit.gamma()), q.len());
    let ray = rayleigh_stats(&r, Some(n_eff), cfg.fit.histogram_bins)?;
    if ray.low_sample_warning {
        warnings.push(format!("{name}: only {n_eff:.1} independent amplitude samples"));
    }
    let mut s = String::from("r_center,density,model\n");
    for b in &ray.histogram {
        let _ = writeln!(s, "{},{},{}", b.center, b.density, b.model);
    }
    out.write(&format!("{name}_rayleigh.csv"), s)?;

    let mut temperature = None;
    let mut disp = None;
    if q.f_lo.is_finite() {
        let omega = TAU * q.f_lo;
        temperature = Some(temperature_from_quadratures(&q, mass, omega, Some(fit.gamma()))?);
        if cfg.fit.method != "r2" {
            let zp = zoom_psd(&q, seg, cfg.fit.overlap)?;
            let half = (25.0 * fit.gamma_hz).min(0.45 * q.sample_rate);
            let w = FitWindow {
                f_min: q.f_lo - half,
                f_max: q.f_lo + half,
            };
            let g = DisplacementGuess {
                omega0: Some(omega),
                gamma: Some(fit.gamma()),
                ..Default::default()
            };
            match fit_displacement_psd(&zp, mass, g, Some(w)) {
                Ok(d) => {
                    if let Some(msg) = &d.warning {
                        warnings.push(format!("{name}: displacement fit unreliable: {msg}"));
                    }
                    out.write(
                        &format!("{name}_zoom_psd.csv"),
                        psd_csv(&zp.frequencies, &zp.values, |f| {
                            crate::specfit::displacement_model(f, mass, d.omega0, d.gamma, d.force_psd, d.floor)
                        }),
                    )?;
                    out.write(
                        &format!("{name}_fit_displacement.csv"),
                        fit_csv(
                            &[
                                ("omega0_rad_s", d.omega0, Some(d.errors[0])),
                                ("gamma_hz", d.gamma_hz(), Some(d.gamma_err_hz())),
                                ("force_psd", d.force_psd, Some(d.errors[2])),
                                ("floor", d.floor, Some(d.errors[3])),
                                ("temperature_k", d.temperature, Some(d.errors[4])),
                                ("reduced_chi2", d.reduced_chi2, None),
                            ],
                            d.warning.as_deref(),
                        ),
                    )?;
                    disp = Some(d);
                }
                Err(e) => warnings.push(format!("{name}: displacement fit failed: {e}")),
            }
        }
    }
    Ok(RecordAnalysis {
        name,
        axis: q.axis.clone(),
        quadratures: q,
        r2_fit: fit,
        segment_length: seg,
        rayleigh: ray,
        temperature,
        displacement_fit: disp,
    })
}

/// Demodulates (when needed), fits the R² spectrum, checks the Rayleigh
/// statistics and, when the reference frequency is known, fits the
/// displacement spectrum rebuilt from the quadratures. Unreliable fits are
/// reported as warnings; a fit that fails to converge is an error.
pub fn cmd_analyze(cfg: &RunConfig, inputs: &[PathBuf], out_dir: &Path) -> Result<AnalyzeOutcome> {
    let timer = Timer::start();
    if inputs.is_empty() {
        return Err(Error::Config("analyze needs at least one input file".into()));
    }
    let mut out = Outputs::create(out_dir)?;
    let mut warnings = Vec::new();
    let mut records = Vec::new();
    for path in inputs {
        records.push(analyze_record(cfg, path, &mut out, &mut warnings)?);
    }
    let mut s = String::from(
        "record,axis,gamma_hz,gamma_err_hz,reduced_chi2,reliable,sigma_from_mean,sigma_from_var,relative_difference,expected_relative_difference,effective_samples,temperature_k,temperature_err_k,disp_gamma_hz,disp_gamma_err_hz\n",
    );
    for r in &records {
        let (t, te) = r.temperature.map_or((f64::NAN, f64::NAN), |t| (t.temperature, t.stderr));
        let (dg, dge) = r
            .displacement_fit
            .as_ref()
            .map_or((f64::NAN, f64::NAN), |d| (d.gamma_hz(), d.gamma_err_hz()));
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.name,
            r.axis,
            r.r2_fit.gamma_hz,
            r.r2_fit.gamma_err_hz,
            r.r2_fit.reduced_chi2,
            r.r2_fit.reliable() as u8,
            r.rayleigh.sigma_from_mean,
            r.rayleigh.sigma_from_var,
            r.rayleigh.relative_difference,
            r.rayleigh.expected_relative_difference,
            r.rayleigh.effective_samples,
            t,
            te,
            dg,
            dge
        );
    }
    out.write("analysis_summary.csv", s)?;
    let manifest = Manifest::new("analyze", cfg.seed, &cfg.source, timer)
        .with_inputs(inputs)?
        .finish(&mut out, &warnings)?;
    Ok(AnalyzeOutcome {
        manifest,
        records,
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub manifest: Manifest,
    pub points: Vec<PressurePoint>,
    pub fit: LineFit,
    pub bootstrap: Option<BootstrapSummary>,
    pub warnings: Vec<String>,
}

/// Per-pressure seed, independent of how many pressures there are.
fn pressure_seed(seed: u64, i: usize) -> u64 {
    seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(i as u64 + 1))
}

struct AxisLinewidth {
    axis: String,
    gamma_hz: f64,
    sigma_hz: f64,
    reduced_chi2: f64,
    reliable: bool,
}

fn simulate_pressure(cfg: &RunConfig, i: usize, p_mbar: f64) -> Result<(Vec<AxisLinewidth>, Vec<String>)> {
    let s = cfg.sim()?;
    let sw = cfg.sweep.as_ref().unwrap();
    let particle = cfg.particle()?;
    let gas = GasEnvironment::new(
        p_mbar * crate::constants::PA_PER_MBAR,
        cfg.gas.temperature_k,
        cfg.gas.molecular_mass_kg,
    )?;
    let gamma = gas_damping(&particle, &gas) + TAU * sw.excess_gamma_hz;
    let sf = force_psd(cfg, gamma, particle.mass(), gas.temperature(), particle.charge_count())?;
    let drift = cfg.drift()?;
    let mut plan = SimPlan::new(Engine::Quadrature, s.duration_s, s.output_rate_hz, particle.mass(), gamma)
        .with_seed(pressure_seed(cfg.seed, i))
        .with_noise_floor(cfg.noise.measurement_floor);
    for (axis, w) in axis_omegas(cfg)? {
        plan = plan.with_axis(AxisPlan::new(axis, w, sf).with_drift(drift));
    }
    let mut warnings = Vec::new();
    let mut lines = Vec::new();
    for q in simulate_quadrature(&plan)? {
        let seg = match cfg.fit.segment_length {
            Some(n) => n,
            None => auto_segment(q.sample_rate, gamma / TAU, q.len())?,
        };
        let (_, fit) = fit_r2_record(&q.r_squared(), q.sample_rate, seg, cfg.fit.overlap, R2Guess::default(), None)?;
        if let Some(w) = &fit.warning {
            warnings.push(format!("P = {p_mbar:e} mbar, axis {}: {w}", q.axis));
        }
        lines.push(AxisLinewidth {
            axis: q.axis.clone(),
            gamma_hz: fit.gamma_hz,
            sigma_hz: fit.gamma_err_hz,
            reduced_chi2: fit.reduced_chi2,
            reliable: fit.reliable(),
        });
    }
    Ok((lines, warnings))
}

fn read_points_csv(path: &Path) -> Result<Vec<PressurePoint>> {
    let text = std::fs::read_to_string(path)?;
    let mut pts = Vec::new();
    let mut offset = 0u64;
    for (i, line) in text.lines().enumerate() {
        let here = offset;
        offset += line.len() as u64 + 1;
        if i == 0 || line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Format {
                offset: here,
                reason: format!("line {}: expected pressure_mbar,gamma_hz,sigma_hz", i + 1),
            })?;
        if v.len() != 3 {
            return Err(Error::Format {
                offset: here,
                reason: format!("line {}: expected 3 columns, found {}", i + 1, v.len()),
            });
        }
        pts.push(PressurePoint {
            pressure_mbar: v[0],
            gamma_hz: v[1],
            sigma_hz: v[2],
        });
    }
    Ok(pts)
}

/// Linewidths drawn around γ = γ_exc + k·P with σ(P) = σ_ref (P/P_ref)^α.
pub(crate) fn synthetic_points(
    pressures: &[f64],
    slope: f64,
    excess: f64,
    sigma_ref: f64,
    p_ref: f64,
    exponent: f64,
    seed: u64,
) -> Vec<PressurePoint> {
    let mut g = stream_id(seed, 0x7377_6565_70);
    pressures
        .iter()
        .map(|&p| {
            let sigma = sigma_ref * (p / p_ref).powf(exponent);
            PressurePoint {
                pressure_mbar: p,
                gamma_hz: excess + slope * p + sigma * g.sample(),
                sigma_hz: sigma,
            }
        })
        .collect()
}

/// Linewidth against pressure: per-pressure R² fits (or synthetic/file
/// points), the weighted line with its confidence band, and the
/// intercept upper bound.
pub fn cmd_sweep(cfg: &RunConfig, out_dir: &Path) -> Result<SweepOutcome> {
    let timer = Timer::start();
    let sw = cfg.sweep.as_ref().ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
    let mut out = Outputs::create(out_dir)?;
    let mut warnings = Vec::new();
    let points = match sw.mode.as_str() {
        "simulate" => {
            let per: Vec<Result<(Vec<AxisLinewidth>, Vec<String>)>> = sw
                .pressures_mbar
                .par_iter()
                .enumerate()
                .map(|(i, &p)| simulate_pressure(cfg, i, p))
                .collect();
            let mut axes_csv = String::from("pressure_mbar,axis,gamma_hz,sigma_hz,reduced_chi2,reliable\n");
            let mut pts = Vec::new();
            for (&p, r) in sw.pressures_mbar.iter().zip(per) {
                let (lines, w) = r?;
                warnings.extend(w);
                for l in &lines {
                    let _ = writeln!(
                        axes_csv,
                        "{p},{},{},{},{},{}",
                        l.axis, l.gamma_hz, l.sigma_hz, l.reduced_chi2, l.reliable as u8
                    );
                }
                let vals: Vec<(f64, f64)> = lines.iter().map(|l| (l.gamma_hz, l.sigma_hz)).collect();
                let (g, s) = inverse_variance_mean(&vals)?;
                pts.push(PressurePoint {
                    pressure_mbar: p,
                    gamma_hz: g,
                    sigma_hz: s,
                });
            }
            out.write("sweep_axes.csv", axes_csv)?;
            pts
        }
        "synthetic" => {
            let slope = match sw.slope_hz_per_mbar {
                Some(k) => k,
                None => {
                    let particle = cfg.particle()?;
                    let gas = GasEnvironment::new(crate::constants::PA_PER_MBAR, cfg.gas.temperature_k, cfg.gas.molecular_mass_kg)?;
                    gas_damping(&particle, &gas) / TAU
                }
            };
            synthetic_points(
                &sw.pressures_mbar,
                slope,
                sw.excess_gamma_hz,
                sw.sigma_ref_hz,
                sw.p_ref_mbar,
                sw.sigma_exponent,
                cfg.seed,
            )
        }
        _ => read_points_csv(sw.points_csv.as_ref().unwrap())?,
    };
    let fit = linewidth_vs_pressure(&points, sw.confidence)?;

    let mut s = String::from("pressure_mbar,gamma_hz,sigma_hz\n");
    for p in &points {
        let _ = writeln!(s, "{},{},{}", p.pressure_mbar, p.gamma_hz, p.sigma_hz);
    }
    out.write("sweep_points.csv", s)?;

    let mut s = String::from("parameter,value,error\n");
    let _ = writeln!(s, "intercept_hz,{},{}", fit.intercept, fit.intercept_err());
    let _ = writeln!(s, "slope_hz_per_mbar,{},{}", fit.slope, fit.slope_err());
    let _ = writeln!(s, "chi2,{},", fit.chi2);
    let _ = writeln!(s, "dof,{},", fit.dof);
    let _ = writeln!(s, "t_quantile,{},", fit.t_quantile);
    let _ = writeln!(
        s,
        "zero_intercept_slope,{},{}",
        fit.zero_intercept.slope, fit.zero_intercept.slope_err
    );
    let _ = writeln!(s, "zero_intercept_chi2,{},", fit.zero_intercept.chi2);
    out.write("line_fit.csv", s)?;

    let (pmin, pmax) = points.iter().fold((f64::INFINITY, 0.0f64), |(a, b), p| {
        (a.min(p.pressure_mbar), b.max(p.pressure_mbar))
    });
    let mut s = String::from("pressure_mbar,fit_hz,band_lo_hz,band_hi_hz\n");
    let mut ps = vec![0.0];
    if pmin > 0.0 && pmax > pmin {
        ps.extend((0..100).map(|i| (pmin.ln() + (pmax.ln() - pmin.ln()) * i as f64 / 99.0).exp()));
    }
    for p in ps {
        let (lo, hi) = fit.band(p);
        let _ = writeln!(s, "{p},{},{lo},{hi}", fit.predict(p));
    }
    out.write("line_band.csv", s)?;

    let bootstrap = if sw.bootstrap_resamples > 0 {
        Some(bootstrap_intercept(&points, sw.bootstrap_resamples, sw.confidence, cfg.seed)?)
    } else {
        None
    };
    let mut s = String::from("quantity,value\n");
    let _ = writeln!(s, "confidence,{}", sw.confidence);
    let _ = writeln!(s, "gamma_exc_hz,{}", fit.intercept);
    let _ = writeln!(s, "gamma_exc_err_hz,{}", fit.intercept_err());
    let _ = writeln!(s, "gamma_cm_upper_hz,{}", fit.intercept_upper);
    let _ = writeln!(s, "gamma_cm_upper_one_sided_hz,{}", fit.intercept_upper_one_sided);
    if let Some(b) = &bootstrap {
        let _ = writeln!(s, "bootstrap_upper_hz,{}", b.intercept_upper);
        let _ = writeln!(s, "bootstrap_std_hz,{}", b.intercept_std);
    }
    out.write("bound.csv", s)?;

    let manifest = Manifest::new("sweep", cfg.seed, &cfg.source, timer)
        .note("mode", &sw.mode)
        .finish(&mut out, &warnings)?;
    Ok(SweepOutcome {
        manifest,
        points,
        fit,
        bootstrap,
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct BoundsOutcome {
    pub manifest: Manifest,
    pub dcsl: ExclusionGrid,
    pub ddp: ExclusionGrid,
    /// Excluded R₀ intervals at `bounds.ddp_scan_temperature_k`.
    pub ddp_scan: Vec<Interval>,
    pub warnings: Vec<String>,
}

fn indeterminate_report(tag: &str, g: &ExclusionGrid, warnings: &mut Vec<String>, csv: &mut String) {
    if !g.indeterminate.is_empty() {
        warnings.push(format!("{tag}: {} indeterminate cells", g.indeterminate.len()));
    }
    for (i1, i2, e) in &g.indeterminate {
        let _ = writeln!(
            csv,
            "{tag},{},{},\"{}\"",
            g.axis1.values[*i1],
            g.axis2.values[*i2],
            e.replace('"', "'")
        );
    }
}

/// dCSL exclusion over (r_C, λ) and dDP exclusion over (R₀, T), plus a
/// one-dimensional R₀ scan at fixed temperature.
pub fn cmd_bounds(cfg: &RunConfig, out_dir: &Path) -> Result<BoundsOutcome> {
    let timer = Timer::start();
    let b = &cfg.bounds;
    let bound = cfg.bound()?;
    let p = cfg.particle()?;
    let n = b.grid_points;
    let mut out = Outputs::create(out_dir)?;
    let mut warnings = Vec::new();

    let dcsl_model = GridModel::Dcsl {
        temperature: b.dcsl_temperature_k,
        variant: cfg.dcsl_variant()?,
    };
    let dcsl = exclusion_map(
        &dcsl_model,
        &GridAxis::log_spaced("r_c_m", b.r_c_range_m[0], b.r_c_range_m[1], n)?,
        &GridAxis::log_spaced("lambda_per_s", b.lambda_range[0], b.lambda_range[1], n)?,
        &p,
        &bound,
    )?;
    let ddp_variant = cfg.ddp_variant()?;
    let ddp = exclusion_map(
        &GridModel::Ddp { variant: ddp_variant },
        &GridAxis::log_spaced("r0_m", b.r0_range_m[0], b.r0_range_m[1], n)?,
        &GridAxis::log_spaced("temperature_k", b.ddp_temperature_range_k[0], b.ddp_temperature_range_k[1], n)?,
        &p,
        &bound,
    )?;
    let scan_axis = GridAxis::log_spaced("r0_m", b.r0_range_m[0], b.r0_range_m[1], 10 * n)?;
    let scan_model = GridModel::Ddp { variant: ddp_variant };
    let scan = exclusion_scan(&scan_axis.values, &bound, |r0| {
        scan_model.gamma_hz(&p, r0, b.ddp_scan_temperature_k)
    })?;

    out.write("dcsl_grid.csv", dcsl.grid_csv())?;
    out.write("dcsl_boundary.csv", dcsl.boundary_csv())?;
    out.write("ddp_grid.csv", ddp.grid_csv())?;
    out.write("ddp_boundary.csv", ddp.boundary_csv())?;
    let mut s = String::from("temperature_k,r0_lo_m,r0_hi_m\n");
    for iv in &scan {
        let _ = writeln!(s, "{},{},{}", b.ddp_scan_temperature_k, iv.lo, iv.hi);
    }
    out.write("ddp_scan_intervals.csv", s)?;
    let mut s = String::from("model,axis1,axis2,error\n");
    indeterminate_report("dcsl", &dcsl, &mut warnings, &mut s);
    indeterminate_report("ddp", &ddp, &mut warnings, &mut s);
    out.write("indeterminate.csv", s)?;

    let mut s = String::from("quantity,value\n");
    let _ = writeln!(s, "gamma_cm_upper_hz,{}", bound.gamma_cm_upper_hz);
    let _ = writeln!(s, "confidence,{}", bound.confidence);
    let _ = writeln!(s, "particle_radius_m,{}", p.radius());
    let _ = writeln!(s, "particle_mass_kg,{}", p.mass());
    let _ = writeln!(s, "nucleus_mass_kg,{}", p.avg_nucleus_mass());
    let _ = writeln!(s, "dcsl_variant,{:?}", variant_name(cfg.dcsl_variant()?));
    let _ = writeln!(s, "ddp_variant,{:?}", variant_name(ddp_variant));
    let _ = writeln!(s, "dcsl_temperature_k,{}", b.dcsl_temperature_k);
    let _ = writeln!(s, "grid_points,{n}");
    let _ = writeln!(s, "dcsl_excluded_cells,{}", dcsl.excluded_count());
    let _ = writeln!(s, "ddp_excluded_cells,{}", ddp.excluded_count());
    if let Some(m) = dcsl.boundary_minimum() {
        let _ = writeln!(s, "dcsl_min_lambda_per_s,{}", m.axis2);
        let _ = writeln!(s, "dcsl_min_r_c_m,{}", m.axis1);
    }
    out.write("bounds_summary.csv", s)?;

    let manifest = Manifest::new("bounds", cfg.seed, &cfg.source, timer)
        .note("grid", format!("{n}x{n} log-spaced"))
        .finish(&mut out, &warnings)?;
    Ok(BoundsOutcome {
        manifest,
        dcsl,
        ddp,
        ddp_scan: scan,
        warnings,
    })
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Sphere => "sphere",
        Variant::Strong => "strong",
        Variant::SingleParticle => "single",
    }
}
