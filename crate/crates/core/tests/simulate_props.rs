use std::f64::consts::{SQRT_2, TAU};

use levlw::constants::K_B;
use levlw::simulate::{
    apply_measurement, simulate_mathieu, simulate_quadrature, simulate_secular, AxisPlan, DriftProfile, Engine, Initial, SimPlan,
};
use levlw::specfit::{
    effective_samples, fit_displacement_psd, temperature_from_displacement, welch_psd, welch_timeseries, DisplacementGuess,
};
use levlw::trapphys::{thermal_force_psd, ParticleSpec, TrapConfig};
use levlw::{Axis, Error, TimeSeries};
use proptest::prelude::*;

const M: f64 = 9.6e-17;
const T: f64 = 293.0;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

fn autocovariance(v: &[f64], lag: usize) -> f64 {
    let n = v.len() - lag;
    (0..n).map(|i| v[i] * v[i + lag]).sum::<f64>() / n as f64
}

fn quadrature_plan(gamma: f64, duration: f64, rate: f64, seed: u64, drift: DriftProfile) -> SimPlan {
    let w = TAU * 327.0;
    SimPlan::new(Engine::Quadrature, duration, rate, M, gamma)
        .with_seed(seed)
        .with_axis(AxisPlan::new(Axis::X, w, thermal_force_psd(T, M, gamma)).with_drift(drift))
}

fn secular_plan(gamma: f64, duration: f64, rate: f64, seed: u64) -> SimPlan {
    SimPlan::new(Engine::Secular, duration, rate, M, gamma)
        .with_seed(seed)
        .with_anti_alias(None)
        .with_axis(AxisPlan::new(Axis::X, TAU * 327.0, thermal_force_psd(T, M, gamma)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn quadrature_autocovariance_is_exponential(gamma_hz in 0.02f64..0.5, seed in 0u64..1000) {
        let gamma = TAU * gamma_hz;
        let rate = 10.0;
        let q = &simulate_quadrature(&quadrature_plan(gamma, 1e5, rate, seed, DriftProfile::none())).unwrap()[0];
        prop_assert!(q.len() >= 1_000_000);
        let var = thermal_force_psd(T, M, gamma) / (2.0 * M * M * (TAU * 327.0f64).powi(2) * gamma);
        // standard error of a lagged covariance, at most that of the variance
        let se = var * (2.0 / effective_samples(q.duration(), Some(gamma), q.len())).sqrt();
        for tau in [0.0, 0.5 / gamma, 1.0 / gamma, 3.0 / gamma] {
            let lag = (tau * rate).round() as usize;
            let expected = var * (-gamma * lag as f64 / rate / 2.0).exp();
            for ch in [&q.x, &q.y] {
                let c = autocovariance(ch, lag);
                prop_assert!((c - expected).abs() < 4.0 * se, "lag {lag}: {c:e} vs {expected:e} (se {se:e})");
            }
        }
    }
}

#[test]
fn quadrature_variance_matches_ou_value() {
    let gamma = TAU * 0.05;
    let q = &simulate_quadrature(&quadrature_plan(gamma, 2e4, 5.0, 11, DriftProfile::none())).unwrap()[0];
    let var = thermal_force_psd(T, M, gamma) / (2.0 * M * M * (TAU * 327.0f64).powi(2) * gamma);
    let se = var * (2.0 / effective_samples(q.duration(), Some(gamma), q.len())).sqrt();
    for ch in [&q.x, &q.y] {
        assert!((variance(ch) - var).abs() < 3.0 * se, "{:e} vs {var:e}", variance(ch));
    }
}

#[test]
fn same_seed_gives_identical_output() {
    let p = quadrature_plan(TAU * 0.01, 1000.0, 2.0, 5, DriftProfile::sinusoidal(TAU, 100.0));
    assert_eq!(simulate_quadrature(&p).unwrap(), simulate_quadrature(&p).unwrap());
    let p = secular_plan(TAU, 10.0, 2000.0, 5);
    let a = simulate_secular(&p).unwrap();
    assert_eq!(a, simulate_secular(&p).unwrap());
    let other = simulate_secular(&p.clone().with_seed(6)).unwrap();
    assert_ne!(a[0].values, other[0].values);
}

#[test]
fn secular_variance_obeys_equipartition() {
    let gamma = TAU * 1.0;
    let w = TAU * 327.0;
    let ts = &simulate_secular(&secular_plan(gamma, 200.0, 5000.0, 21)).unwrap()[0];
    let est = temperature_from_displacement(ts, M, w, Some(gamma)).unwrap();
    assert!(est.effective_samples >= 50.0);
    assert!(
        (est.temperature - T).abs() < 3.0 * est.stderr,
        "T = {} +/- {}",
        est.temperature,
        est.stderr
    );
    let expected = K_B * T / (M * w * w);
    assert!((est.variance / expected - 1.0).abs() < 3.0 * est.stderr / T);
}

#[test]
fn secular_spectrum_recovers_the_damping() {
    let gamma = TAU * 1.0;
    let ts = &simulate_secular(&secular_plan(gamma, 400.0, 5000.0, 4)).unwrap()[0];
    let psd = welch_timeseries(ts, 32768, 0.5).unwrap();
    let fit = fit_displacement_psd(&psd, M, DisplacementGuess::default(), None).unwrap();
    assert!(
        (fit.gamma_hz() - 1.0).abs() < 2.0 * fit.gamma_err_hz(),
        "{} +/- {}",
        fit.gamma_hz(),
        fit.gamma_err_hz()
    );
}

#[test]
fn secular_and_quadrature_engines_carry_the_same_energy() {
    let gamma = TAU * 2.0;
    let ts = &simulate_secular(&secular_plan(gamma, 300.0, 5000.0, 8)).unwrap()[0];
    let q = &simulate_quadrature(&quadrature_plan(gamma, 300.0, 50.0, 9, DriftProfile::none())).unwrap()[0];
    let x2 = mean(&ts.values.iter().map(|v| v * v).collect::<Vec<_>>());
    let r2: Vec<f64> = q.r_squared().iter().map(|v| 0.5 * v).collect();
    let q2 = mean(&r2);
    let n = effective_samples(300.0, Some(gamma), ts.len());
    let se = x2 * (2.0 / n).sqrt();
    assert!((x2 - q2).abs() < 3.0 * SQRT_2 * se, "{x2:e} vs {q2:e}");
}

#[test]
fn drift_leaves_mean_squared_amplitude_alone() {
    let gamma = TAU * 0.05;
    let clean = &simulate_quadrature(&quadrature_plan(gamma, 2e4, 10.0, 1, DriftProfile::none())).unwrap()[0];
    for drift in [
        DriftProfile::sinusoidal(TAU * 2.0, 300.0),
        DriftProfile::linear(TAU * 1e-4),
        DriftProfile::none().with_offset(TAU * 0.5),
    ] {
        let d = &simulate_quadrature(&quadrature_plan(gamma, 2e4, 10.0, 1, drift)).unwrap()[0];
        let (a, b) = (mean(&clean.r_squared()), mean(&d.r_squared()));
        let n = effective_samples(clean.duration(), Some(gamma), clean.len());
        // R² is exponential: sd equals its mean
        let joint = (a * a + b * b).sqrt() / n.sqrt();
        assert!((a - b).abs() < 3.0 * joint, "{a:e} vs {b:e} ({joint:e})");
    }
}

fn rf_trap(particle: &ParticleSpec, q: f64, drive_hz: f64, u_dc: f64) -> TrapConfig {
    let (r_o, eta) = (1.1e-3, 0.3);
    let wd = TAU * drive_hz;
    TrapConfig {
        r_o,
        z_o: 3.5e-3,
        eta_ac: eta,
        kappa_dc: 0.08,
        u_dc,
        v_ac: q * r_o * r_o * wd * wd * particle.mass() / (2.0 * eta * particle.charge()),
        drive_angular_freq: wd,
    }
}

fn mathieu_run(q: f64, duration: f64) -> levlw::Result<TimeSeries> {
    let p = ParticleSpec::silica(231e-9).unwrap().with_mass(M).unwrap().with_charge_count(200);
    let trap = rf_trap(&p, q, 2000.0, 0.0);
    let plan = SimPlan::new(Engine::Mathieu, duration, 16384.0, M, 0.0)
        .with_seed(1)
        .with_anti_alias(None)
        .with_axis(AxisPlan::new(Axis::X, 0.0, 0.0).with_initial(Initial::Fixed(1e-6, 0.0)));
    Ok(simulate_mathieu(&plan, &trap, &p)?.remove(0))
}

#[test]
fn weak_drive_oscillates_at_pseudopotential_frequency() {
    let ts = mathieu_run(0.2, 2.0).unwrap();
    let psd = welch_psd(&ts.values, ts.sample_rate, ts.len(), 0.0).unwrap();
    let (f, _) = psd
        .frequencies
        .iter()
        .zip(&psd.values)
        .filter(|(f, _)| **f > 1.0 && **f < 1000.0)
        .fold((0.0, 0.0), |best, (f, v)| if *v > best.1 { (*f, *v) } else { best });
    let expected = 2000.0 * 0.2 / (2.0 * SQRT_2);
    assert!((f / expected - 1.0).abs() < 0.01, "{f} Hz vs {expected} Hz");
}

#[test]
fn stability_edge_of_the_mathieu_chart() {
    let bounded = mathieu_run(0.85, 1.0).unwrap();
    assert!(bounded.values.iter().all(|x| x.abs() < 1e-4));
    match mathieu_run(0.95, 1.0) {
        Err(Error::Unstable { axis, .. }) => assert_eq!(axis, Axis::X),
        other => panic!("expected an instability, got {other:?}"),
    }
}

#[test]
fn axis_without_rf_follows_the_secular_path() {
    let p = ParticleSpec::silica(231e-9).unwrap().with_mass(M).unwrap().with_charge_count(200);
    let trap = rf_trap(&p, 0.2, 2000.0, 50.0);
    let mp = levlw::trapphys::mathieu_params(&trap, &p).unwrap();
    assert_eq!(mp.q[2], 0.0);
    let wz = levlw::trapphys::secular_frequency(&mp, trap.drive_angular_freq, Axis::Z).unwrap();
    let gamma = TAU * 0.5;
    let sf = thermal_force_psd(T, M, gamma);
    let base = |e| SimPlan::new(e, 5.0, 2000.0, M, gamma).with_seed(3);
    let m = simulate_mathieu(&base(Engine::Mathieu).with_axis(AxisPlan::new(Axis::Z, 0.0, sf)), &trap, &p).unwrap();
    let s = simulate_secular(&base(Engine::Secular).with_axis(AxisPlan::new(Axis::Z, wz, sf))).unwrap();
    assert_eq!(m[0].values, s[0].values);
}

#[test]
fn detection_floor_on_a_silent_record_is_flat() {
    let floor = 1e-20;
    let zeros = TimeSeries::new(1000.0, 0.0, vec![0.0; 1 << 18], "x").unwrap();
    let ts = apply_measurement(&zeros, 1000.0, floor, None, 9).unwrap();
    let psd = welch_timeseries(&ts, 1024, 0.5).unwrap();
    let level = mean(&psd.values[1..psd.values.len() - 1]);
    assert!((level / floor - 1.0).abs() < 0.02, "{level:e}");
    let se = floor / psd.effective_averages.sqrt();
    let worst = psd.values[1..psd.values.len() - 1]
        .iter()
        .map(|v| (v - floor).abs() / se)
        .fold(0.0, f64::max);
    assert!(worst < 6.0, "worst bin {worst} se");
}
