use std::f64::consts::TAU;

use levlw::demod::{amplitude, lockin, rayleigh_stats, LockinConfig};
use levlw::simulate::{simulate_secular, AxisPlan, DriftProfile, Engine, SimPlan};
use levlw::specfit::effective_samples;
use levlw::trapphys::{thermal_force_psd, thermal_variance};
use levlw::{Axis, TimeSeries};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const M: f64 = 9.6e-17;
const T: f64 = 293.0;
const F0: f64 = 327.0;

fn thermal(gamma: f64, duration: f64, seed: u64, drift: DriftProfile) -> TimeSeries {
    let plan = SimPlan::new(Engine::Secular, duration, 5000.0, M, gamma)
        .with_seed(seed)
        .with_anti_alias(None)
        .with_axis(AxisPlan::new(Axis::X, TAU * F0, thermal_force_psd(T, M, gamma)).with_drift(drift));
    simulate_secular(&plan).unwrap().remove(0)
}

fn var(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tone_at_reference_is_recovered(
        amp in 1e-9f64..1e3,
        phase in 0.0f64..TAU,
        f_lo in 100.0f64..400.0,
    ) {
        let fs = 2000.0;
        let values: Vec<f64> = (0..20_000).map(|i| amp * (TAU * f_lo * i as f64 / fs + phase).cos()).collect();
        let ts = TimeSeries::new(fs, 0.0, values, "x").unwrap();
        let q = lockin(&ts, &LockinConfig::new(f_lo, 2.0)).unwrap();
        let (r, _) = amplitude(&q);
        for k in q.len() / 2..q.len() {
            prop_assert!((r[k] / amp - 1.0).abs() < 1e-6, "r = {} vs {amp}", r[k]);
        }
        let last = q.len() - 1;
        prop_assert!((q.x[last] - amp * phase.cos()).abs() < 1e-6 * amp);
        prop_assert!((q.y[last] + amp * phase.sin()).abs() < 1e-6 * amp);
    }
}

#[test]
fn thermal_quadratures_carry_the_thermal_variance() {
    let gamma = TAU * 0.5;
    let ts = thermal(gamma, 1000.0, 2, DriftProfile::none());
    let q = lockin(&ts, &LockinConfig::new(F0, 20.0).with_decimation(50)).unwrap();
    let expected = thermal_variance(T, M, TAU * F0);
    let n = effective_samples(q.duration(), Some(gamma), q.len());
    let se = expected * (2.0 / n).sqrt();
    for ch in [&q.x, &q.y] {
        assert!((var(ch) - expected).abs() < 3.0 * se, "{:e} vs {expected:e}", var(ch));
    }
    // ⟨R²⟩ is twice the per-quadrature variance
    let r2 = q.r_squared();
    let mean_r2 = r2.iter().sum::<f64>() / r2.len() as f64;
    let per_quad = 0.5 * (var(&q.x) + var(&q.y));
    assert!((mean_r2 - 2.0 * per_quad).abs() < 3.0 * 2.0 * per_quad * (1.0 / n).sqrt());
}

#[test]
fn frequency_offset_does_not_change_the_amplitude_distribution() {
    let gamma = TAU * 0.5;
    let cfg = LockinConfig::new(F0, 20.0).with_decimation(50);
    let ra = amplitude(&lockin(&thermal(gamma, 2000.0, 5, DriftProfile::none()), &cfg).unwrap()).0;
    let shifted = DriftProfile::none().with_offset(TAU * 3.0);
    let rb = amplitude(&lockin(&thermal(gamma, 2000.0, 6, shifted), &cfg).unwrap()).0;
    // keep samples a few correlation times apart so they are independent
    let step = (3.0 / gamma * 100.0).ceil() as usize;
    let a: Vec<f64> = ra.iter().step_by(step).copied().collect();
    let b: Vec<f64> = rb.iter().step_by(step).copied().collect();
    let (n, m) = (a.len() as f64, b.len() as f64);
    let critical = 1.628 * ((n + m) / (n * m)).sqrt();
    let d = ks_statistic(&a, &b);
    assert!(d < critical, "D = {d} >= {critical} (n = {n}, m = {m})");
}

#[test]
fn rayleigh_estimators_converge_as_inverse_root_n() {
    let sigma: f64 = 2.5;
    let normal: Normal<f64> = Normal::new(0.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut scaled = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let reps = 200;
        let mut rms = 0.0;
        let mut expected = 0.0;
        for _ in 0..reps {
            let r: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng).hypot(normal.sample(&mut rng))).collect();
            let s = rayleigh_stats(&r, None, 20).unwrap();
            rms += s.relative_difference.powi(2);
            expected = s.expected_relative_difference;
        }
        let rms = (rms / reps as f64).sqrt();
        assert!((rms / expected - 1.0).abs() < 0.2, "n = {n}: rms {rms} vs expected {expected}");
        scaled.push(rms * (n as f64).sqrt());
    }
    for s in &scaled {
        assert!((s / scaled[0] - 1.0).abs() < 0.25, "{scaled:?}");
    }
}
