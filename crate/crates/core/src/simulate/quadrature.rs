use rayon::prelude::*;

use super::rng::{stream, Purpose};
use super::secular::add_white;
use super::{check_trapped, AxisPlan, Engine, Initial, SimPlan};
use crate::constants::rad_to_hz;
use crate::error::{Error, Result};
use crate::series::QuadratureSeries;

/// Integrates the slowly varying quadratures
///
/// Ẋ + (γ/2)X = f₁/(mω_o),  Ẏ + (γ/2)Y = f₂/(mω_o),  ⟨f_k f_j⟩ = δ_kj S_F/2,
///
/// one output sample per step with the exact Ornstein-Uhlenbeck transition.
/// Frequency drift rotates (X, Y) by the exactly integrated phase, so that a
/// displacement A cos((ω_o + δω)t) shows up as X = A cos φ, Y = −A sin φ.
/// The reference frequency of the returned series is ω_o/2π.
pub fn simulate_quadrature(plan: &SimPlan) -> Result<Vec<QuadratureSeries>> {
    plan.validate()?;
    plan.require_engine(Engine::Quadrature)?;
    for a in &plan.axes {
        let limit = a.omega / 100.0;
        if plan.gamma >= limit {
            return Err(Error::RotatingWave { gamma: plan.gamma, limit });
        }
    }
    plan.axes.par_iter().map(|a| run_axis(plan, a)).collect()
}

/// Stationary variance of each quadrature, S_F/(2m²ω²γ).
pub fn quadrature_variance(force_psd: f64, mass: f64, omega: f64, gamma: f64) -> f64 {
    force_psd / (2.0 * mass * mass * omega * omega * gamma)
}

fn run_axis(plan: &SimPlan, ax: &AxisPlan) -> Result<QuadratureSeries> {
    let n = plan.sample_count();
    let h = 1.0 / plan.output_rate;
    let g = plan.gamma;
    let a = (-0.5 * g * h).exp();
    // per-step innovation variance: σ²(1 − a²), with the γ → 0 limit
    let intensity = ax.force_psd / (2.0 * plan.mass * plan.mass * ax.omega * ax.omega);
    let sd = if g > 0.0 {
        (intensity / g * -(-g * h).exp_m1()).sqrt()
    } else {
        (intensity * h).sqrt()
    };

    let (mut x, mut y) = match ax.initial {
        Initial::Fixed(x, y) => (x, y),
        Initial::Stationary if ax.force_psd == 0.0 => (0.0, 0.0),
        Initial::Stationary => {
            if g <= 0.0 {
                return Err(crate::error::invalid(
                    "initial",
                    "no stationary state without damping; give a fixed start",
                ));
            }
            let s = quadrature_variance(ax.force_psd, plan.mass, ax.omega, g).sqrt();
            let mut r = stream(plan.seed, ax.axis, Purpose::Initial);
            (s * r.sample(), s * r.sample())
        }
    };

    let mut force = stream(plan.seed, ax.axis, Purpose::Force);
    let drifting = !ax.drift.is_none();
    if drifting {
        check_trapped(ax.axis, ax.omega + ax.drift.delta(0.0), 0.0)?;
    }
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut phase = 0.0;
    for k in 1..=n {
        x *= a;
        y *= a;
        if sd > 0.0 {
            x += sd * force.sample();
            y += sd * force.sample();
        }
        if drifting {
            let t = k as f64 * h;
            check_trapped(ax.axis, ax.omega + ax.drift.delta(t), t)?;
            let p = ax.drift.phase(t);
            let (s, c) = (p - phase).sin_cos();
            phase = p;
            (x, y) = (c * x + s * y, -s * x + c * y);
        }
        xs.push(x);
        ys.push(y);
    }

    if plan.measurement_noise_floor > 0.0 {
        // a white displacement floor N demodulates to variance N·fs per quadrature
        let sd = (plan.measurement_noise_floor * plan.output_rate).sqrt();
        let mut m = stream(plan.seed, ax.axis, Purpose::Measurement);
        add_white(&mut m, sd, &mut xs);
        add_white(&mut m, sd, &mut ys);
    }

    Ok(
        QuadratureSeries::new(plan.output_rate, h, xs, ys, rad_to_hz(ax.omega), ax.axis.label())?
            .with_meta("engine", "quadrature")
            .with_meta("seed", plan.seed)
            .with_meta("omega_rad_s", ax.omega)
            .with_meta("gamma_rad_s", plan.gamma)
            .with_meta("force_psd_n2_hz", ax.force_psd)
            .with_meta("mass_kg", plan.mass)
            .with_meta("units", "m"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Axis;
    use crate::simulate::DriftProfile;
    use std::f64::consts::TAU;

    #[test]
    fn noiseless_decay_is_exact() {
        let g = TAU * 0.01;
        let plan = SimPlan::new(Engine::Quadrature, 500.0, 2.0, 1e-17, g)
            .with_axis(AxisPlan::new(Axis::X, TAU * 327.0, 0.0).with_initial(Initial::Fixed(1.0, 0.0)));
        let q = &simulate_quadrature(&plan).unwrap()[0];
        for (i, &x) in q.x.iter().enumerate() {
            let want = (-0.5 * g * q.time(i)).exp();
            assert!((x - want).abs() <= 1e-12 * want, "{i}: {x} vs {want}");
            assert_eq!(q.y[i], 0.0);
        }
    }

    #[test]
    fn drift_preserves_amplitude() {
        let plan = SimPlan::new(Engine::Quadrature, 2e4, 8.0, 1e-17, 0.0).with_axis(
            AxisPlan::new(Axis::X, TAU * 327.0, 0.0)
                .with_initial(Initial::Fixed(0.6, 0.8))
                .with_drift(DriftProfile::sinusoidal(TAU * 0.25, 3600.0)),
        );
        let q = &simulate_quadrature(&plan).unwrap()[0];
        for r2 in q.r_squared() {
            assert!((r2.sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_sign_follows_detuning() {
        // constant offset δ: X = cos δt, Y = −sin δt
        let d = 0.3;
        let plan = SimPlan::new(Engine::Quadrature, 10.0, 10.0, 1e-17, 0.0).with_axis(
            AxisPlan::new(Axis::X, 1000.0, 0.0)
                .with_initial(Initial::Fixed(1.0, 0.0))
                .with_drift(DriftProfile::none().with_offset(d)),
        );
        let q = &simulate_quadrature(&plan).unwrap()[0];
        let t = q.time(q.len() - 1);
        assert!((q.x[q.len() - 1] - (d * t).cos()).abs() < 1e-12);
        assert!((q.y[q.len() - 1] + (d * t).sin()).abs() < 1e-12);
    }

    #[test]
    fn rejects_broad_lines() {
        let plan = SimPlan::new(Engine::Quadrature, 10.0, 10.0, 1e-17, 20.0).with_axis(AxisPlan::new(Axis::X, 1000.0, 1e-40));
        assert!(matches!(simulate_quadrature(&plan), Err(Error::RotatingWave { .. })));
    }
}
