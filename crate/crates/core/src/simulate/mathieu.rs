use std::f64::consts::TAU;

use rayon::prelude::*;

use super::rng::{stream, Purpose};
use super::secular::{add_floor, initial_state, run_axis as run_secular_axis};
use super::{AxisPlan, Engine, SimPlan, STEPS_PER_DRIVE_PERIOD, STEPS_PER_SECULAR_PERIOD};
use crate::error::{invalid, Error, Result};
use crate::filter::Decimator;
use crate::series::TimeSeries;
use crate::trapphys::{mathieu_params, ParticleSpec, TrapConfig};

/// Motion beyond this multiple of the reference amplitude counts as unstable.
pub const INSTABILITY_FACTOR: f64 = 1e3;

/// Integrates ẍ + γẋ + (ω_d²/4)(a + 2q cos ω_d t)x = F/m on every planned
/// axis, with a and q taken from the trap and particle. The `omega` field of
/// each [`AxisPlan`] is ignored. An axis with q = 0 is a static harmonic
/// well and is handed to the exact secular integrator.
pub fn simulate_mathieu(plan: &SimPlan, trap: &TrapConfig, particle: &ParticleSpec) -> Result<Vec<TimeSeries>> {
    plan.validate()?;
    plan.require_engine(Engine::Mathieu)?;
    if (plan.mass - particle.mass()).abs() > 1e-9 * particle.mass() {
        return Err(invalid("mass", "plan mass differs from the particle mass"));
    }
    let mp = mathieu_params(trap, particle)?;
    let wd = trap.drive_angular_freq;
    for ax in &plan.axes {
        if !ax.drift.is_none() {
            return Err(invalid("drift", "the mathieu engine does not model frequency drift"));
        }
        let r = mp.radicand(ax.axis);
        if r <= 0.0 {
            return Err(Error::Untrapped {
                axis: ax.axis,
                radicand: r,
            });
        }
    }
    plan.axes
        .par_iter()
        .map(|ax| {
            let i = ax.axis.index();
            let (a, q) = (mp.a[i], mp.q[i]);
            let w_sec = 0.5 * wd * mp.radicand(ax.axis).sqrt();
            if q == 0.0 {
                let mut static_axis = ax.clone();
                static_axis.omega = w_sec;
                let mut p = plan.clone();
                p.engine = Engine::Secular;
                return run_secular_axis(&p, &static_axis).map(|ts| ts.with_meta("engine", "mathieu"));
            }
            run_axis(plan, ax, a, q, wd, w_sec)
        })
        .collect()
}

fn run_axis(plan: &SimPlan, ax: &AxisPlan, a: f64, q: f64, wd: f64, w_sec: f64) -> Result<TimeSeries> {
    let sub = plan
        .substeps(wd / TAU, STEPS_PER_DRIVE_PERIOD)?
        .max(plan.substeps(w_sec / TAU, STEPS_PER_SECULAR_PERIOD)?);
    let solver_rate = plan.output_rate * sub as f64;
    let h = 1.0 / solver_rate;
    let half = 0.5 * h;
    let n_out = plan.sample_count();
    let lp = plan.anti_alias(solver_rate, sub)?;
    let mut dec = Decimator::new(sub, lp.as_ref())?;

    let g = plan.gamma;
    let noise = ax.force_psd / (plan.mass * plan.mass);
    let c = (-g * h).exp();
    let sd = if g > 0.0 {
        (noise / (2.0 * g) * -(-2.0 * g * h).exp_m1()).sqrt()
    } else {
        (noise * h).sqrt()
    };

    let (mut x, mut v) = initial_state(plan, ax, w_sec)?;
    let mut reference = x.abs().max(v.abs() / w_sec);
    if noise > 0.0 && g > 0.0 {
        reference = reference.max((noise / (2.0 * g)).sqrt() / w_sec);
    }
    let limit = if reference > 0.0 {
        INSTABILITY_FACTOR * reference
    } else {
        f64::INFINITY
    };

    let k0 = 0.25 * wd * wd;
    let spring = |t: f64| k0 * (a + 2.0 * q * (wd * t).cos());
    let mut force = stream(plan.seed, ax.axis, Purpose::Force);
    let mut out = Vec::with_capacity(n_out);
    let mut step = 0u64;
    let mut k = spring(0.0);
    while out.len() < n_out {
        v -= half * k * x;
        x += half * v;
        v = c * v + if noise > 0.0 { sd * force.sample() } else { 0.0 };
        x += half * v;
        step += 1;
        let t = step as f64 * h;
        k = spring(t);
        v -= half * k * x;
        if x.abs() > limit || !x.is_finite() {
            return Err(Error::Unstable {
                axis: ax.axis,
                time: t,
                amplitude: x.abs(),
                limit,
            });
        }
        if let Some(y) = dec.push(x) {
            out.push(y);
        }
    }
    add_floor(plan, ax, &mut out);
    Ok(TimeSeries::new(plan.output_rate, 1.0 / plan.output_rate, out, ax.axis.label())?
        .with_meta("engine", "mathieu")
        .with_meta("seed", plan.seed)
        .with_meta("mathieu_a", a)
        .with_meta("mathieu_q", q)
        .with_meta("drive_rad_s", wd)
        .with_meta("gamma_rad_s", g)
        .with_meta("force_psd_n2_hz", ax.force_psd)
        .with_meta("mass_kg", plan.mass)
        .with_meta("solver_step_s", h)
        .with_meta("units", "m"))
}
