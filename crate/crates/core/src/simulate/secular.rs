use rayon::prelude::*;

use super::rng::{stream, Gaussian, Purpose};
use super::{check_trapped, AxisPlan, Engine, Initial, SimPlan, STEPS_PER_SECULAR_PERIOD};
use crate::constants::rad_to_hz;
use crate::error::{invalid, Result};
use crate::filter::Decimator;
use crate::series::TimeSeries;

/// Integrates ẍ + γẋ + ω(t)²x = F/m on every planned axis.
pub fn simulate_secular(plan: &SimPlan) -> Result<Vec<TimeSeries>> {
    plan.validate()?;
    plan.require_engine(Engine::Secular)?;
    plan.axes.par_iter().map(|a| run_axis(plan, a)).collect()
}

pub(super) fn run_axis(plan: &SimPlan, ax: &AxisPlan) -> Result<TimeSeries> {
    let fastest = rad_to_hz(ax.omega + ax.drift.max_excursion(plan.duration));
    let substeps = plan.substeps(fastest, STEPS_PER_SECULAR_PERIOD)?;
    let solver_rate = plan.output_rate * substeps as f64;
    let h = 1.0 / solver_rate;
    let n_out = plan.sample_count();
    let lp = plan.anti_alias(solver_rate, substeps)?;
    let mut dec = Decimator::new(substeps, lp.as_ref())?;

    let noise = ax.force_psd / (plan.mass * plan.mass);
    let (mut x, mut v) = initial_state(plan, ax, ax.omega + ax.drift.delta(0.0))?;
    let mut force = stream(plan.seed, ax.axis, Purpose::Force);
    let mut out = Vec::with_capacity(n_out);

    if ax.drift.is_none() {
        let phi = transition(ax.omega, plan.gamma, h);
        let l = cholesky2(step_covariance(ax.omega, plan.gamma, h, noise));
        while out.len() < n_out {
            let xn = phi[0][0] * x + phi[0][1] * v;
            let vn = phi[1][0] * x + phi[1][1] * v;
            if noise > 0.0 {
                let (z1, z2) = (force.sample(), force.sample());
                x = xn + l[0] * z1;
                v = vn + l[1] * z1 + l[2] * z2;
            } else {
                x = xn;
                v = vn;
            }
            if let Some(y) = dec.push(x) {
                out.push(y);
            }
        }
    } else {
        let g = plan.gamma;
        let c = (-g * h).exp();
        let sd = if g > 0.0 {
            (noise / (2.0 * g) * -(-2.0 * g * h).exp_m1()).sqrt()
        } else {
            (noise * h).sqrt()
        };
        let half = 0.5 * h;
        let mut step = 0u64;
        let mut w = ax.omega + ax.drift.delta(0.0);
        check_trapped(ax.axis, w, 0.0)?;
        let mut w2 = w * w;
        while out.len() < n_out {
            v -= half * w2 * x;
            x += half * v;
            v = c * v + if noise > 0.0 { sd * force.sample() } else { 0.0 };
            x += half * v;
            step += 1;
            let t = step as f64 * h;
            w = ax.omega + ax.drift.delta(t);
            check_trapped(ax.axis, w, t)?;
            w2 = w * w;
            v -= half * w2 * x;
            if let Some(y) = dec.push(x) {
                out.push(y);
            }
        }
    }

    add_floor(plan, ax, &mut out);
    Ok(TimeSeries::new(plan.output_rate, 1.0 / plan.output_rate, out, ax.axis.label())?
        .with_meta("engine", "secular")
        .with_meta("seed", plan.seed)
        .with_meta("omega_rad_s", ax.omega)
        .with_meta("gamma_rad_s", plan.gamma)
        .with_meta("force_psd_n2_hz", ax.force_psd)
        .with_meta("mass_kg", plan.mass)
        .with_meta("solver_step_s", h)
        .with_meta("units", "m"))
}

pub(super) fn initial_state(plan: &SimPlan, ax: &AxisPlan, omega0: f64) -> Result<(f64, f64)> {
    match ax.initial {
        Initial::Fixed(x, v) => Ok((x, v)),
        Initial::Stationary if ax.force_psd == 0.0 => Ok((0.0, 0.0)),
        Initial::Stationary => {
            if plan.gamma <= 0.0 {
                return Err(invalid("initial", "no stationary state without damping; give a fixed start"));
            }
            let var_v = ax.force_psd / (2.0 * plan.mass * plan.mass * plan.gamma);
            let var_x = var_v / (omega0 * omega0);
            let mut g = stream(plan.seed, ax.axis, Purpose::Initial);
            Ok((var_x.sqrt() * g.sample(), var_v.sqrt() * g.sample()))
        }
    }
}

pub(super) fn add_floor(plan: &SimPlan, ax: &AxisPlan, out: &mut [f64]) {
    if plan.measurement_noise_floor > 0.0 {
        let sd = (0.5 * plan.measurement_noise_floor * plan.output_rate).sqrt();
        add_white(&mut stream(plan.seed, ax.axis, Purpose::Measurement), sd, out);
    }
}

pub(super) fn add_white(g: &mut Gaussian, sd: f64, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v += sd * g.sample();
    }
}

/// State transition matrix of (x, v) over a step h.
pub(crate) fn transition(omega: f64, gamma: f64, h: f64) -> [[f64; 2]; 2] {
    let disc = omega * omega - 0.25 * gamma * gamma;
    let (c, s) = if disc > 0.0 {
        let wd = disc.sqrt();
        ((wd * h).cos(), (wd * h).sin() / wd)
    } else if disc < 0.0 {
        let wd = (-disc).sqrt();
        ((wd * h).cosh(), (wd * h).sinh() / wd)
    } else {
        (1.0, h)
    };
    let e = (-0.5 * gamma * h).exp();
    let hg = 0.5 * gamma;
    [[e * (c + hg * s), e * s], [-e * omega * omega * s, e * (c - hg * s)]]
}

// 8-point Gauss-Legendre on [-1, 1]
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Covariance [Qxx, Qxv, Qvv] accumulated over one step by velocity noise
/// of intensity `noise` (m²/s³).
pub(crate) fn step_covariance(omega: f64, gamma: f64, h: f64, noise: f64) -> [f64; 3] {
    if noise == 0.0 {
        return [0.0; 3];
    }
    let panels = ((h * omega.max(gamma)) / 0.5).ceil().max(1.0) as usize;
    let w = h / panels as f64;
    let mut q = [0.0; 3];
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * w;
        for (&xi, &wi) in GL_X.iter().zip(&GL_W) {
            for s in [mid - 0.5 * w * xi, mid + 0.5 * w * xi] {
                let phi = transition(omega, gamma, s);
                let (a, b) = (phi[0][1], phi[1][1]);
                let ww = 0.5 * w * wi;
                q[0] += ww * a * a;
                q[1] += ww * a * b;
                q[2] += ww * b * b;
            }
        }
    }
    q.map(|v| v * noise)
}

/// Lower Cholesky factor [L11, L21, L22] of a 2×2 covariance.
pub(crate) fn cholesky2(q: [f64; 3]) -> [f64; 3] {
    if q[0] <= 0.0 {
        return [0.0, 0.0, q[2].max(0.0).sqrt()];
    }
    let l11 = q[0].sqrt();
    let l21 = q[1] / l11;
    [l11, l21, (q[2] - l21 * l21).max(0.0).sqrt()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Axis;
    use crate::simulate::{AxisPlan, DriftProfile, Initial};
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    #[test]
    fn transition_composes() {
        let (w, g, h) = (2000.0, 3.0, 1e-4);
        let a = transition(w, g, h);
        let b = transition(w, g, 2.0 * h);
        let aa = [
            [a[0][0] * a[0][0] + a[0][1] * a[1][0], a[0][0] * a[0][1] + a[0][1] * a[1][1]],
            [a[1][0] * a[0][0] + a[1][1] * a[1][0], a[1][0] * a[0][1] + a[1][1] * a[1][1]],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(aa[i][j], b[i][j], max_relative = 1e-12, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn step_covariance_matches_lyapunov_identity() {
        // Q = P - Φ P Φᵀ with P the stationary covariance
        let (w, g, h, d) = (500.0, 40.0, 3e-3, 7.0);
        let q = step_covariance(w, g, h, d);
        let p = [d / (2.0 * g * w * w), 0.0, d / (2.0 * g)];
        let f = transition(w, g, h);
        let fp = [[f[0][0] * p[0], f[0][1] * p[2]], [f[1][0] * p[0], f[1][1] * p[2]]];
        let want = [
            p[0] - (fp[0][0] * f[0][0] + fp[0][1] * f[0][1]),
            -(fp[0][0] * f[1][0] + fp[0][1] * f[1][1]),
            p[2] - (fp[1][0] * f[1][0] + fp[1][1] * f[1][1]),
        ];
        for k in 0..3 {
            assert_relative_eq!(q[k], want[k], max_relative = 1e-9);
        }
    }

    #[test]
    fn noiseless_ringdown_matches_closed_form() {
        let (w, g, x0) = (TAU * 327.0, 2.0, 1e-6);
        let plan = SimPlan::new(Engine::Secular, 2.0, 16_350.0, 1e-17, g)
            .with_anti_alias(None)
            .with_axis(AxisPlan::new(Axis::X, w, 0.0).with_initial(Initial::Fixed(x0, 0.0)));
        let ts = &simulate_secular(&plan).unwrap()[0];
        let wd = (w * w - 0.25 * g * g).sqrt();
        let mut worst = 0.0f64;
        for (i, &x) in ts.values.iter().enumerate() {
            let t = ts.time(i);
            let want = (-0.5 * g * t).exp() * x0 * ((wd * t).cos() + 0.5 * g / wd * (wd * t).sin());
            worst = worst.max((x - want).abs());
        }
        assert!(worst < 1e-9 * x0, "max deviation {worst:e}");
    }

    #[test]
    fn drifting_frequency_goes_untrapped() {
        let plan = SimPlan::new(Engine::Secular, 1.0, 1000.0, 1e-17, 1.0).with_axis(
            AxisPlan::new(Axis::Y, 100.0, 0.0)
                .with_initial(Initial::Fixed(1e-6, 0.0))
                .with_drift(DriftProfile::linear(-200.0)),
        );
        match simulate_secular(&plan) {
            Err(crate::Error::UntrappedAt { axis, time }) => {
                assert_eq!(axis, Axis::Y);
                assert!((time - 0.5).abs() < 1e-3, "{time}");
            }
            other => panic!("{other:?}"),
        }
    }
}
