//! Linewidth against pressure and the resulting bound on excess damping.

use std::f64::consts::TAU;

use levlw::pipeline::auto_segment;
use levlw::simulate::{simulate_quadrature, AxisPlan, Engine, SimPlan};
use levlw::specfit::{fit_r2_record, linewidth_vs_pressure, PressurePoint, R2Guess};
use levlw::trapphys::{gas_damping, thermal_force_psd, GasEnvironment, ParticleSpec};
use levlw::Axis;

fn main() -> levlw::Result<()> {
    let particle = ParticleSpec::silica(231e-9)?.with_mass(9.6e-17)?;
    let m = particle.mass();
    let mut points = Vec::new();
    for (k, p) in [2e-5, 4e-5, 6e-5, 8e-5, 1e-4].into_iter().enumerate() {
        let gamma = gas_damping(&particle, &GasEnvironment::nitrogen_mbar(p, 293.0)?);
        let plan = SimPlan::new(Engine::Quadrature, 4e4, 2.0, m, gamma)
            .with_seed(100 + k as u64)
            .with_axis(AxisPlan::new(Axis::X, TAU * 327.0, thermal_force_psd(293.0, m, gamma)));
        let q = &simulate_quadrature(&plan)?[0];
        let seg = auto_segment(q.sample_rate, gamma / TAU, q.len())?;
        let (_, fit) = fit_r2_record(&q.r_squared(), q.sample_rate, seg, 0.5, R2Guess::default(), None)?;
        println!("{p:.1e} mbar: {:.2} +/- {:.2} mHz", fit.gamma_hz * 1e3, fit.gamma_err_hz * 1e3);
        points.push(PressurePoint {
            pressure_mbar: p,
            gamma_hz: fit.gamma_hz,
            sigma_hz: fit.gamma_err_hz,
        });
    }
    let line = linewidth_vs_pressure(&points, 0.95)?;
    println!("slope {:.1} +/- {:.1} Hz/mbar", line.slope, line.slope_err());
    println!("excess {:.2e} +/- {:.2e} Hz", line.intercept, line.intercept_err());
    println!(
        "95% upper limit {:.2e} Hz (one-sided {:.2e} Hz)",
        line.intercept_upper, line.intercept_upper_one_sided
    );
    Ok(())
}
