//! Linewidth from the spectrum of R² at 1e-4 mbar, with a slow frequency
//! drift that would smear a displacement-spectrum fit.

use std::f64::consts::TAU;

use levlw::pipeline::auto_segment;
use levlw::simulate::{simulate_quadrature, AxisPlan, DriftProfile, Engine, SimPlan};
use levlw::specfit::{fit_r2_record, R2Guess};
use levlw::trapphys::{gas_damping, thermal_force_psd, GasEnvironment, ParticleSpec};
use levlw::Axis;

fn main() -> levlw::Result<()> {
    let particle = ParticleSpec::silica(231e-9)?.with_mass(9.6e-17)?;
    let gas = GasEnvironment::nitrogen_mbar(1e-4, 293.0)?;
    let gamma = gas_damping(&particle, &gas);
    let m = particle.mass();
    let sf = thermal_force_psd(293.0, m, gamma);

    for (label, drift) in [
        ("steady", DriftProfile::none()),
        ("drifting", DriftProfile::sinusoidal(TAU * 5.0, 3600.0)),
    ] {
        let plan = SimPlan::new(Engine::Quadrature, 5e4, 2.0, m, gamma)
            .with_seed(3)
            .with_axis(AxisPlan::new(Axis::X, TAU * 327.0, sf).with_drift(drift));
        let q = &simulate_quadrature(&plan)?[0];
        let seg = auto_segment(q.sample_rate, gamma / TAU, q.len())?;
        let (_, fit) = fit_r2_record(&q.r_squared(), q.sample_rate, seg, 0.5, R2Guess::default(), None)?;
        println!(
            "{label:>8}: gamma = {:.2} +/- {:.2} mHz (gas {:.2} mHz), reduced chi2 {:.2}",
            fit.gamma_hz * 1e3,
            fit.gamma_err_hz * 1e3,
            gamma / TAU * 1e3,
            fit.reduced_chi2
        );
    }
    Ok(())
}
