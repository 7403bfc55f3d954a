//! Demodulates a thermal record with the lock-in and checks that the
//! amplitude follows a Rayleigh distribution.

use std::f64::consts::TAU;

use levlw::demod::{amplitude, lockin, rayleigh_pdf, rayleigh_stats, LockinConfig};
use levlw::simulate::{simulate_secular, AxisPlan, Engine, SimPlan};
use levlw::specfit::effective_samples;
use levlw::trapphys::{thermal_force_psd, thermal_variance};
use levlw::Axis;

fn main() -> levlw::Result<()> {
    let (m, t, f0) = (9.6e-17, 293.0, 327.0);
    let gamma = TAU * 0.5;
    let plan = SimPlan::new(Engine::Secular, 2000.0, 5000.0, m, gamma)
        .with_seed(7)
        .with_axis(AxisPlan::new(Axis::X, TAU * f0, thermal_force_psd(t, m, gamma)));
    let ts = &simulate_secular(&plan)?[0];

    let cfg = LockinConfig::new(f0, 50.0).with_decimation(20).with_expected_linewidth(0.5);
    let q = lockin(ts, &cfg)?;
    let (r, _) = amplitude(&q);
    let n_eff = effective_samples(q.duration(), Some(gamma), r.len());
    let stats = rayleigh_stats(&r, Some(n_eff), 30)?;
    println!("{} samples, ~{n_eff:.0} independent", stats.n);
    println!(
        "sigma from mean {:.4e} m, from variance {:.4e} m, thermal {:.4e} m",
        stats.sigma_from_mean,
        stats.sigma_from_var,
        thermal_variance(t, m, TAU * f0).sqrt()
    );
    println!(
        "relative difference {:.4} (expected ~{:.4})",
        stats.relative_difference, stats.expected_relative_difference
    );
    for b in stats.histogram.iter().step_by(5) {
        println!(
            "r = {:.3e}  density {:.3e}  pdf {:.3e}",
            b.center,
            b.density,
            rayleigh_pdf(b.center, stats.sigma())
        );
    }
    Ok(())
}
