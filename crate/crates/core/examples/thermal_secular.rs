//! Thermal motion in the secular approximation, checked against
//! equipartition and fitted in the displacement spectrum.

use std::f64::consts::TAU;

use levlw::simulate::{simulate_secular, AxisPlan, Engine, SimPlan};
use levlw::specfit::{fit_displacement_psd, temperature_from_displacement, welch_timeseries, DisplacementGuess};
use levlw::trapphys::thermal_force_psd;
use levlw::Axis;

fn main() -> levlw::Result<()> {
    let (m, t) = (9.6e-17, 293.0);
    let gamma = TAU * 1.0;
    let w = TAU * 327.0;
    let plan = SimPlan::new(Engine::Secular, 200.0, 5000.0, m, gamma)
        .with_seed(42)
        .with_anti_alias(None)
        .with_axis(AxisPlan::new(Axis::X, w, thermal_force_psd(t, m, gamma)));
    let ts = &simulate_secular(&plan)?[0];

    let temp = temperature_from_displacement(ts, m, w, Some(gamma))?;
    println!("equipartition: T = {:.1} +/- {:.1} K", temp.temperature, temp.stderr);

    let psd = welch_timeseries(ts, 32768, 0.5)?;
    let fit = fit_displacement_psd(&psd, m, DisplacementGuess::default(), None)?;
    println!(
        "spectrum: f0 = {:.3} Hz, gamma = {:.3} +/- {:.3} Hz, T = {:.0} K",
        fit.omega0 / TAU,
        fit.gamma_hz(),
        fit.gamma_err_hz(),
        fit.temperature
    );
    Ok(())
}
