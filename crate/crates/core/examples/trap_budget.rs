//! Mathieu parameters, secular frequencies and a force-noise budget for a
//! charged silica sphere in a linear Paul trap.

use std::f64::consts::TAU;

use levlw::trapphys::{
    gas_damping, mathieu_params, noise_budget, secular_frequencies, stability_check, voltage_noise_force_psd, GasEnvironment, ParticleSpec,
    TrapConfig,
};
use levlw::Axis;

fn main() -> levlw::Result<()> {
    let particle = ParticleSpec::silica(231e-9)?.with_mass(9.6e-17)?.with_charge_count(500);
    let trap = TrapConfig {
        r_o: 1.1e-3,
        z_o: 3.5e-3,
        eta_ac: 0.3,
        kappa_dc: 0.08,
        u_dc: 20.0,
        v_ac: 300.0,
        drive_angular_freq: TAU * 3000.0,
    };
    let mp = mathieu_params(&trap, &particle)?;
    let report = stability_check(&mp);
    println!("a = {:?}\nq = {:?}", mp.a, mp.q);
    println!(
        "trapped on all axes: {}, pseudopotential valid: {}",
        report.all_trapped(),
        report.pseudo_potential_valid
    );

    let w = secular_frequencies(&mp, trap.drive_angular_freq)?;
    for ax in Axis::ALL {
        println!("{ax}: {:.2} Hz", w[ax.index()] / TAU);
    }

    let gas = GasEnvironment::nitrogen_mbar(1e-7, 293.0)?;
    println!("gas damping at 1e-7 mbar: {:.3e} Hz", gas_damping(&particle, &gas) / TAU);

    let electrode = voltage_noise_force_psd(particle.charge_count(), 1e-14, trap.r_o)?;
    let budget = noise_budget(&[("electrode voltage".into(), electrode)], &particle, w[0], &gas)?;
    for e in &budget.entries {
        println!(
            "{:<28} S_F = {:.3e} N^2/Hz  heating {:.3e} quanta/s",
            e.label, e.force_psd, e.heating_rate
        );
    }
    println!("excess equals thermal at {:.3e} mbar", budget.three_db_pressure_mbar());
    Ok(())
}
