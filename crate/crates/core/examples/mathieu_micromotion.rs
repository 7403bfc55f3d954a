//! Full Mathieu dynamics with micromotion, compared against the
//! pseudopotential secular frequency.

use std::f64::consts::TAU;

use levlw::simulate::{simulate_mathieu, AxisPlan, Engine, SimPlan};
use levlw::specfit::welch_timeseries;
use levlw::trapphys::{mathieu_params, secular_frequency, thermal_force_psd, ParticleSpec, TrapConfig};
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
    let w = secular_frequency(&mp, trap.drive_angular_freq, Axis::X)?;
    let (m, gamma) = (particle.mass(), TAU * 0.2);
    let plan = SimPlan::new(Engine::Mathieu, 20.0, 20_000.0, m, gamma)
        .with_seed(5)
        .with_axis(AxisPlan::new(Axis::X, w, thermal_force_psd(293.0, m, gamma)));
    let ts = &simulate_mathieu(&plan, &trap, &particle)?[0];

    let psd = welch_timeseries(ts, 1 << 16, 0.5)?;
    let (mut best, mut peak) = (0.0, 0.0);
    for (f, v) in psd.frequencies.iter().zip(&psd.values) {
        if *f > 10.0 && *f < 1000.0 && *v > peak {
            (best, peak) = (*f, *v);
        }
    }
    println!("q_x = {:.3}, a_x = {:.4}", mp.q[0], mp.a[0]);
    println!("pseudopotential {:.2} Hz, simulated peak {:.2} Hz", w / TAU, best);
    Ok(())
}
