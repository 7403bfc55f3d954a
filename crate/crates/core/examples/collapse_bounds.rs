//! Exclusion regions for dissipative CSL and DP from a damping bound.

use levlw::collapse::{exclusion_map, exclusion_scan, gamma_ddp, DdpParams, GridAxis, GridModel, MeasuredBound, Variant};
use levlw::trapphys::ParticleSpec;

fn main() -> levlw::Result<()> {
    let particle = ParticleSpec::silica(231e-9)?.with_mass(9.6e-17)?;
    let bound = MeasuredBound::new(48e-6, 0.95)?;

    let r_c = GridAxis::log_spaced("r_c_m", 1e-9, 1e-3, 60)?;
    let lambda = GridAxis::log_spaced("lambda_per_s", 1e-20, 1e-4, 60)?;
    let model = GridModel::Dcsl {
        temperature: 1e-7,
        variant: Variant::Sphere,
    };
    let grid = exclusion_map(&model, &r_c, &lambda, &particle, &bound)?;
    println!("dCSL: {} of {} cells excluded", grid.excluded_count(), grid.cell_count());
    if let Some(b) = grid.boundary_minimum() {
        println!("lowest excluded lambda {:.2e} /s at r_C = {:.2e} m", b.axis2, b.axis1);
    }

    let r0: Vec<f64> = (0..=400).map(|i| 10f64.powf(-18.0 + 16.0 * i as f64 / 400.0)).collect();
    let intervals = exclusion_scan(&r0, &bound, |x| {
        Ok(gamma_ddp(&particle, &DdpParams::new(x, 2.7)?, true)? / std::f64::consts::TAU)
    })?;
    for iv in intervals {
        println!("dDP at 2.7 K excludes R0 in [{:.2e}, {:.2e}] m", iv.lo, iv.hi);
    }
    Ok(())
}
