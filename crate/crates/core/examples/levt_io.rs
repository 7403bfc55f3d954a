//! Writes a record in the LEVT binary format and reads it back.

use std::f64::consts::TAU;

use levlw::io::{decode_levt, encode_levt, read_levt, write_levt, LevtRecord};
use levlw::simulate::{simulate_secular, AxisPlan, Engine, SimPlan};
use levlw::trapphys::thermal_force_psd;
use levlw::Axis;

fn main() -> levlw::Result<()> {
    let (m, gamma) = (9.6e-17, TAU);
    let plan = SimPlan::new(Engine::Secular, 1.0, 2000.0, m, gamma)
        .with_seed(1)
        .with_axis(AxisPlan::new(Axis::Z, TAU * 80.0, thermal_force_psd(293.0, m, gamma)));
    let ts = &simulate_secular(&plan)?[0];

    let bytes = encode_levt(ts);
    let channels = decode_levt(&bytes)?;
    println!(
        "{} bytes, {} channel(s): {} at {} Hz",
        bytes.len(),
        channels.len(),
        channels[0].label,
        channels[0].sample_rate
    );

    let dir = std::env::temp_dir().join("levt_io_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("z.levt");
    write_levt(&path, ts)?;
    match read_levt(&path, 80.0)? {
        LevtRecord::Displacement(back) => println!("round trip exact: {}", back.values == ts.values),
        LevtRecord::Quadrature(_) => println!("unexpected quadrature record"),
    }
    Ok(())
}
