use super::rng::stream_id;
use super::secular::add_white;
use crate::error::{require_non_negative, require_positive, Result};
use crate::filter::{decimate, integer_ratio, LowPass};
use crate::series::TimeSeries;

/// Camera model: anti-aliased decimation to `camera_rate`, a white
/// displacement floor of one-sided PSD `noise_floor` (m²/Hz), and optional
/// quantisation to the pixel pitch (brightest-pixel readout).
///
/// With unit decimation, zero floor and no pixel the input is returned
/// unchanged.
pub fn apply_measurement(ts: &TimeSeries, camera_rate: f64, noise_floor: f64, pixel_size: Option<f64>, seed: u64) -> Result<TimeSeries> {
    require_non_negative("noise_floor", noise_floor)?;
    let factor = integer_ratio(ts.sample_rate, camera_rate, "camera_rate")?;
    if factor == 1 && noise_floor == 0.0 && pixel_size.is_none() {
        return Ok(ts.clone());
    }
    let mut values = if factor == 1 {
        ts.values.clone()
    } else {
        let lp = LowPass::new(4, 0.4 * camera_rate, ts.sample_rate)?;
        decimate(&ts.values, factor, Some(&lp))?
    };
    if noise_floor > 0.0 {
        let sd = (0.5 * noise_floor * camera_rate).sqrt();
        add_white(&mut stream_id(seed, 0x6361_6d65_7261), sd, &mut values);
    }
    if let Some(p) = pixel_size {
        require_positive("pixel_size", p)?;
        for v in values.iter_mut() {
            *v = (*v / p).round() * p;
        }
    }
    let t0 = ts.t0 + (factor - 1) as f64 / ts.sample_rate;
    let mut out = TimeSeries::new(camera_rate, t0, values, ts.axis.clone())?;
    out.metadata = ts.metadata.clone();
    Ok(out
        .with_meta("camera_rate_hz", camera_rate)
        .with_meta("noise_floor_m2_hz", noise_floor)
        .with_meta("pixel_size_m", pixel_size.map_or("none".to_string(), |p| p.to_string())))
}
