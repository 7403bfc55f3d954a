use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::series::{QuadratureSeries, TimeSeries};

/// Averaged periodogram. Values are one-sided (units²/Hz) unless
/// `zoom_center` is set, in which case they are the one-sided displacement
/// PSD reconstructed around the lock-in reference from its quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    pub segment_count: usize,
    pub segment_length: usize,
    pub window: &'static str,
    /// Equivalent noise bandwidth of one bin, Hz.
    pub equivalent_noise_bandwidth: f64,
    /// Number of independent periodograms the average is worth once
    /// segment overlap is accounted for; per-bin relative error is
    /// 1/√(effective_averages).
    pub effective_averages: f64,
    /// Σ over bin lags of the squared correlation between periodogram bins.
    /// Errors of parameters fitted across many bins scale with its square root.
    pub bin_correlation: f64,
    pub zoom_center: Option<f64>,
}

impl PsdEstimate {
    pub fn resolution(&self) -> f64 {
        if self.frequencies.len() < 2 {
            return f64::NAN;
        }
        self.frequencies[1] - self.frequencies[0]
    }

    /// Σ S·Δf over all bins.
    pub fn total_power(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.resolution()
    }

    /// Restricts to f_min ≤ f ≤ f_max.
    pub fn window_indices(&self, f_min: f64, f_max: f64) -> std::ops::Range<usize> {
        let lo = self.frequencies.partition_point(|&f| f < f_min);
        let hi = self.frequencies.partition_point(|&f| f <= f_max);
        lo..hi.max(lo)
    }
}

fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 * (1.0 - (TAU * i as f64 / n as f64).cos())).collect()
}

/// Welch variance reduction for `k` segments of window `win` spaced by
/// `step` samples: K / (1 + 2 Σ_j (1 − j/K) ρ(j·step)²).
fn effective_averages(win: &[f64], step: usize, k: usize) -> f64 {
    let n = win.len();
    let s2: f64 = win.iter().map(|w| w * w).sum();
    let mut denom = 1.0;
    for j in 1..k {
        let shift = j * step;
        if shift >= n {
            break;
        }
        let rho: f64 = (0..n - shift).map(|i| win[i] * win[i + shift]).sum::<f64>() / s2;
        denom += 2.0 * (1.0 - j as f64 / k as f64) * rho * rho;
    }
    k as f64 / denom
}

/// Σ_k |Σ_n w_n² e^{−2πikn/N}|² / (Σ w²)², the bin-to-bin correlation sum.
fn bin_correlation(win: &[f64]) -> f64 {
    let n = win.len();
    let mut buf: Vec<Complex64> = win.iter().map(|w| Complex64::new(w * w, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let s2 = buf[0].re;
    buf.iter().map(|c| c.norm_sqr()).sum::<f64>() / (s2 * s2)
}

fn segment_step(seg: usize, overlap: f64) -> usize {
    ((seg as f64 * (1.0 - overlap)).round() as usize).max(1)
}

fn segment_starts(len: usize, seg: usize, overlap: f64) -> Result<Vec<usize>> {
    if seg < 2 {
        return Err(invalid("segment_length", "must be >= 2"));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(invalid("overlap", format!("must be in [0, 1), got {overlap}")));
    }
    if len < seg {
        return Err(Error::RecordTooShort { len, segment: seg });
    }
    let step = segment_step(seg, overlap);
    Ok((0..=(len - seg) / step).map(|k| k * step).collect())
}

/// |FFT(w·z)|² of every segment, computed in parallel, in segment order.
fn segment_periodograms(
    fft: &Arc<dyn Fft<f64>>,
    win: &[f64],
    starts: &[usize],
    sample: impl Fn(usize) -> Complex64 + Sync,
) -> Vec<Vec<f64>> {
    let seg = win.len();
    starts
        .par_iter()
        .map(|&s| {
            let mut buf: Vec<Complex64> = (0..seg).map(|i| sample(s + i) * win[i]).collect();
            fft.process(&mut buf);
            buf.iter().map(|c| c.norm_sqr()).collect()
        })
        .collect()
}

/// Sum over segments of |FFT(w·z)|², reduced in segment order.
fn averaged_periodogram(fft: &Arc<dyn Fft<f64>>, win: &[f64], starts: &[usize], sample: impl Fn(usize) -> Complex64 + Sync) -> Vec<f64> {
    let parts = segment_periodograms(fft, win, starts, sample);
    let mut acc = vec![0.0; win.len()];
    for p in &parts {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    acc
}

/// Welch estimate of a real record plus the one-sided spectrum of each
/// segment (their mean is the estimate).
pub(crate) fn welch_with_segments(
    data: &[f64],
    sample_rate: f64,
    segment_length: usize,
    overlap: f64,
) -> Result<(PsdEstimate, Vec<Vec<f64>>)> {
    crate::error::require_positive("sample_rate", sample_rate)?;
    let starts = segment_starts(data.len(), segment_length, overlap)?;
    let n = segment_length;
    let win = hann(n);
    let s2: f64 = win.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let half = n / 2;
    let scale = 1.0 / (sample_rate * s2);
    let parts: Vec<Vec<f64>> = segment_periodograms(&fft, &win, &starts, |i| Complex64::new(data[i], 0.0))
        .into_iter()
        .map(|p| {
            p[..=half]
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let one_sided = if i == 0 || (n % 2 == 0 && i == half) { 1.0 } else { 2.0 };
                    one_sided * v * scale
                })
                .collect()
        })
        .collect();
    let k = parts.len();
    let values = (0..=half).map(|i| parts.iter().map(|p| p[i]).sum::<f64>() / k as f64).collect();
    let df = sample_rate / n as f64;
    let s1: f64 = win.iter().sum();
    let est = PsdEstimate {
        frequencies: (0..=half).map(|i| i as f64 * df).collect(),
        values,
        segment_count: k,
        segment_length: n,
        window: "hann",
        equivalent_noise_bandwidth: sample_rate * s2 / (s1 * s1),
        effective_averages: effective_averages(&win, segment_step(n, overlap), k),
        bin_correlation: bin_correlation(&win),
        zoom_center: None,
    };
    Ok((est, parts))
}

impl PsdEstimate {
    /// The same estimate averaged over a subset of its segments.
    pub(crate) fn from_segments(&self, parts: &[&Vec<f64>]) -> PsdEstimate {
        let k = parts.len() as f64;
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            *v = parts.iter().map(|p| p[i]).sum::<f64>() / k;
        }
        out.effective_averages *= k / self.segment_count as f64;
        out.segment_count = parts.len();
        out
    }
}

/// Welch estimate of a real record: Hann window, overlapped segments,
/// one-sided in Hz. The mean is not removed.
pub fn welch_psd(data: &[f64], sample_rate: f64, segment_length: usize, overlap: f64) -> Result<PsdEstimate> {
    Ok(welch_with_segments(data, sample_rate, segment_length, overlap)?.0)
}

pub fn welch_timeseries(ts: &TimeSeries, segment_length: usize, overlap: f64) -> Result<PsdEstimate> {
    welch_psd(&ts.values, ts.sample_rate, segment_length, overlap)
}

/// Displacement PSD around f_LO rebuilt from quadratures. With
/// u = Re[(X − iY)e^{iω_LO t}], the one-sided displacement PSD at
/// f_LO + δ equals half the two-sided PSD of X − iY at δ. Bins at or below
/// zero absolute frequency are dropped.
pub fn zoom_psd(q: &QuadratureSeries, segment_length: usize, overlap: f64) -> Result<PsdEstimate> {
    let starts = segment_starts(q.len(), segment_length, overlap)?;
    let n = segment_length;
    let fs = q.sample_rate;
    let win = hann(n);
    let s2: f64 = win.iter().map(|w| w * w).sum();
    let s1: f64 = win.iter().sum();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let acc = averaged_periodogram(&fft, &win, &starts, |i| Complex64::new(q.x[i], -q.y[i]));
    let k = starts.len();
    let scale = 0.5 / (fs * s2 * k as f64);
    let df = fs / n as f64;
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let m = if i <= (n - 1) / 2 { i as f64 } else { i as f64 - n as f64 };
            (q.f_lo + m * df, acc[i] * scale)
        })
        .filter(|(f, _)| *f > 0.0)
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(PsdEstimate {
        frequencies: pairs.iter().map(|p| p.0).collect(),
        values: pairs.iter().map(|p| p.1).collect(),
        segment_count: k,
        segment_length: n,
        window: "hann",
        equivalent_noise_bandwidth: fs * s2 / (s1 * s1),
        effective_averages: effective_averages(&win, segment_step(n, overlap), k),
        bin_correlation: bin_correlation(&win),
        zoom_center: Some(q.f_lo),
    })
}

/// Copy of `v` with its mean removed.
pub fn demean(v: &[f64]) -> Vec<f64> {
    let m = crate::series::mean(v);
    v.iter().map(|x| x - m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::rng::stream_id;
    use approx::assert_relative_eq;

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut g = stream_id(seed, 99);
        (0..n).map(|_| g.sample()).collect()
    }

    #[test]
    fn white_noise_is_flat_at_two_over_fs() {
        let fs = 100.0;
        let p = welch_psd(&white(1 << 18, 1), fs, 1024, 0.5).unwrap();
        let mid = &p.values[10..500];
        let avg = mid.iter().sum::<f64>() / mid.len() as f64;
        assert_relative_eq!(avg, 2.0 / fs, max_relative = 0.01);
        assert_relative_eq!(p.total_power(), 1.0, max_relative = 0.05);
        assert_relative_eq!(p.equivalent_noise_bandwidth, 1.5 * fs / 1024.0, max_relative = 1e-12);
    }

    #[test]
    fn tone_power_is_half_amplitude_squared() {
        let (fs, a) = (1000.0, 2.0);
        let x: Vec<f64> = (0..100_000).map(|i| a * (TAU * 123.4 * i as f64 / fs).cos()).collect();
        let p = welch_psd(&x, fs, 4096, 0.5).unwrap();
        let r = p.window_indices(113.0, 133.0);
        let power: f64 = p.values[r].iter().sum::<f64>() * p.resolution();
        assert_relative_eq!(power, a * a / 2.0, max_relative = 0.02);
    }

    #[test]
    fn zoom_matches_direct_spectrum_of_carrier() {
        // tone at f_LO + 1.5 Hz with amplitude A: X = A cos, Y = −A sin of 2π·1.5·t
        let (fs, a, d) = (64.0, 3.0, 1.5);
        let n = 1 << 16;
        let x = (0..n).map(|i| a * (TAU * d * i as f64 / fs).cos()).collect();
        let y = (0..n).map(|i| -a * (TAU * d * i as f64 / fs).sin()).collect();
        let q = QuadratureSeries::new(fs, 0.0, x, y, 300.0, "x").unwrap();
        let p = zoom_psd(&q, 2048, 0.5).unwrap();
        let r = p.window_indices(300.5, 302.5);
        let power: f64 = p.values[r].iter().sum::<f64>() * p.resolution();
        assert_relative_eq!(power, a * a / 2.0, max_relative = 0.02);
        let mirror = p.window_indices(297.5, 299.5);
        assert!(p.values[mirror].iter().sum::<f64>() * p.resolution() < 1e-6);
    }

    #[test]
    fn hann_correlation_constants() {
        let w = hann(1024);
        // adjacent bins correlate as (2/3)², next as (1/6)²
        assert_relative_eq!(bin_correlation(&w), 1.0 + 2.0 * (4.0 / 9.0 + 1.0 / 36.0), max_relative = 1e-9);
        // 50% overlap: ρ = 1/6 for Hann
        let k = 1000;
        let want = k as f64 / (1.0 + 2.0 * (1.0 - 1.0 / k as f64) / 36.0);
        assert_relative_eq!(effective_averages(&w, 512, k), want, max_relative = 1e-4);
    }

    #[test]
    fn too_short_is_an_error() {
        assert!(matches!(welch_psd(&[0.0; 10], 1.0, 16, 0.5), Err(Error::RecordTooShort { .. })));
        assert!(welch_psd(&[0.0; 10], 1.0, 4, 1.0).is_err());
    }
}
