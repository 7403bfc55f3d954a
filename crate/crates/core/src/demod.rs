//! Numerical lock-in amplifier and amplitude statistics.

use std::f64::consts::{PI, TAU};

use crate::error::{invalid, require_positive, Result};
use crate::filter::LowPass;
use crate::series::{mean, variance, QuadratureSeries, TimeSeries};

pub const DEFAULT_FILTER_ORDER: usize = 4;

/// Fewer effective samples than this make the Rayleigh estimates unreliable.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockinConfig {
    /// Reference frequency f_LO, Hz.
    pub f_lo: f64,
    pub filter_order: usize,
    /// -3 dB frequency of the whole low-pass cascade, Hz.
    pub cutoff: f64,
    pub decimation: usize,
    /// Linewidth γ/2π the cutoff must comfortably exceed, Hz.
    pub expected_linewidth: Option<f64>,
    /// Drop the first `settling_time` seconds of output.
    pub discard_settling: bool,
}

impl LockinConfig {
    pub fn new(f_lo: f64, cutoff: f64) -> Self {
        Self {
            f_lo,
            filter_order: DEFAULT_FILTER_ORDER,
            cutoff,
            decimation: 1,
            expected_linewidth: None,
            discard_settling: true,
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.filter_order = order;
        self
    }

    pub fn with_decimation(mut self, factor: usize) -> Self {
        self.decimation = factor;
        self
    }

    pub fn with_expected_linewidth(mut self, hz: f64) -> Self {
        self.expected_linewidth = Some(hz);
        self
    }

    pub fn keep_settling(mut self) -> Self {
        self.discard_settling = false;
        self
    }

    pub fn settling_time(&self) -> f64 {
        5.0 / self.cutoff
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        require_positive("f_lo", self.f_lo)?;
        require_positive("cutoff", self.cutoff)?;
        if self.f_lo >= 0.5 * sample_rate {
            return Err(invalid(
                "f_lo",
                format!("{} Hz is above the Nyquist frequency {} Hz", self.f_lo, 0.5 * sample_rate),
            ));
        }
        if self.cutoff >= self.f_lo {
            return Err(invalid(
                "cutoff",
                format!("{} Hz must be below f_lo = {} Hz", self.cutoff, self.f_lo),
            ));
        }
        if self.filter_order == 0 {
            return Err(invalid("filter_order", "must be >= 1"));
        }
        if self.decimation == 0 {
            return Err(invalid("decimation", "must be >= 1"));
        }
        let out_rate = sample_rate / self.decimation as f64;
        if out_rate < 4.0 * self.cutoff {
            return Err(invalid(
                "decimation",
                format!("output rate {out_rate} Hz is below 4 x cutoff ({} Hz)", 4.0 * self.cutoff),
            ));
        }
        if let Some(g) = self.expected_linewidth {
            if self.cutoff < 10.0 * g {
                return Err(invalid(
                    "cutoff",
                    format!("{} Hz is less than 10 x the expected linewidth {g} Hz", self.cutoff),
                ));
            }
        }
        Ok(())
    }
}

/// Demodulates `ts` at `cfg.f_lo`: X = 2·LP(u cos 2πf t), Y = 2·LP(u sin 2πf t),
/// then keeps every `decimation`-th sample. A tone A cos(2πf_LO t + φ) gives
/// X = A cos φ and Y = −A sin φ once the filter has settled.
pub fn lockin(ts: &TimeSeries, cfg: &LockinConfig) -> Result<QuadratureSeries> {
    cfg.validate(ts.sample_rate)?;
    let lp = LowPass::new(cfg.filter_order, cfg.cutoff, ts.sample_rate)?;
    let skip = if cfg.discard_settling {
        (cfg.settling_time() * ts.sample_rate).ceil() as usize
    } else {
        0
    };
    let mut fx = lp.state();
    let mut fy = lp.state();
    let cap = ts.len().saturating_sub(skip) / cfg.decimation + 1;
    let mut xs = Vec::with_capacity(cap);
    let mut ys = Vec::with_capacity(cap);
    let mut first = None;
    for (i, &u) in ts.values.iter().enumerate() {
        // reduce to a fraction of a cycle before scaling to keep the phase exact
        let cycles = (cfg.f_lo * ts.time(i)).fract();
        let (s, c) = (TAU * cycles).sin_cos();
        let x = 2.0 * fx.step(u * c);
        let y = 2.0 * fy.step(u * s);
        if i >= skip && (i - skip) % cfg.decimation == 0 {
            first.get_or_insert(i);
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.is_empty() {
        return Err(invalid(
            "record",
            format!(
                "{} s record is shorter than the filter settling time {} s",
                ts.duration(),
                cfg.settling_time()
            ),
        ));
    }
    let rate = ts.sample_rate / cfg.decimation as f64;
    let mut q = QuadratureSeries::new(rate, ts.time(first.unwrap()), xs, ys, cfg.f_lo, ts.axis.clone())?;
    q.metadata = ts.metadata.clone();
    Ok(q.with_meta("lockin_f_lo_hz", cfg.f_lo)
        .with_meta("lockin_cutoff_hz", cfg.cutoff)
        .with_meta("lockin_order", cfg.filter_order)
        .with_meta("lockin_decimation", cfg.decimation))
}

/// Elementwise R = √(X² + Y²) and R² = X² + Y².
pub fn amplitude(q: &QuadratureSeries) -> (Vec<f64>, Vec<f64>) {
    let r2 = q.r_squared();
    let r = r2.iter().map(|v| v.sqrt()).collect();
    (r, r2)
}

/// RMS of (σ_mean − σ_var)/σ for a single Rayleigh sample; divide by √n.
/// Delta method with the Rayleigh central moments.
pub const RAYLEIGH_ESTIMATOR_SPREAD: f64 = 0.710_4;

#[derive(Debug, Clone, PartialEq)]
pub struct RayleighStats {
    pub n: usize,
    /// Number of statistically independent samples the caller vouches for.
    pub effective_samples: f64,
    /// σ from the mean, ⟨r⟩·√(2/π).
    pub sigma_from_mean: f64,
    /// σ from the variance, √(2·var/(4 − π)).
    pub sigma_from_var: f64,
    /// |σ₁ − σ₂| / mean(σ₁, σ₂).
    pub relative_difference: f64,
    /// Expected RMS of `relative_difference` for independent samples.
    pub expected_relative_difference: f64,
    pub low_sample_warning: bool,
    /// Zero spread or zero mean: the estimators carry no information.
    pub degenerate: bool,
    pub histogram: Vec<HistogramBin>,
}

impl RayleighStats {
    pub fn sigma(&self) -> f64 {
        0.5 * (self.sigma_from_mean + self.sigma_from_var)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub center: f64,
    /// Normalised empirical density.
    pub density: f64,
    /// r/σ² · exp(−r²/(2σ²)) at the bin centre.
    pub model: f64,
}

/// Rayleigh density with scale σ.
pub fn rayleigh_pdf(r: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    r / s2 * (-0.5 * r * r / s2).exp()
}

/// Two estimates of the Rayleigh scale of an amplitude record and their
/// agreement. `effective_samples` defaults to the sample count; for a
/// thermal record pass duration·γ/2.
pub fn rayleigh_stats(r: &[f64], effective_samples: Option<f64>, bins: usize) -> Result<RayleighStats> {
    if r.len() < 2 {
        return Err(invalid("r", "need at least two samples"));
    }
    if let Some(i) = r.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("r", format!("amplitude at index {i} is negative or not finite")));
    }
    let n = r.len();
    let m = mean(r);
    let var = variance(r);
    let s1 = m * (2.0 / PI).sqrt();
    let s2 = (2.0 * var / (4.0 - PI)).sqrt();
    let avg = 0.5 * (s1 + s2);
    let degenerate = var == 0.0 || m == 0.0;
    let rel = if avg > 0.0 { (s1 - s2).abs() / avg } else { f64::NAN };
    let n_eff = effective_samples.unwrap_or(n as f64).min(n as f64);

    let mut histogram = Vec::new();
    let top = r.iter().cloned().fold(0.0, f64::max);
    if bins > 0 && top > 0.0 && avg > 0.0 {
        let w = top / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in r {
            counts[((v / w) as usize).min(bins - 1)] += 1;
        }
        histogram = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let center = (k as f64 + 0.5) * w;
                HistogramBin {
                    center,
                    density: c as f64 / (n as f64 * w),
                    model: rayleigh_pdf(center, avg),
                }
            })
            .collect();
    }

    Ok(RayleighStats {
        n,
        effective_samples: n_eff,
        sigma_from_mean: s1,
        sigma_from_var: s2,
        relative_difference: rel,
        expected_relative_difference: RAYLEIGH_ESTIMATOR_SPREAD / n_eff.sqrt(),
        low_sample_warning: n_eff < MIN_EFFECTIVE_SAMPLES,
        degenerate,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tone(fs: f64, n: usize, f: f64, amp: f64, phase: f64) -> TimeSeries {
        let v = (0..n).map(|i| amp * (TAU * f * i as f64 / fs + phase).cos()).collect();
        TimeSeries::new(fs, 0.0, v, "x").unwrap()
    }

    #[test]
    fn calibration_tone() {
        let ts = tone(2000.0, 40_000, 327.0, 3.0, 0.0);
        let q = lockin(&ts, &LockinConfig::new(327.0, 5.0)).unwrap();
        let (r, _) = amplitude(&q);
        let last = q.len() - 1;
        assert_relative_eq!(q.x[last], 3.0, max_relative = 1e-6);
        assert!(q.y[last].abs() < 3e-6);
        for v in &r[q.len() / 2..] {
            assert_relative_eq!(*v, 3.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn detuned_tone_rotates() {
        let (fs, d) = (2000.0, 0.5);
        let ts = tone(fs, 60_000, 327.0 + d, 2.0, 0.3);
        let q = lockin(&ts, &LockinConfig::new(327.0, 20.0).with_decimation(10)).unwrap();
        let last = q.len() - 1;
        let t = q.time(last);
        let phi = TAU * d * t + 0.3;
        let g = LowPass::new(4, 20.0, fs).unwrap().gain(d);
        // filter gain and phase at δ are close to 1 and 0 well inside the band
        assert_relative_eq!((q.x[last].powi(2) + q.y[last].powi(2)).sqrt(), 2.0 * g, max_relative = 1e-3);
        let got = (-q.y[last]).atan2(q.x[last]);
        let diff = (got - phi).rem_euclid(TAU);
        assert!(diff.min(TAU - diff) < 0.05, "{got} vs {phi}");
    }

    #[test]
    fn config_checks() {
        assert!(LockinConfig::new(600.0, 5.0).validate(1000.0).is_err());
        assert!(LockinConfig::new(100.0, 150.0).validate(1000.0).is_err());
        assert!(LockinConfig::new(100.0, 5.0).with_decimation(100).validate(1000.0).is_err());
        assert!(LockinConfig::new(100.0, 5.0).with_expected_linewidth(1.0).validate(1000.0).is_err());
        assert!(LockinConfig::new(100.0, 5.0).with_decimation(50).validate(1000.0).is_ok());
    }

    #[test]
    fn amplitude_of_pythagorean_pair() {
        let q = QuadratureSeries::new(1.0, 0.0, vec![3.0], vec![4.0], 1.0, "x").unwrap();
        assert_eq!(amplitude(&q), (vec![5.0], vec![25.0]));
    }

    #[test]
    fn constant_amplitude_is_degenerate() {
        let s = rayleigh_stats(&[2.0; 50], None, 10).unwrap();
        assert_eq!(s.sigma_from_var, 0.0);
        assert!(s.degenerate);
        assert!(s.relative_difference > 1.0);
    }
}
