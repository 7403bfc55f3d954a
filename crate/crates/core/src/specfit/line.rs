use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, require_positive, Result};

/// Linewidth measured at one pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressurePoint {
    pub pressure_mbar: f64,
    pub gamma_hz: f64,
    pub sigma_hz: f64,
}

/// Weighted straight-line fit γ = γ_exc + k·P.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFit {
    /// γ_exc, Hz.
    pub intercept: f64,
    /// k, Hz/mbar.
    pub slope: f64,
    /// Covariance of (intercept, slope), scaled by the reduced χ².
    pub covariance: [[f64; 2]; 2],
    pub chi2: f64,
    pub dof: usize,
    pub confidence: f64,
    /// Two-sided Student-t quantile for `confidence` at n − 2 degrees of freedom.
    pub t_quantile: f64,
    pub intercept_ci: (f64, f64),
    pub slope_ci: (f64, f64),
    /// Upper end of the two-sided interval on the intercept, γ_exc + t·se.
    pub intercept_upper: f64,
    /// One-sided upper limit at `confidence`.
    pub intercept_upper_one_sided: f64,
    pub zero_intercept: ZeroInterceptFit,
}

/// Comparison fit γ = k·P.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroInterceptFit {
    pub slope: f64,
    pub slope_err: f64,
    pub chi2: f64,
}

impl LineFit {
    pub fn intercept_err(&self) -> f64 {
        self.covariance[0][0].sqrt()
    }

    pub fn slope_err(&self) -> f64 {
        self.covariance[1][1].sqrt()
    }

    pub fn reduced_chi2(&self) -> f64 {
        self.chi2 / self.dof as f64
    }

    pub fn predict(&self, p_mbar: f64) -> f64 {
        self.intercept + self.slope * p_mbar
    }

    /// Confidence band of the fitted line at `p_mbar`, (lower, upper).
    pub fn band(&self, p_mbar: f64) -> (f64, f64) {
        let c = &self.covariance;
        let var = c[0][0] + 2.0 * p_mbar * c[0][1] + p_mbar * p_mbar * c[1][1];
        let h = self.t_quantile * var.max(0.0).sqrt();
        let y = self.predict(p_mbar);
        (y - h, y + h)
    }
}

pub fn linewidth_vs_pressure(points: &[PressurePoint], confidence: f64) -> Result<LineFit> {
    if points.len() < 3 {
        return Err(invalid("points", format!("need at least 3 pressures, got {}", points.len())));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid("confidence", format!("must be in (0, 1), got {confidence}")));
    }
    for p in points {
        require_positive("sigma_hz", p.sigma_hz)?;
        if !(p.pressure_mbar.is_finite() && p.gamma_hz.is_finite()) {
            return Err(invalid("points", "non-finite pressure or linewidth"));
        }
    }
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let w = 1.0 / (p.sigma_hz * p.sigma_hz);
        s += w;
        sx += w * p.pressure_mbar;
        sy += w * p.gamma_hz;
        sxx += w * p.pressure_mbar * p.pressure_mbar;
        sxy += w * p.pressure_mbar * p.gamma_hz;
    }
    // centred sums for stability
    let xm = sx / s;
    let ym = sy / s;
    let sxx_c = sxx - s * xm * xm;
    let sxy_c = sxy - s * xm * ym;
    if !(sxx_c > 0.0) {
        return Err(invalid("points", "all pressures are equal"));
    }
    let slope = sxy_c / sxx_c;
    let intercept = ym - slope * xm;
    let chi2: f64 = points
        .iter()
        .map(|p| ((p.gamma_hz - intercept - slope * p.pressure_mbar) / p.sigma_hz).powi(2))
        .sum();
    let dof = points.len() - 2;
    let scale = chi2 / dof as f64;
    let var_b = scale / sxx_c;
    let var_a = scale * (1.0 / s + xm * xm / sxx_c);
    let cov_ab = -scale * xm / sxx_c;

    let t = StudentsT::new(0.0, 1.0, dof as f64).map_err(|e| invalid("dof", e.to_string()))?;
    let tq = t.inverse_cdf(0.5 + 0.5 * confidence);
    let t1 = t.inverse_cdf(confidence);
    let (se_a, se_b) = (var_a.sqrt(), var_b.sqrt());

    let k0 = sxy / sxx;
    let chi2_0: f64 = points
        .iter()
        .map(|p| ((p.gamma_hz - k0 * p.pressure_mbar) / p.sigma_hz).powi(2))
        .sum();
    let scale0 = chi2_0 / (points.len() - 1) as f64;

    Ok(LineFit {
        intercept,
        slope,
        covariance: [[var_a, cov_ab], [cov_ab, var_b]],
        chi2,
        dof,
        confidence,
        t_quantile: tq,
        intercept_ci: (intercept - tq * se_a, intercept + tq * se_a),
        slope_ci: (slope - tq * se_b, slope + tq * se_b),
        intercept_upper: intercept + tq * se_a,
        intercept_upper_one_sided: intercept + t1 * se_a,
        zero_intercept: ZeroInterceptFit {
            slope: k0,
            slope_err: (scale0 / sxx).sqrt(),
            chi2: chi2_0,
        },
    })
}

/// Percentiles of the intercept over pair-resampled refits.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub resamples: usize,
    pub intercept_lower: f64,
    pub intercept_upper: f64,
    pub intercept_std: f64,
}

/// Non-parametric bootstrap of the intercept. Resamples that collapse onto
/// fewer than two distinct pressures are skipped.
pub fn bootstrap_intercept(points: &[PressurePoint], resamples: usize, confidence: f64, seed: u64) -> Result<BootstrapSummary> {
    linewidth_vs_pressure(points, confidence)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = points.len();
    let mut vals = Vec::with_capacity(resamples);
    let mut draw = Vec::with_capacity(n);
    while vals.len() < resamples {
        draw.clear();
        draw.extend((0..n).map(|_| points[rng.random_range(0..n)]));
        if let Ok(f) = linewidth_vs_pressure(&draw, confidence) {
            if f.intercept.is_finite() {
                vals.push(f.intercept);
            }
        }
    }
    vals.sort_by(f64::total_cmp);
    let q = |p: f64| vals[((p * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Ok(BootstrapSummary {
        resamples,
        intercept_lower: q(0.5 - 0.5 * confidence),
        intercept_upper: q(0.5 + 0.5 * confidence),
        intercept_std: crate::series::variance(&vals).sqrt(),
    })
}

/// Inverse-variance weighted mean of (value, σ) pairs and its σ.
pub fn inverse_variance_mean(values: &[(f64, f64)]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(invalid("values", "empty"));
    }
    let mut sw = 0.0;
    let mut swx = 0.0;
    for &(x, s) in values {
        require_positive("sigma", s)?;
        let w = 1.0 / (s * s);
        sw += w;
        swx += w * x;
    }
    Ok((swx / sw, 1.0 / sw.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line(pressures: &[f64], a: f64, k: f64) -> Vec<PressurePoint> {
        pressures
            .iter()
            .map(|&p| PressurePoint {
                pressure_mbar: p,
                gamma_hz: a + k * p,
                sigma_hz: 1e-5 + 0.1 * (a + k * p).abs(),
            })
            .collect()
    }

    #[test]
    fn exact_line_has_zero_width_intervals() {
        let fit = linewidth_vs_pressure(&line(&[1e-6, 1e-5, 5e-5, 1e-4], 2e-5, 285.0), 0.95).unwrap();
        assert_relative_eq!(fit.intercept, 2e-5, max_relative = 1e-9);
        assert_relative_eq!(fit.slope, 285.0, max_relative = 1e-12);
        assert!(fit.intercept_err() < 1e-15);
        assert!((fit.intercept_ci.1 - fit.intercept_ci.0) < 1e-14);
    }

    #[test]
    fn band_is_narrowest_at_weighted_centroid() {
        let mut pts = line(&[1e-6, 1e-5, 3e-5, 5e-5, 1e-4], 0.0, 285.0);
        for (i, p) in pts.iter_mut().enumerate() {
            p.gamma_hz += if i % 2 == 0 { 1.0 } else { -1.0 } * p.sigma_hz;
        }
        let fit = linewidth_vs_pressure(&pts, 0.95).unwrap();
        let w: f64 = pts.iter().map(|p| p.sigma_hz.powi(-2)).sum();
        let xm: f64 = pts.iter().map(|p| p.pressure_mbar * p.sigma_hz.powi(-2)).sum::<f64>() / w;
        let width = |p: f64| {
            let (lo, hi) = fit.band(p);
            assert!(lo <= fit.predict(p) && fit.predict(p) <= hi);
            hi - lo
        };
        assert!(width(xm) <= width(xm * 1.01) && width(xm) <= width(xm * 0.99));
    }

    #[test]
    fn student_t_quantile() {
        // t_{0.975, 8}
        let fit = linewidth_vs_pressure(&line(&(1..=10).map(|i| i as f64 * 1e-5).collect::<Vec<_>>(), 0.0, 1.0), 0.95).unwrap();
        assert_relative_eq!(fit.t_quantile, 2.306_004_135_204_166, max_relative = 1e-9);
    }

    #[test]
    fn needs_three_points() {
        assert!(linewidth_vs_pressure(&line(&[1.0, 2.0], 0.0, 1.0), 0.95).is_err());
    }

    #[test]
    fn equal_errors_weight_equally() {
        let (m, s) = inverse_variance_mean(&[(1.0, 0.5), (3.0, 0.5)]).unwrap();
        assert_eq!(m, 2.0);
        assert_relative_eq!(s, 0.5 / 2f64.sqrt());
    }
}
