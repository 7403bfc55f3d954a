use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::lm::{minimize, LmResult, Param};
use super::psd::PsdEstimate;
use crate::constants::K_B;
use crate::error::{invalid, require_positive, Result};

/// Number of reweighting passes; weights come from the previous model.
const IRLS_PASSES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub f_min: f64,
    pub f_max: f64,
}

/// One-sided R² spectrum in Hz: S(f) = 2·(8/γ)·s²/((2πf)² + γ²), with γ in
/// rad/s and s = S_F/(2m²ω_o²), so that each quadrature has variance s/γ.
pub fn r2_model(f: f64, gamma: f64, s: f64) -> f64 {
    let w = TAU * f;
    16.0 * s * s / (gamma * (w * w + gamma * gamma))
}

/// [`r2_model`] for a record sampled at `sample_rate`: the exponential
/// autocovariance 4σ⁴e^{−γ|τ|} sampled every 1/f_s has the one-sided spectrum
/// (8σ⁴/f_s)(1 − b²)/(1 − 2b cos(2πf/f_s) + b²), b = e^{−γ/f_s}. It tends
/// to the continuous form for γ ≪ f_s; at f ≈ 8γ and f_s = 200γ the two
/// differ by about 0.5%, enough to bias γ by a comparable amount.
pub fn r2_model_sampled(f: f64, gamma: f64, s: f64, sample_rate: f64) -> f64 {
    let x = gamma / sample_rate;
    let sigma2 = s / gamma;
    let b = (-x).exp();
    let half = 0.5 * TAU * f / sample_rate;
    let one_minus_b2 = -(-2.0 * x).exp_m1();
    let denom = (-x).exp_m1().powi(2) + 4.0 * b * half.sin().powi(2);
    8.0 * sigma2 * sigma2 / sample_rate * one_minus_b2 / denom
}

/// Fit of the squared-amplitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzFit {
    /// Linewidth γ/2π, Hz.
    pub gamma_hz: f64,
    pub gamma_err_hz: f64,
    /// Scale s = S_F/(2m²ω_o²), m²/s.
    pub s: f64,
    pub s_err: f64,
    /// Covariance of (γ/2π, s).
    pub covariance: [[f64; 2]; 2],
    pub reduced_chi2: f64,
    pub dof: usize,
    pub window: FitWindow,
    /// Sample rate of the R² record, which sets the model's aliasing.
    pub sample_rate: f64,
    pub iterations: usize,
    /// Linewidth error from the curve-fit covariance alone, Hz.
    pub analytic_gamma_err_hz: f64,
    /// Segment groups of the jackknife behind the errors; 0 when the errors
    /// are the curve-fit ones.
    pub jackknife_groups: usize,
    /// Set when the fit is formally converged but should not be trusted.
    pub warning: Option<String>,
}

impl LorentzFit {
    pub fn gamma(&self) -> f64 {
        TAU * self.gamma_hz
    }

    /// Per-quadrature variance σ² = s/γ implied by the fit, m².
    pub fn sigma2(&self) -> f64 {
        self.s / self.gamma()
    }

    pub fn model(&self, f: f64) -> f64 {
        r2_model_sampled(f, self.gamma(), self.s, self.sample_rate)
    }

    pub fn reliable(&self) -> bool {
        self.warning.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct R2Guess {
    pub gamma_hz: Option<f64>,
    pub s: Option<f64>,
}

/// Weighted fit of [`r2_model_sampled`] to the spectrum of mean-subtracted R²,
/// with the sample rate taken as resolution × segment length.
/// Per-bin standard errors are model/√K (K = effective averages), refined
/// by iterative reweighting; the covariance is widened for bin-to-bin
/// correlation of the window. The DC bin is always excluded. With no window the
/// fit covers the first non-zero bin up to 8 initial linewidths.
pub fn fit_r2_psd(psd: &PsdEstimate, guess: R2Guess, window: Option<FitWindow>) -> Result<LorentzFit> {
    if psd.zoom_center.is_some() {
        return Err(invalid(
            "psd",
            "expected a baseband R² spectrum, got a zoomed displacement spectrum",
        ));
    }
    let df = psd.resolution();
    let (g0_hz, s0) = r2_initial_guess(psd)?;
    let g0_hz = guess.gamma_hz.unwrap_or(g0_hz);
    require_positive("initial gamma", g0_hz)?;
    let g0 = TAU * g0_hz;
    let s0 = guess.s.unwrap_or(s0);
    require_positive("initial s", s0)?;
    let nyq = *psd.frequencies.last().unwrap();
    let window = window.unwrap_or(FitWindow {
        f_min: df,
        f_max: (8.0 * g0_hz).min(nyq).max(8.0 * df),
    });
    let range = psd.window_indices(window.f_min.max(0.5 * df), window.f_max);
    let f = &psd.frequencies[range.clone()];
    let y = &psd.values[range];
    if f.len() < 4 {
        return Err(invalid("window", format!("only {} bins in the fit window", f.len())));
    }
    let k = psd.effective_averages;
    let fs = df * psd.segment_length as f64;

    let mut params = [g0, s0];
    let mut res: Option<LmResult> = None;
    for pass in 0..IRLS_PASSES {
        let sigma: Vec<f64> = f
            .iter()
            .map(|&fi| r2_model_sampled(fi, params[0], params[1], fs) / k.sqrt())
            .collect();
        let r = minimize(
            |p| {
                f.iter()
                    .zip(y)
                    .zip(&sigma)
                    .map(|((fi, yi), si)| (r2_model_sampled(*fi, p[0], p[1], fs) - yi) / si)
                    .collect()
            },
            &[Param::Positive(params[0]), Param::Positive(params[1])],
        )?;
        let change = (r.params[0] / params[0] - 1.0).abs();
        params = [r.params[0], r.params[1]];
        res = Some(r);
        if pass > 0 && change < 1e-9 {
            break;
        }
    }
    let r = res.unwrap();
    let dof = f.len() - 2;
    let red = r.chi2 / dof as f64;
    let c = &r.covariance * (red.max(1.0) * psd.bin_correlation);
    let gamma_hz = params[0] / TAU;
    let cov = [[c[(0, 0)] / (TAU * TAU), c[(0, 1)] / TAU], [c[(1, 0)] / TAU, c[(1, 1)]]];
    let gamma_err_hz = cov[0][0].sqrt();
    let mut fit = LorentzFit {
        gamma_hz,
        gamma_err_hz,
        s: params[1],
        s_err: cov[1][1].sqrt(),
        covariance: cov,
        reduced_chi2: red,
        dof,
        window,
        sample_rate: fs,
        iterations: r.iterations,
        analytic_gamma_err_hz: gamma_err_hz,
        jackknife_groups: 0,
        warning: None,
    };
    fit.warning = if r.rank_deficient {
        Some("linewidth and scale are not separately constrained by the spectrum".to_string())
    } else {
        check_warning(&fit)
    };
    Ok(fit)
}

fn check_warning(fit: &LorentzFit) -> Option<String> {
    let (f0, f1) = (fit.window.f_min, fit.window.f_max);
    if fit.gamma_hz < f0 || fit.gamma_hz > f1 {
        Some(format!(
            "fitted linewidth {:e} Hz lies outside the fit window [{f0:e}, {f1:e}] Hz",
            fit.gamma_hz
        ))
    } else if fit.gamma_err_hz > 0.5 * fit.gamma_hz {
        Some(format!("linewidth error {:e} Hz exceeds half the linewidth", fit.gamma_err_hz))
    } else if fit.reduced_chi2 > 3.0 {
        Some(format!("reduced chi-squared {:.2} indicates a poor model match", fit.reduced_chi2))
    } else {
        None
    }
}

/// Segment groups for [`fit_r2_record`].
pub const JACKKNIFE_GROUPS: usize = 16;

/// Welch spectrum of the mean-subtracted R² record and its [`fit_r2_psd`]
/// fit, with parameter errors from a delete-one-group jackknife over
/// contiguous groups of Welch segments.
///
/// The squared amplitude is not Gaussian, so its periodogram bins share a
/// broadband error that the per-bin weights do not see; curve-fit errors
/// come out too small by roughly 1.6 at the default settings. The
/// jackknife needs at least 8 segments and otherwise falls back to the
/// curve-fit errors with a warning.
pub fn fit_r2_record(
    r2: &[f64],
    sample_rate: f64,
    segment_length: usize,
    overlap: f64,
    guess: R2Guess,
    window: Option<FitWindow>,
) -> Result<(PsdEstimate, LorentzFit)> {
    let centred = super::psd::demean(r2);
    let (psd, parts) = super::psd::welch_with_segments(&centred, sample_rate, segment_length, overlap)?;
    let mut fit = fit_r2_psd(&psd, guess, window)?;
    let k = parts.len();
    let groups = JACKKNIFE_GROUPS.min(k / 2);
    if groups < 4 {
        fit.warning
            .get_or_insert_with(|| format!("only {k} segments; errors from the curve fit alone"));
        return Ok((psd, fit));
    }
    let start = R2Guess {
        gamma_hz: Some(fit.gamma_hz),
        s: Some(fit.s),
    };
    let estimates: Vec<(f64, f64)> = (0..groups)
        .into_par_iter()
        .filter_map(|g| {
            let keep: Vec<&Vec<f64>> = parts
                .iter()
                .enumerate()
                .filter(|(i, _)| i * groups / k != g)
                .map(|(_, p)| p)
                .collect();
            fit_r2_psd(&psd.from_segments(&keep), start, Some(fit.window))
                .ok()
                .map(|f| (f.gamma_hz, f.s))
        })
        .collect();
    if estimates.len() < groups {
        fit.warning.get_or_insert_with(|| {
            format!(
                "{} of {groups} jackknife refits failed; errors from the curve fit alone",
                groups - estimates.len()
            )
        });
        return Ok((psd, fit));
    }
    let n = groups as f64;
    let mg = estimates.iter().map(|e| e.0).sum::<f64>() / n;
    let ms = estimates.iter().map(|e| e.1).sum::<f64>() / n;
    let scale = (n - 1.0) / n;
    let mut cov = [[0.0; 2]; 2];
    for (g, s) in &estimates {
        let d = [g - mg, s - ms];
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] += scale * d[i] * d[j];
            }
        }
    }
    fit.covariance = cov;
    fit.gamma_err_hz = cov[0][0].sqrt();
    fit.s_err = cov[1][1].sqrt();
    fit.jackknife_groups = groups;
    let unconstrained = fit.warning.as_deref().is_some_and(|w| w.contains("not separately constrained"));
    if !unconstrained {
        fit.warning = check_warning(&fit);
    }
    Ok((psd, fit))
}

/// Plateau height and half-power point of the spectrum.
fn r2_initial_guess(psd: &PsdEstimate) -> Result<(f64, f64)> {
    let v = &psd.values;
    if v.len() < 8 {
        return Err(invalid("psd", "too few bins"));
    }
    let plateau = v[1..4].iter().sum::<f64>() / 3.0;
    if !(plateau > 0.0) {
        return Err(invalid("psd", "spectrum has no low-frequency power"));
    }
    let idx = v[1..].iter().position(|&x| x < 0.5 * plateau).map_or(v.len() - 1, |i| i + 1);
    let g_hz = psd.frequencies[idx].max(psd.resolution());
    let g = TAU * g_hz;
    // plateau = 16 s²/γ³  →  s = √(plateau·γ³/16)
    let s = (plateau * g * g * g / 16.0).sqrt();
    Ok((g_hz, s))
}

/// One-sided displacement PSD in Hz:
/// S(f) = 2(S_F/m²)/((ω_o² − ω²)² + γ²ω²) + floor, ω = 2πf.
pub fn displacement_model(f: f64, mass: f64, omega0: f64, gamma: f64, force_psd: f64, floor: f64) -> f64 {
    let w = TAU * f;
    let d = omega0 * omega0 - w * w;
    2.0 * force_psd / (mass * mass) / (d * d + gamma * gamma * w * w) + floor
}

/// Window of `half_widths` apparent half-widths either side of the
/// highest bin, the half-width read off at half the peak height above the
/// lowest decile. Clipped to the spectrum.
pub fn peak_window(psd: &PsdEstimate, half_widths: f64) -> Result<FitWindow> {
    let (f, y) = (&psd.frequencies, &psd.values);
    if y.len() < 6 {
        return Err(invalid("psd", "too few bins"));
    }
    let ipk = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 10];
    let half = 0.5 * (y[ipk] - floor);
    let lo = (0..ipk).rev().find(|&i| y[i] - floor < half).unwrap_or(0);
    let hi = (ipk..y.len()).find(|&i| y[i] - floor < half).unwrap_or(y.len() - 1);
    let hw = (0.5 * (f[hi] - f[lo])).max(psd.resolution());
    Ok(FitWindow {
        f_min: (f[ipk] - half_widths * hw).max(f[0]),
        f_max: (f[ipk] + half_widths * hw).min(f[f.len() - 1]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisplacementGuess {
    pub omega0: Option<f64>,
    pub gamma: Option<f64>,
    pub force_psd: Option<f64>,
    pub floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementFit {
    pub omega0: f64,
    /// Energy damping rate, rad/s.
    pub gamma: f64,
    pub force_psd: f64,
    pub floor: f64,
    /// Temperature implied by S_F = 2k_B T m γ.
    pub temperature: f64,
    /// 1σ errors of (ω_o, γ, S_F, floor, T).
    pub errors: [f64; 5],
    /// Covariance of (ω_o, γ, S_F, floor).
    pub covariance: DMatrix<f64>,
    pub reduced_chi2: f64,
    pub window: FitWindow,
    pub warning: Option<String>,
}

impl DisplacementFit {
    pub fn gamma_hz(&self) -> f64 {
        self.gamma / TAU
    }

    pub fn gamma_err_hz(&self) -> f64 {
        self.errors[1] / TAU
    }

    pub fn reliable(&self) -> bool {
        self.warning.is_none()
    }
}

/// Fit of the mechanical susceptibility to a displacement PSD (plain or
/// zoomed). Weighting follows [`fit_r2_psd`]. With no window the fit spans
/// the whole spectrum except the DC bin.
pub fn fit_displacement_psd(psd: &PsdEstimate, mass: f64, guess: DisplacementGuess, window: Option<FitWindow>) -> Result<DisplacementFit> {
    require_positive("mass", mass)?;
    let df = psd.resolution();
    let window = window.unwrap_or(FitWindow {
        f_min: psd.frequencies[0].max(0.5 * df),
        f_max: *psd.frequencies.last().unwrap(),
    });
    let range = psd.window_indices(window.f_min, window.f_max);
    let f = &psd.frequencies[range.clone()];
    let y = &psd.values[range];
    if f.len() < 6 {
        return Err(invalid("window", format!("only {} bins in the fit window", f.len())));
    }

    // peak location and half-power width
    let ipk = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor0 = sorted[sorted.len() / 10].max(1e-300);
    let peak = y[ipk] - floor0;
    let mut lo = ipk;
    while lo > 0 && y[lo] - floor0 > 0.5 * peak {
        lo -= 1;
    }
    let mut hi = ipk;
    while hi + 1 < y.len() && y[hi] - floor0 > 0.5 * peak {
        hi += 1;
    }
    let w0 = guess.omega0.unwrap_or(TAU * f[ipk]);
    let g0 = guess.gamma.unwrap_or(TAU * ((f[hi] - f[lo]) * 0.5).max(df));
    let sf0 = guess
        .force_psd
        .unwrap_or((peak.max(1e-300) * mass * mass * g0 * g0 * w0 * w0 / 2.0).max(1e-300));
    let fl0 = guess.floor.unwrap_or(floor0);
    require_positive("initial omega0", w0)?;
    require_positive("initial gamma", g0)?;

    let k = psd.effective_averages;
    let mut params = [w0, g0, sf0, fl0];
    let mut res: Option<LmResult> = None;
    for pass in 0..IRLS_PASSES {
        let sigma: Vec<f64> = f
            .iter()
            .map(|&fi| displacement_model(fi, mass, params[0], params[1], params[2], params[3].max(0.0)).max(1e-300) / k.sqrt())
            .collect();
        let r = minimize(
            |p| {
                f.iter()
                    .zip(y)
                    .zip(&sigma)
                    .map(|((fi, yi), si)| (displacement_model(*fi, mass, p[0], p[1], p[2], p[3]) - yi) / si)
                    .collect()
            },
            &[
                Param::Positive(params[0]),
                Param::Positive(params[1]),
                Param::Positive(params[2]),
                Param::Free {
                    value: params[3],
                    scale: floor0.abs().max(1e-30 * peak),
                },
            ],
        )?;
        let change = (r.params[1] / params[1] - 1.0).abs();
        params = [r.params[0], r.params[1], r.params[2], r.params[3]];
        res = Some(r);
        if pass > 0 && change < 1e-9 {
            break;
        }
    }
    let r = res.unwrap();
    let dof = f.len() - 4;
    let red = r.chi2 / dof as f64;
    let cov = &r.covariance * (red.max(1.0) * psd.bin_correlation);
    let [w, g, sf, fl] = params;
    let temperature = sf / (2.0 * K_B * mass * g);
    let (vg, vs, cgs) = (cov[(1, 1)], cov[(2, 2)], cov[(1, 2)]);
    let t_rel = (vs / (sf * sf) + vg / (g * g) - 2.0 * cgs / (sf * g)).max(0.0).sqrt();
    let errors = [cov[(0, 0)].sqrt(), vg.sqrt(), vs.sqrt(), cov[(3, 3)].sqrt(), temperature * t_rel];
    let f0 = w / TAU;
    let gh = g / TAU;
    let mut warning = None;
    if r.rank_deficient {
        warning = Some("parameters are not separately constrained by the spectrum".to_string());
    } else if f0 - f[0] < 2.0 * gh || f[f.len() - 1] - f0 < 2.0 * gh {
        warning = Some(format!(
            "resonance at {f0} Hz (width {gh:e} Hz) is at the edge of the band [{}, {}] Hz",
            f[0],
            f[f.len() - 1]
        ));
    } else if gh < df {
        warning = Some(format!("linewidth {gh:e} Hz is below the bin width {df:e} Hz"));
    } else if red > 3.0 {
        warning = Some(format!("reduced chi-squared {red:.2} indicates a poor model match"));
    }
    Ok(DisplacementFit {
        omega0: w,
        gamma: g,
        force_psd: sf,
        floor: fl,
        temperature,
        errors,
        covariance: cov,
        reduced_chi2: red,
        window,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic(freqs: Vec<f64>, model: impl Fn(f64) -> f64) -> PsdEstimate {
        PsdEstimate {
            values: freqs.iter().map(|&f| model(f)).collect(),
            frequencies: freqs,
            segment_count: 20,
            segment_length: 1000,
            window: "hann",
            equivalent_noise_bandwidth: 0.0,
            effective_averages: 20.0,
            bin_correlation: 1.0,
            zoom_center: None,
        }
    }

    #[test]
    fn exact_r2_curve_is_recovered() {
        let (g, s) = (TAU * 7.5e-3, 3.3e-20);
        let mut psd = synthetic((0..2001).map(|i| i as f64 * 1e-4).collect(), |f| r2_model_sampled(f, g, s, 0.4));
        psd.segment_length = 4000;
        let fit = fit_r2_psd(&psd, R2Guess::default(), None).unwrap();
        assert_relative_eq!(fit.gamma(), g, max_relative = 1e-6);
        assert_relative_eq!(fit.s, s, max_relative = 1e-6);
        assert!(fit.reduced_chi2 < 1e-12);
    }

    #[test]
    fn sampled_r2_model_tends_to_continuous() {
        let (g, s) = (TAU * 0.01, 2e-20);
        for f in [0.0, 0.01, 0.05] {
            assert_relative_eq!(r2_model_sampled(f, g, s, 1e4), r2_model(f, g, s), max_relative = 1e-6);
        }
        // aliasing lifts the tail at finite rate
        assert!(r2_model_sampled(0.08, g, s, 2.0) > r2_model(0.08, g, s));
    }

    #[test]
    fn exact_displacement_curve_is_recovered() {
        let (m, w0, g, sf, fl) = (9.6e-17, TAU * 327.0, TAU * 0.5, 2.0 * K_B * 293.0 * 9.6e-17 * TAU * 0.5, 1e-24);
        let psd = synthetic((1..8000).map(|i| 300.0 + i as f64 * 0.0075).collect(), |f| {
            displacement_model(f, m, w0, g, sf, fl)
        });
        let fit = fit_displacement_psd(&psd, m, DisplacementGuess::default(), None).unwrap();
        assert_relative_eq!(fit.omega0, w0, max_relative = 1e-6);
        assert_relative_eq!(fit.gamma, g, max_relative = 1e-6);
        assert_relative_eq!(fit.force_psd, sf, max_relative = 1e-6);
        assert_relative_eq!(fit.temperature, 293.0, max_relative = 1e-6);
        assert_relative_eq!(fit.floor, fl, max_relative = 1e-4);
        assert!(fit.reliable(), "{:?}", fit.warning);
    }

    #[test]
    fn peak_at_band_edge_is_flagged() {
        let (m, w0, g, sf) = (1e-17, TAU * 100.0, TAU * 0.5, 1e-40);
        let psd = synthetic((1..2000).map(|i| 99.0 + i as f64 * 0.01).collect(), |f| {
            displacement_model(f, m, w0, g, sf, 0.0)
        });
        let fit = fit_displacement_psd(&psd, m, DisplacementGuess::default(), None).unwrap();
        assert!(!fit.reliable());
    }
}
