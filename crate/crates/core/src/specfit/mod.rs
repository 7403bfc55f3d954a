//! Spectral estimation and model fitting.
//!
//! * [`welch_psd`] and [`zoom_psd`] estimate spectra; all values are
//!   one-sided in Hz.
//! * [`fit_r2_psd`] fits the Lorentzian spectrum of the squared amplitude
//!   R² = X² + Y², whose half-width is the energy damping rate γ no matter
//!   how the oscillator frequency wanders inside the lock-in band.
//! * [`fit_displacement_psd`] fits the mechanical susceptibility directly.
//! * [`linewidth_vs_pressure`] fits γ = γ_exc + k·P and bounds γ_exc.
//!
//! Fits weight each bin by model/√K with K the effective number of averaged
//! segments, and report the parameter covariance scaled by max(1, χ²_red)
//! and by the bin-correlation sum of the window.

mod fits;
mod line;
pub mod lm;
mod psd;
mod temperature;

pub use fits::{
    displacement_model, fit_displacement_psd, fit_r2_psd, fit_r2_record, peak_window, r2_model, r2_model_sampled, DisplacementFit,
    DisplacementGuess, FitWindow, LorentzFit, R2Guess, JACKKNIFE_GROUPS,
};
pub use line::{
    bootstrap_intercept, inverse_variance_mean, linewidth_vs_pressure, BootstrapSummary, LineFit, PressurePoint, ZeroInterceptFit,
};
pub use psd::{demean, welch_psd, welch_timeseries, zoom_psd, PsdEstimate};
pub use temperature::{effective_samples, temperature_from_displacement, temperature_from_quadratures, TemperatureEstimate};
