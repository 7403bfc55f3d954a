//! Synthetic displacement and quadrature records.
//!
//! Three engines share one [`SimPlan`]:
//!
//! * [`Engine::Secular`] integrates the damped, thermally driven harmonic
//!   oscillator at the level of the secular motion. Constant frequency uses
//!   the exact Gaussian transition of the linear system; a drifting frequency
//!   uses a BAOAB splitting with an exact Ornstein-Uhlenbeck velocity kick.
//! * [`Engine::Quadrature`] integrates the slowly varying quadratures
//!   directly, which is what makes day-long records at sub-mHz linewidths
//!   cheap. Requires γ < ω_o/100.
//! * [`Engine::Mathieu`] integrates the full time-dependent trap equation,
//!   including micromotion at the drive frequency.
//!
//! The force noise is white with ⟨F(t)F(t')⟩ = S_F δ(t − t'), so a thermal
//! plan uses S_F = 2 k_B T m γ (see [`crate::trapphys::thermal_force_psd`]).
//! Every axis and noise source draws from its own ChaCha substream of the
//! plan seed, so a plan reproduces bit for bit and axes can be run
//! concurrently.

mod mathieu;
mod measurement;
mod quadrature;
pub(crate) mod rng;
mod secular;

pub use mathieu::simulate_mathieu;
pub use measurement::apply_measurement;
pub use quadrature::simulate_quadrature;
pub use secular::simulate_secular;

use std::f64::consts::TAU;

use crate::error::{invalid, require_non_negative, require_positive, Axis, Error, Result};
use crate::filter::{integer_ratio, LowPass};

/// Default cap on output samples per channel.
pub const DEFAULT_MAX_SAMPLES: usize = 100_000_000;

/// Minimum number of solver steps per secular period.
pub const STEPS_PER_SECULAR_PERIOD: f64 = 50.0;

/// Minimum number of solver steps per drive period for the Mathieu engine.
pub const STEPS_PER_DRIVE_PERIOD: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftShape {
    #[default]
    None,
    Sinusoidal,
    Linear,
    SinusoidalLinear,
}

impl DriftShape {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Self::None),
            "sinusoidal" => Some(Self::Sinusoidal),
            "linear" => Some(Self::Linear),
            "sinusoidal+linear" | "sinusoidal_linear" => Some(Self::SinusoidalLinear),
            _ => None,
        }
    }

    fn has_sine(self) -> bool {
        matches!(self, Self::Sinusoidal | Self::SinusoidalLinear)
    }

    fn has_linear(self) -> bool {
        matches!(self, Self::Linear | Self::SinusoidalLinear)
    }
}

/// Deterministic secular-frequency excursion δω(t), rad/s:
/// δω₀ + r·t + A·sin(2πt/P), with the terms switched on by `shape`.
/// The offset applies for every shape other than `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriftProfile {
    pub offset: f64,
    pub linear_rate: f64,
    pub mod_amplitude: f64,
    pub mod_period: f64,
    pub shape: DriftShape,
}

impl DriftProfile {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn sinusoidal(amplitude: f64, period: f64) -> Self {
        Self {
            mod_amplitude: amplitude,
            mod_period: period,
            shape: DriftShape::Sinusoidal,
            ..Self::default()
        }
    }

    pub fn linear(rate: f64) -> Self {
        Self {
            linear_rate: rate,
            shape: DriftShape::Linear,
            ..Self::default()
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        if self.shape == DriftShape::None {
            self.shape = DriftShape::Linear;
        }
        self
    }

    pub fn is_none(&self) -> bool {
        self.shape == DriftShape::None
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("drift.offset", self.offset),
            ("drift.linear_rate", self.linear_rate),
            ("drift.mod_amplitude", self.mod_amplitude),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.shape.has_sine() {
            require_positive("drift.mod_period", self.mod_period)?;
        }
        Ok(())
    }

    /// δω(t), rad/s.
    pub fn delta(&self, t: f64) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        let mut d = self.offset;
        if self.shape.has_linear() {
            d += self.linear_rate * t;
        }
        if self.shape.has_sine() {
            d += self.mod_amplitude * (TAU * t / self.mod_period).sin();
        }
        d
    }

    /// Accumulated phase ∫₀ᵗ δω(s) ds, rad.
    pub fn phase(&self, t: f64) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        let mut p = self.offset * t;
        if self.shape.has_linear() {
            p += 0.5 * self.linear_rate * t * t;
        }
        if self.shape.has_sine() {
            let w = TAU / self.mod_period;
            // (1 - cos(wt)) / w, written to stay accurate for small wt
            let s = (0.5 * w * t).sin();
            p += self.mod_amplitude * 2.0 * s * s / w;
        }
        p
    }

    /// Largest |δω| reached on [0, duration], rad/s (bound, not exact for
    /// the combined shape).
    pub fn max_excursion(&self, duration: f64) -> f64 {
        if self.is_none() {
            return 0.0;
        }
        let mut m = self.offset.abs();
        if self.shape.has_linear() {
            m = m.max((self.offset + self.linear_rate * duration).abs());
        }
        if self.shape.has_sine() {
            m += self.mod_amplitude.abs();
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Secular,
    Quadrature,
    Mathieu,
}

impl Engine {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "secular" => Some(Self::Secular),
            "quadrature" => Some(Self::Quadrature),
            "mathieu" => Some(Self::Mathieu),
            _ => None,
        }
    }
}

/// Starting point of an axis. For the quadrature engine the pair is (X, Y);
/// otherwise (x, v).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Initial {
    /// Draw from the stationary distribution (the origin when S_F = 0).
    #[default]
    Stationary,
    Fixed(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisPlan {
    pub axis: Axis,
    /// Secular angular frequency ω_o, rad/s. Ignored by the Mathieu engine,
    /// which derives it from the trap.
    pub omega: f64,
    /// Total force PSD S_F, N²/Hz.
    pub force_psd: f64,
    pub drift: DriftProfile,
    pub initial: Initial,
}

impl AxisPlan {
    pub fn new(axis: Axis, omega: f64, force_psd: f64) -> Self {
        Self {
            axis,
            omega,
            force_psd,
            drift: DriftProfile::none(),
            initial: Initial::Stationary,
        }
    }

    pub fn with_drift(mut self, drift: DriftProfile) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_initial(mut self, initial: Initial) -> Self {
        self.initial = initial;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPlan {
    pub engine: Engine,
    pub duration: f64,
    /// Internal integration step, s. `None` picks the largest step allowed
    /// by the engine that divides the output interval.
    pub solver_step: Option<f64>,
    pub output_rate: f64,
    pub seed: u64,
    pub mass: f64,
    /// Energy damping rate γ, rad/s.
    pub gamma: f64,
    pub axes: Vec<AxisPlan>,
    /// One-sided white displacement noise added to the output, m²/Hz.
    pub measurement_noise_floor: f64,
    /// Order of the anti-alias cascade applied before decimation
    /// (cutoff 0.4·output_rate). `None` subsamples without filtering.
    pub anti_alias_order: Option<usize>,
    pub max_samples: usize,
}

impl SimPlan {
    pub fn new(engine: Engine, duration: f64, output_rate: f64, mass: f64, gamma: f64) -> Self {
        Self {
            engine,
            duration,
            solver_step: None,
            output_rate,
            seed: 0,
            mass,
            gamma,
            axes: Vec::new(),
            measurement_noise_floor: 0.0,
            anti_alias_order: Some(4),
            max_samples: DEFAULT_MAX_SAMPLES,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_axis(mut self, axis: AxisPlan) -> Self {
        self.axes.push(axis);
        self
    }

    pub fn with_solver_step(mut self, h: f64) -> Self {
        self.solver_step = Some(h);
        self
    }

    pub fn with_anti_alias(mut self, order: Option<usize>) -> Self {
        self.anti_alias_order = order;
        self
    }

    pub fn with_noise_floor(mut self, floor: f64) -> Self {
        self.measurement_noise_floor = floor;
        self
    }

    /// Number of output samples per channel, round(duration·output_rate).
    pub fn sample_count(&self) -> usize {
        (self.duration * self.output_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("duration", self.duration)?;
        require_positive("output_rate", self.output_rate)?;
        require_positive("mass", self.mass)?;
        require_non_negative("gamma", self.gamma)?;
        require_non_negative("measurement_noise_floor", self.measurement_noise_floor)?;
        if self.axes.is_empty() {
            return Err(invalid("axes", "at least one axis is required"));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if self.axes[..i].iter().any(|b| b.axis == a.axis) {
                return Err(invalid("axes", format!("axis {} listed twice", a.axis)));
            }
            if self.engine != Engine::Mathieu {
                require_positive("omega", a.omega)?;
            }
            require_non_negative("force_psd", a.force_psd)?;
            a.drift.validate()?;
        }
        let n = self.sample_count();
        if n == 0 {
            return Err(invalid("duration", "run is shorter than one output sample"));
        }
        if n > self.max_samples {
            return Err(invalid(
                "duration",
                format!("{n} samples per channel exceed the cap of {}", self.max_samples),
            ));
        }
        if self.anti_alias_order == Some(0) {
            return Err(invalid("anti_alias_order", "must be >= 1"));
        }
        Ok(())
    }

    /// Solver steps per output sample, given the fastest frequency the
    /// solver has to resolve (Hz) and the required steps per period.
    pub(crate) fn substeps(&self, fastest_hz: f64, steps_per_period: f64) -> Result<usize> {
        let max_step = 1.0 / (steps_per_period * fastest_hz);
        match self.solver_step {
            Some(h) => {
                require_positive("solver_step", h)?;
                if h > max_step * (1.0 + 1e-12) {
                    return Err(invalid(
                        "solver_step",
                        format!("{h} s exceeds the limit {max_step} s ({steps_per_period} steps per {fastest_hz} Hz period)"),
                    ));
                }
                integer_ratio(1.0 / h, self.output_rate, "output_rate")
            }
            None => Ok(((1.0 / self.output_rate) / max_step).ceil().max(1.0) as usize),
        }
    }

    pub(crate) fn anti_alias(&self, solver_rate: f64, substeps: usize) -> Result<Option<LowPass>> {
        match self.anti_alias_order {
            Some(order) if substeps > 1 => Ok(Some(LowPass::new(order, 0.4 * self.output_rate, solver_rate)?)),
            _ => Ok(None),
        }
    }

    pub(crate) fn require_engine(&self, engine: Engine) -> Result<()> {
        if self.engine != engine {
            return Err(invalid(
                "engine",
                format!("plan is for {:?}, called the {:?} simulator", self.engine, engine),
            ));
        }
        Ok(())
    }
}

/// Errors unless ω_o + δω(t) stays positive.
pub(crate) fn check_trapped(axis: Axis, omega: f64, t: f64) -> Result<()> {
    if omega > 0.0 {
        Ok(())
    } else {
        Err(Error::UntrappedAt { axis, time: t })
    }
}
