use std::fmt;

/// Cartesian trap axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("axis {axis} is not trapped (a + q^2/2 = {radicand:e})")]
    Untrapped { axis: Axis, radicand: f64 },

    #[error("axis {axis} became untrapped at t = {time} s (omega(t)^2 <= 0)")]
    UntrappedAt { axis: Axis, time: f64 },

    #[error("unstable motion on axis {axis} at t = {time} s: |x| = {amplitude:e} m exceeds {limit:e} m")]
    Unstable { axis: Axis, time: f64, amplitude: f64, limit: f64 },

    #[error("rotating-wave approximation invalid: gamma = {gamma:e} rad/s >= omega_o/100 = {limit:e} rad/s")]
    RotatingWave { gamma: f64, limit: f64 },

    #[error("fit did not converge after {iterations} iterations (last residual norm {residual_norm:e})")]
    FitDidNotConverge { iterations: usize, residual_norm: f64 },

    #[error("record of {len} samples is shorter than one segment of {segment}")]
    RecordTooShort { len: usize, segment: usize },

    #[error("malformed data at byte offset {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Fails unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {value}")))
    }
}
