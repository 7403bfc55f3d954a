//! Uniformly sampled records shared by the simulation, demodulation and
//! fitting stages.

use std::collections::BTreeMap;

use crate::error::{invalid, require_positive, Result};

/// Uniformly sampled displacement record, metres.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub sample_rate: f64,
    pub t0: f64,
    pub values: Vec<f64>,
    pub axis: String,
    pub metadata: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn new(sample_rate: f64, t0: f64, values: Vec<f64>, axis: impl Into<String>) -> Result<Self> {
        require_positive("sample_rate", sample_rate)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("values", format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            sample_rate,
            t0,
            values,
            axis: axis.into(),
            metadata: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.values.len() as f64 / self.sample_rate
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }
}

/// Slowly varying quadratures X, Y of a displacement record, referenced to
/// a local oscillator at `f_lo`: u(t) ≈ X cos(2π f_lo t) + Y sin(2π f_lo t).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSeries {
    pub sample_rate: f64,
    pub t0: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f_lo: f64,
    pub axis: String,
    pub metadata: BTreeMap<String, String>,
}

impl QuadratureSeries {
    pub fn new(sample_rate: f64, t0: f64, x: Vec<f64>, y: Vec<f64>, f_lo: f64, axis: impl Into<String>) -> Result<Self> {
        require_positive("sample_rate", sample_rate)?;
        if x.len() != y.len() {
            return Err(invalid("quadratures", format!("X has {} samples, Y has {}", x.len(), y.len())));
        }
        Ok(Self {
            sample_rate,
            t0,
            x,
            y,
            f_lo,
            axis: axis.into(),
            metadata: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.x.len() as f64 / self.sample_rate
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    /// Squared amplitude R² = X² + Y².
    pub fn r_squared(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(x, y)| x * x + y * y).collect()
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub(crate) fn variance(v: &[f64]) -> f64 {
    let n = v.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}
