//! Cascaded single-pole low-pass filters and decimation.
//!
//! One filter family serves both the lock-in amplifier and the anti-alias
//! stage of the simulators. A cascade of `order` identical stages is
//! parameterised by the -3 dB frequency of the whole cascade.

use std::f64::consts::TAU;

use crate::error::{invalid, require_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowPass {
    order: usize,
    cutoff: f64,
    sample_rate: f64,
    alpha: f64,
}

impl LowPass {
    pub fn new(order: usize, cutoff: f64, sample_rate: f64) -> Result<Self> {
        if order == 0 {
            return Err(invalid("filter_order", "must be >= 1"));
        }
        require_positive("cutoff", cutoff)?;
        require_positive("sample_rate", sample_rate)?;
        if cutoff >= 0.5 * sample_rate {
            return Err(invalid(
                "cutoff",
                format!("{cutoff} Hz is not below the Nyquist frequency {}", 0.5 * sample_rate),
            ));
        }
        let stage = stage_corner(order, cutoff);
        let alpha = -(-TAU * stage / sample_rate).exp_m1();
        Ok(Self {
            order,
            cutoff,
            sample_rate,
            alpha,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Corner frequency of each individual stage, Hz.
    pub fn stage_corner(&self) -> f64 {
        stage_corner(self.order, self.cutoff)
    }

    /// Time after which start-up transients are considered gone.
    pub fn settling_time(&self) -> f64 {
        5.0 / self.cutoff
    }

    /// Exact magnitude response |H(f)| of the discrete cascade.
    pub fn gain(&self, f: f64) -> f64 {
        // single stage: H(z) = alpha / (1 - (1 - alpha) z^-1)
        let w = TAU * f / self.sample_rate;
        let b = 1.0 - self.alpha;
        let sh = (0.5 * w).sin();
        let den = (self.alpha * self.alpha + 4.0 * b * sh * sh).sqrt();
        (self.alpha / den).powi(self.order as i32)
    }

    pub fn state(&self) -> Cascade {
        Cascade {
            alpha: self.alpha,
            stages: vec![0.0; self.order],
        }
    }

    pub fn filter(&self, data: &[f64]) -> Vec<f64> {
        let mut c = self.state();
        data.iter().map(|&x| c.step(x)).collect()
    }
}

fn stage_corner(order: usize, cutoff: f64) -> f64 {
    cutoff / (2f64.powf(1.0 / order as f64) - 1.0).sqrt()
}

/// Running state of one filtered channel.
#[derive(Debug, Clone)]
pub struct Cascade {
    alpha: f64,
    stages: Vec<f64>,
}

impl Cascade {
    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        let mut v = x;
        for s in self.stages.iter_mut() {
            *s += self.alpha * (v - *s);
            v = *s;
        }
        v
    }
}

/// Streaming decimator: optional anti-alias cascade followed by keeping
/// every `factor`-th sample (the last of each block).
#[derive(Debug, Clone)]
pub struct Decimator {
    factor: usize,
    counter: usize,
    filter: Option<Cascade>,
}

impl Decimator {
    pub fn new(factor: usize, filter: Option<&LowPass>) -> Result<Self> {
        if factor == 0 {
            return Err(invalid("decimation", "must be >= 1"));
        }
        Ok(Self {
            factor,
            counter: 0,
            filter: filter.map(LowPass::state),
        })
    }

    #[inline]
    pub fn push(&mut self, x: f64) -> Option<f64> {
        let y = match &mut self.filter {
            Some(c) => c.step(x),
            None => x,
        };
        self.counter += 1;
        if self.counter == self.factor {
            self.counter = 0;
            Some(y)
        } else {
            None
        }
    }
}

pub fn decimate(data: &[f64], factor: usize, filter: Option<&LowPass>) -> Result<Vec<f64>> {
    let mut d = Decimator::new(factor, filter)?;
    Ok(data.iter().filter_map(|&x| d.push(x)).collect())
}

/// Integer ratio `high / low`, or an error when the rates are not commensurate.
pub fn integer_ratio(high: f64, low: f64, name: &'static str) -> Result<usize> {
    require_positive(name, low)?;
    if low > high * (1.0 + 1e-12) {
        return Err(invalid(name, format!("{low} Hz exceeds the input rate {high} Hz")));
    }
    let r = high / low;
    let n = r.round();
    if (r - n).abs() > 1e-9 * r {
        return Err(invalid(
            name,
            format!("input rate {high} Hz is not an integer multiple of {low} Hz"),
        ));
    }
    Ok(n as usize)
}
