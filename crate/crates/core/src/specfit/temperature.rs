use crate::constants::K_B;
use crate::error::{invalid, require_positive, Result};
use crate::series::{mean, variance, QuadratureSeries, TimeSeries};

/// Centre-of-mass temperature from the motional variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureEstimate {
    pub temperature: f64,
    /// One standard error, K.
    pub stderr: f64,
    /// Displacement variance σ², m².
    pub variance: f64,
    /// Independent samples behind the estimate.
    pub effective_samples: f64,
}

/// Number of independent variance samples in a record of `duration`
/// seconds with energy damping γ: the squared amplitude decorrelates as
/// e^{−γτ}, so a record holds γT/2 independent values. Without γ every
/// sample is taken as independent.
pub fn effective_samples(duration: f64, gamma: Option<f64>, n: usize) -> f64 {
    match gamma {
        Some(g) if g > 0.0 => (0.5 * g * duration).min(n as f64),
        _ => n as f64,
    }
}

fn estimate(sigma2: f64, mass: f64, omega: f64, n_eff: f64) -> TemperatureEstimate {
    let t = mass * omega * omega * sigma2 / K_B;
    TemperatureEstimate {
        temperature: t,
        stderr: t / n_eff.sqrt(),
        variance: sigma2,
        effective_samples: n_eff,
    }
}

/// T = mω²σ²/k_B with σ² = ⟨R²⟩/2.
pub fn temperature_from_quadratures(q: &QuadratureSeries, mass: f64, omega: f64, gamma: Option<f64>) -> Result<TemperatureEstimate> {
    require_positive("mass", mass)?;
    require_positive("omega", omega)?;
    if q.len() < 2 {
        return Err(invalid("record", "need at least two samples"));
    }
    let sigma2 = 0.5 * mean(&q.r_squared());
    Ok(estimate(sigma2, mass, omega, effective_samples(q.duration(), gamma, q.len())))
}

/// T = mω²σ²/k_B with σ² the sample variance of the displacement.
pub fn temperature_from_displacement(ts: &TimeSeries, mass: f64, omega: f64, gamma: Option<f64>) -> Result<TemperatureEstimate> {
    require_positive("mass", mass)?;
    require_positive("omega", omega)?;
    if ts.len() < 2 {
        return Err(invalid("record", "need at least two samples"));
    }
    Ok(estimate(
        variance(&ts.values),
        mass,
        omega,
        effective_samples(ts.duration(), gamma, ts.len()),
    ))
}
