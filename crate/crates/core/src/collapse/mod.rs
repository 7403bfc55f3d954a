//! Dissipative collapse models: collapse strengths η, the induced damping
//! rates γ, and exclusion maps against a measured damping bound.
//!
//! Both models carry a noise temperature; as it goes to infinity the
//! dissipative strength reduces to the standard one and the damping
//! vanishes. Every function evaluates its prefactors as logarithms, so the
//! full parameter ranges of interest (lengths 1e-18..1e-2 m, temperatures
//! 1e-18..1e12 K) stay finite.
//!
//! ```
//! use levlw::collapse::{gamma_dcsl, DcslParams};
//! use levlw::trapphys::ParticleSpec;
//!
//! let p = ParticleSpec::silica(231e-9).unwrap().with_mass(9.6e-17).unwrap();
//! let d = DcslParams::new(1e-14, 1.5e-6, 1e-7).unwrap();
//! let g_hz = gamma_dcsl(&p, &d, false).unwrap() / std::f64::consts::TAU;
//! assert!(g_hz > 1e-5 && g_hz < 1e-4);
//! ```

mod dcsl;
mod ddp;
mod exclusion;
pub mod reference;

pub use dcsl::{eta_csl_standard, eta_dcsl_single, eta_dcsl_sphere, eta_dcsl_strong, gamma_dcsl, lambda_threshold, s_dcsl_psd};
pub use ddp::{eta_ddp_single, eta_ddp_sphere, eta_ddp_strong, eta_dp_standard, gamma_ddp};
pub use exclusion::{exclusion_map, exclusion_scan, BoundaryPoint, ExclusionGrid, GridAxis, GridModel, Interval, MIN_AXIS_POINTS};

use crate::constants::{HBAR, K_B};
use crate::error::{require_non_negative, require_positive, Result};

/// dCSL parameters: collapse rate λ (1/s), correlation length r_C (m) and
/// noise temperature (K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcslParams {
    pub lambda: f64,
    pub r_c: f64,
    pub temperature: f64,
}

impl DcslParams {
    pub fn new(lambda: f64, r_c: f64, temperature: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        require_positive("r_c", r_c)?;
        require_positive("temperature", temperature)?;
        Ok(Self { lambda, r_c, temperature })
    }
}

/// dDP parameters: cutoff R₀ (m) and noise temperature (K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdpParams {
    pub r0: f64,
    pub temperature: f64,
}

impl DdpParams {
    pub fn new(r0: f64, temperature: f64) -> Result<Self> {
        require_positive("r0", r0)?;
        require_positive("temperature", temperature)?;
        Ok(Self { r0, temperature })
    }
}

/// Upper limit on collapse-induced damping, as γ/2π in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredBound {
    pub gamma_cm_upper_hz: f64,
    pub confidence: f64,
}

impl MeasuredBound {
    /// A zero bound is accepted and excludes every point with non-zero damping.
    pub fn new(gamma_cm_upper_hz: f64, confidence: f64) -> Result<Self> {
        require_non_negative("gamma_cm_upper_hz", gamma_cm_upper_hz)?;
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(crate::error::invalid("confidence", format!("must be in (0, 1), got {confidence}")));
        }
        Ok(Self {
            gamma_cm_upper_hz,
            confidence,
        })
    }
}

/// Which form of the collapse strength to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Homogeneous sphere built from nuclei of mass m_a.
    Sphere,
    /// Lattice approximation for a ≪ L.
    Strong,
    /// Depends on the total mass only; m_a → m and a → r.
    SingleParticle,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sphere" => Some(Self::Sphere),
            "strong" => Some(Self::Strong),
            "single" | "single_particle" | "single-particle" => Some(Self::SingleParticle),
            _ => None,
        }
    }
}

/// η with the flag telling whether the approximation it came from applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strength {
    pub eta: f64,
    pub in_regime: bool,
}

/// χ = ħ²/(8 m_a k_B T L²).
pub fn chi(m_a: f64, temperature: f64, length: f64) -> f64 {
    ln_chi(m_a, temperature, length).exp()
}

pub(crate) fn ln_chi(m_a: f64, temperature: f64, length: f64) -> f64 {
    2.0 * HBAR.ln() - (8.0 * m_a * K_B).ln() - temperature.ln() - 2.0 * length.ln()
}

/// ln(1 + χ) from ln χ without overflow.
pub(crate) fn ln1p_exp(ln_x: f64) -> f64 {
    if ln_x > 35.0 {
        ln_x + (-ln_x).exp().ln_1p()
    } else {
        ln_x.exp().ln_1p()
    }
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Damping shared by both models: γ = η·4L₀²χ(1+χ)·m_a/m in log form,
/// with L₀ the bare length (r_C or R₀).
pub(crate) fn ln_gamma(ln_eta: f64, ln_len: f64, ln_chi: f64, m_a: f64, m: f64) -> f64 {
    ln_eta + 4f64.ln() + 2.0 * ln_len + ln_chi + ln1p_exp(ln_chi) + m_a.ln() - m.ln()
}

pub(crate) fn check(p: &crate::trapphys::ParticleSpec) -> Result<()> {
    require_positive("mass", p.mass())?;
    require_positive("radius", p.radius())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn erf_matches_taylor_series() {
        // 2/√π Σ (−1)ⁿ x^{2n+1} / (n!(2n+1)), 50 terms
        for i in 0..=40 {
            let x = -2.0 + 0.1 * i as f64;
            let mut term = x;
            let mut sum = x;
            for n in 1..50 {
                term *= -x * x / n as f64;
                sum += term / (2 * n + 1) as f64;
            }
            let want = sum * 2.0 / std::f64::consts::PI.sqrt();
            assert!((erf(x) - want).abs() <= 1e-14 * want.abs().max(1e-300), "x = {x}");
        }
    }

    #[test]
    fn chi_scales_inversely_with_temperature() {
        let a = chi(3.3e-26, 1e-7, 1.5e-6);
        let b = chi(3.3e-26, 2e-7, 1.5e-6);
        assert_relative_eq!(a * 1e-7, b * 2e-7, max_relative = 1e-14);
        assert!(chi(3.3e-26, 1e30, 1.5e-6) < 1e-30);
    }

    #[test]
    fn ln1p_exp_is_accurate_at_both_ends() {
        assert_relative_eq!(ln1p_exp(-50.0), (-50f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(ln1p_exp(100.0), 100.0, max_relative = 1e-15);
        assert_relative_eq!(ln1p_exp(0.0), 2f64.ln(), max_relative = 1e-15);
    }
}
