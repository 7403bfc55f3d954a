use std::f64::consts::TAU;

use super::{check, ln1p_exp, ln_chi, ln_gamma, DcslParams, Strength};
use crate::constants::{HBAR, NUCLEON_MASS};
use crate::error::Result;
use crate::trapphys::ParticleSpec;

/// Below this u = r²/L² the bracket is summed as a series.
const SERIES_BELOW: f64 = 0.1;

/// S(u) = B(u)/u² with B(u) = 1 − 2/u + e^{−u}(1 + 2/u).
/// Small u: S = Σ_{k≥2} (−1)^k (k−1)/(k+1)! u^{k−2} = 1/6 − u/12 + u²/40 − …
pub(crate) fn bracket_over_u2(u: f64) -> f64 {
    if u < SERIES_BELOW {
        let mut sum = 0.0;
        // (−1)^k u^{k−2} / (k+1)!, starting at k = 2
        let mut pw = 1.0 / 6.0;
        for k in 2..40 {
            let term = (k - 1) as f64 * pw;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            pw *= -u / (k + 2) as f64;
        }
        sum
    } else {
        let e = (-u).exp();
        (1.0 - 2.0 / u + e * (1.0 + 2.0 / u)) / (u * u)
    }
}

fn ln_eta_sphere(p: &ParticleSpec, lambda: f64, r_c: f64, ln_chi: f64) -> f64 {
    let ln1p = ln1p_exp(ln_chi);
    let ln_l = r_c.ln() + ln1p;
    let u = (2.0 * (p.radius().ln() - ln_l)).exp();
    3f64.ln() + lambda.ln() + 2.0 * r_c.ln() + 2.0 * p.mass().ln() - ln1p - 4.0 * ln_l - 2.0 * NUCLEON_MASS.ln() + bracket_over_u2(u).ln()
}

/// Collapse strength of a homogeneous sphere,
/// η = 3λr_C²m²/((1+χ)r⁴m₀²)·[1 − 2L²/r² + e^{−r²/L²}(1 + 2L²/r²)], L = r_C(1+χ).
pub fn eta_dcsl_sphere(p: &ParticleSpec, d: &DcslParams) -> Result<f64> {
    check(p)?;
    let lc = ln_chi(p.avg_nucleus_mass(), d.temperature, d.r_c);
    Ok(ln_eta_sphere(p, d.lambda, d.r_c, lc).exp())
}

/// Standard CSL strength of a homogeneous sphere (no dissipation).
pub fn eta_csl_standard(p: &ParticleSpec, lambda: f64, r_c: f64) -> Result<f64> {
    check(p)?;
    Ok(ln_eta_sphere(p, lambda, r_c, f64::NEG_INFINITY).exp())
}

/// Lattice approximation η = m m_a λ r_C/(2a³m₀²(1+χ)²)·min[1, r³/L³].
/// `in_regime` is false unless a < L/10.
pub fn eta_dcsl_strong(p: &ParticleSpec, d: &DcslParams) -> Result<Strength> {
    check(p)?;
    let m_a = p.avg_nucleus_mass();
    let a = p.lattice_constant();
    let ln1p = ln1p_exp(ln_chi(m_a, d.temperature, d.r_c));
    let ln_l = d.r_c.ln() + ln1p;
    let geom = (3.0 * (p.radius().ln() - ln_l)).min(0.0);
    let ln_eta =
        p.mass().ln() + m_a.ln() + d.lambda.ln() + d.r_c.ln() - 2f64.ln() - 3.0 * a.ln() - 2.0 * NUCLEON_MASS.ln() - 2.0 * ln1p + geom;
    Ok(Strength {
        eta: ln_eta.exp(),
        in_regime: a.ln() < ln_l - 10f64.ln(),
    })
}

/// Single-particle strength η = λm²/(2m₀²r_C²(1+χ)⁵), χ evaluated with the total mass.
pub fn eta_dcsl_single(p: &ParticleSpec, d: &DcslParams) -> Result<f64> {
    check(p)?;
    Ok(ln_eta_single(p, d).exp())
}

fn ln_eta_single(p: &ParticleSpec, d: &DcslParams) -> f64 {
    let ln1p = ln1p_exp(ln_chi(p.mass(), d.temperature, d.r_c));
    d.lambda.ln() + 2.0 * p.mass().ln() - 2f64.ln() - 2.0 * NUCLEON_MASS.ln() - 2.0 * d.r_c.ln() - 5.0 * ln1p
}

/// Collapse-induced damping γ = η·4r_C²χ(1+χ)·m_a/m in rad/s. The single
/// particle form replaces m_a by m everywhere.
pub fn gamma_dcsl(p: &ParticleSpec, d: &DcslParams, single_particle: bool) -> Result<f64> {
    check(p)?;
    let m = p.mass();
    let lg = if single_particle {
        let lc = ln_chi(m, d.temperature, d.r_c);
        ln_gamma(ln_eta_single(p, d), d.r_c.ln(), lc, m, m)
    } else {
        let m_a = p.avg_nucleus_mass();
        let lc = ln_chi(m_a, d.temperature, d.r_c);
        ln_gamma(ln_eta_sphere(p, d.lambda, d.r_c, lc), d.r_c.ln(), lc, m_a, m)
    };
    Ok(lg.exp())
}

/// Force noise spectral density S(ω) = ħ²η[1 + κ²m²(γ_t² + ω²)] with
/// κ = γ_dCSL/(2ħη) and γ_t = γ_gas + γ_dCSL, using the sphere strength.
pub fn s_dcsl_psd(omega: f64, p: &ParticleSpec, d: &DcslParams, gamma_gas: f64) -> Result<f64> {
    let eta = eta_dcsl_sphere(p, d)?;
    let g = gamma_dcsl(p, d, false)?;
    let kappa = g / (2.0 * HBAR * eta);
    let gt = gamma_gas + g;
    let m = p.mass();
    Ok(HBAR * HBAR * eta * (1.0 + kappa * kappa * m * m * (gt * gt + omega * omega)))
}

/// λ that makes γ/2π equal `gamma_hz` at fixed (r_C, T); γ is linear in λ.
pub fn lambda_threshold(p: &ParticleSpec, r_c: f64, temperature: f64, gamma_hz: f64, single_particle: bool) -> Result<f64> {
    let unit = gamma_dcsl(p, &DcslParams::new(1.0, r_c, temperature)?, single_particle)?;
    Ok(gamma_hz * TAU / unit)
}
