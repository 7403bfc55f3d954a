use std::f64::consts::PI;

use super::{check, erf, ln1p_exp, ln_chi, ln_gamma, DdpParams, Strength};
use crate::constants::{G_NEWTON, HBAR};
use crate::error::Result;
use crate::trapphys::ParticleSpec;

/// Below this u = r/L the bracket is summed as a series.
const SERIES_BELOW: f64 = 0.3;

/// D(u)/u⁶ with D(u) = √π u³ erf(u) + u²(e^{−u²} − 3) + 2(1 − e^{−u²}).
/// Small u: Σ_{k≥3} d_k u^{2k−6}, d_k = (−1)^{k+1}·3(k−2)/(k!(2k−3)).
pub(crate) fn bracket_over_u6(u: f64) -> f64 {
    if u < SERIES_BELOW {
        let u2 = u * u;
        let mut sum = 0.0;
        // inv_fact = 1/k!, pw = u^{2k−6}
        let mut inv_fact = 1.0 / 6.0;
        let mut pw = 1.0;
        for k in 3..40 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let term = sign * 3.0 * (k - 2) as f64 * inv_fact / (2 * k - 3) as f64 * pw;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            inv_fact /= (k + 1) as f64;
            pw *= u2;
        }
        sum
    } else {
        let e = (-u * u).exp();
        let d = PI.sqrt() * u.powi(3) * erf(u) + u * u * (e - 3.0) - 2.0 * (e - 1.0);
        (d.ln() - 6.0 * u.ln()).exp()
    }
}

fn ln_eta_sphere(p: &ParticleSpec, r0: f64, ln_chi: f64) -> f64 {
    let ln_l = r0.ln() + ln1p_exp(ln_chi);
    let u = (p.radius().ln() - ln_l).exp();
    G_NEWTON.ln() + 2.0 * p.mass().ln() - (PI.sqrt() * HBAR).ln() - 3.0 * ln_l + bracket_over_u6(u).ln()
}

/// Collapse strength of a homogeneous sphere,
/// η = Gm²/(√π r⁶ ħ)[√π r³ erf(r/L) + L{r²(e^{−r²/L²} − 3) + 2L²(1 − e^{−r²/L²})}],
/// L = R₀(1+χ₀).
pub fn eta_ddp_sphere(p: &ParticleSpec, d: &DdpParams) -> Result<f64> {
    check(p)?;
    let lc = ln_chi(p.avg_nucleus_mass(), d.temperature, d.r0);
    Ok(ln_eta_sphere(p, d.r0, lc).exp())
}

/// Standard DP strength of a homogeneous sphere (no dissipation).
pub fn eta_dp_standard(p: &ParticleSpec, r0: f64) -> Result<f64> {
    check(p)?;
    Ok(ln_eta_sphere(p, r0, f64::NEG_INFINITY).exp())
}

/// Lattice approximation η = Gm m_a/(6√π a³ħ)·min[1, r³/L³].
/// `in_regime` is false unless a < L/10.
pub fn eta_ddp_strong(p: &ParticleSpec, d: &DdpParams) -> Result<Strength> {
    check(p)?;
    let m_a = p.avg_nucleus_mass();
    let a = p.lattice_constant();
    let ln_l = d.r0.ln() + ln1p_exp(ln_chi(m_a, d.temperature, d.r0));
    let geom = (3.0 * (p.radius().ln() - ln_l)).min(0.0);
    let ln_eta = G_NEWTON.ln() + p.mass().ln() + m_a.ln() - (6.0 * PI.sqrt() * HBAR).ln() - 3.0 * a.ln() + geom;
    Ok(Strength {
        eta: ln_eta.exp(),
        in_regime: a.ln() < ln_l - 10f64.ln(),
    })
}

/// Single-particle strength η = Gm²/(6√πħR₀³(1+χ₀)³), χ₀ evaluated with the total mass.
pub fn eta_ddp_single(p: &ParticleSpec, d: &DdpParams) -> Result<f64> {
    check(p)?;
    Ok(ln_eta_single(p, d).exp())
}

fn ln_eta_single(p: &ParticleSpec, d: &DdpParams) -> f64 {
    let ln1p = ln1p_exp(ln_chi(p.mass(), d.temperature, d.r0));
    G_NEWTON.ln() + 2.0 * p.mass().ln() - (6.0 * PI.sqrt() * HBAR).ln() - 3.0 * d.r0.ln() - 3.0 * ln1p
}

/// Collapse-induced damping γ = η·4R₀²χ₀(1+χ₀)·m_a/m in rad/s. The single
/// particle form replaces m_a by m everywhere.
pub fn gamma_ddp(p: &ParticleSpec, d: &DdpParams, single_particle: bool) -> Result<f64> {
    check(p)?;
    let m = p.mass();
    let lg = if single_particle {
        let lc = ln_chi(m, d.temperature, d.r0);
        ln_gamma(ln_eta_single(p, d), d.r0.ln(), lc, m, m)
    } else {
        let m_a = p.avg_nucleus_mass();
        let lc = ln_chi(m_a, d.temperature, d.r0);
        ln_gamma(ln_eta_sphere(p, d.r0, lc), d.r0.ln(), lc, m_a, m)
    };
    Ok(lg.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn particle() -> ParticleSpec {
        ParticleSpec::silica(231e-9).unwrap().with_mass(9.6e-17).unwrap()
    }

    #[test]
    fn series_and_direct_agree_at_handover() {
        let u = SERIES_BELOW;
        let e = (-u * u).exp();
        let direct = (PI.sqrt() * u.powi(3) * erf(u) + u * u * (e - 3.0) - 2.0 * (e - 1.0)) / u.powi(6);
        assert_relative_eq!(bracket_over_u6(u * (1.0 - 1e-15)), direct, max_relative = 1e-8);
        assert_relative_eq!(bracket_over_u6(0.0), 1.0 / 6.0, max_relative = 1e-15);
        // next coefficient is −1/20
        let small = 1e-3;
        assert_relative_eq!((bracket_over_u6(small) - 1.0 / 6.0) / (small * small), -0.05, max_relative = 1e-4);
    }

    #[test]
    fn large_sphere_tends_to_uniform_density_limit() {
        // r ≫ L: η → G m²/(r³ħ)
        let p = particle();
        let eta = eta_dp_standard(&p, 1e-15).unwrap();
        assert_relative_eq!(eta, G_NEWTON * p.mass().powi(2) / (p.radius().powi(3) * HBAR), max_relative = 1e-6);
    }

    #[test]
    fn small_sphere_matches_single_particle_shape() {
        let p = particle();
        let d = DdpParams::new(1e-3, 1e5).unwrap();
        let c = super::super::chi(p.avg_nucleus_mass(), d.temperature, d.r0);
        let want = G_NEWTON * p.mass().powi(2) / (6.0 * PI.sqrt() * HBAR * (d.r0 * (1.0 + c)).powi(3));
        // leading correction is −0.3u², u = r/L ≈ 2.3e-4
        assert_relative_eq!(eta_ddp_sphere(&p, &d).unwrap(), want, max_relative = 1e-7);
    }

    #[test]
    fn positive_and_finite_over_the_plotted_domain() {
        let p = particle();
        for i in 0..=32 {
            let r0 = 10f64.powf(-18.0 + 0.5 * i as f64);
            for j in 0..=30 {
                let t = 10f64.powf(-18.0 + j as f64);
                let d = DdpParams::new(r0, t).unwrap();
                for v in [
                    eta_ddp_sphere(&p, &d).unwrap(),
                    eta_ddp_single(&p, &d).unwrap(),
                    eta_ddp_strong(&p, &d).unwrap().eta,
                ] {
                    assert!(v > 0.0 && v.is_finite(), "R0 = {r0}, T = {t}");
                }
                let g = gamma_ddp(&p, &d, true).unwrap();
                assert!(g.is_finite() && g >= 0.0);
            }
        }
    }

    #[test]
    fn no_damping_without_dissipation() {
        let p = particle();
        // χ → 0 as 1/T, and γ ∝ η·χ
        let g = |t| gamma_ddp(&p, &DdpParams::new(1e-14, t).unwrap(), true).unwrap();
        assert_relative_eq!(g(1e40) / g(1e30), 1e-10, max_relative = 1e-9);
    }
}
