//! Brute-force sphere strengths from the k-space integrals, for checking
//! the closed forms. Slow: the cost grows with r/L.

use std::f64::consts::PI;

use super::{chi, DcslParams, DdpParams};
use crate::constants::{G_NEWTON, HBAR, NUCLEON_MASS};
use crate::trapphys::ParticleSpec;

/// Upper limit of the integrals in t = kL.
const T_MAX: f64 = 9.0;
const NODES: usize = 8;

/// Sphere form factor 3(sin x − x cos x)/x³.
pub fn form_factor(x: f64) -> f64 {
    if x < 0.05 {
        let x2 = x * x;
        1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0
    } else {
        3.0 * (x.sin() - x * x.cos()) / (x * x * x)
    }
}

/// Nodes and weights of n-point Gauss-Legendre on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// ∫₀^T_MAX tⁿ e^{−t²} F(tρ)² dt by composite Gauss-Legendre.
fn radial_integral(power: i32, rho: f64) -> f64 {
    let panels = (4.0 * T_MAX * rho / PI).ceil().max(200.0) as usize;
    let (xs, ws) = gauss_legendre(NODES);
    let h = T_MAX / panels as f64;
    let mut sum = 0.0;
    for j in 0..panels {
        let mid = (j as f64 + 0.5) * h;
        for (x, w) in xs.iter().zip(&ws) {
            let t = mid + 0.5 * h * x;
            let f = form_factor(t * rho);
            sum += w * t.powi(power) * (-t * t).exp() * f * f;
        }
    }
    0.5 * h * sum
}

/// Standard CSL strength (λL³m²/(π^{3/2}m₀²))·(4π/3)∫k⁴e^{−k²L²}F(kr)²dk.
pub fn eta_csl_numeric(p: &ParticleSpec, lambda: f64, length: f64) -> f64 {
    let i = radial_integral(4, p.radius() / length);
    let ln = lambda.ln() + 2.0 * (p.mass() / NUCLEON_MASS).ln() - 2.0 * length.ln() - 1.5 * PI.ln() + (4.0 * PI / 3.0).ln();
    ln.exp() * i
}

/// dCSL sphere strength: the standard integral at L = r_C(1+χ), divided by (1+χ)³.
pub fn eta_dcsl_numeric(p: &ParticleSpec, d: &DcslParams) -> f64 {
    let c = chi(p.avg_nucleus_mass(), d.temperature, d.r_c);
    eta_csl_numeric(p, d.lambda, d.r_c * (1.0 + c)) / (1.0 + c).powi(3)
}

/// Standard DP strength (Gm²/(6π²ħ))·4π∫k²e^{−k²R₀²}F(kr)²dk.
pub fn eta_dp_numeric(p: &ParticleSpec, r0: f64) -> f64 {
    let i = radial_integral(2, p.radius() / r0);
    G_NEWTON * p.mass() * p.mass() / (6.0 * PI * PI * HBAR) * 4.0 * PI * i / r0.powi(3)
}

/// dDP sphere strength: the standard integral at L = R₀(1+χ).
pub fn eta_ddp_numeric(p: &ParticleSpec, d: &DdpParams) -> f64 {
    let c = chi(p.avg_nucleus_mass(), d.temperature, d.r0);
    eta_dp_numeric(p, d.r0 * (1.0 + c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(8);
        assert_relative_eq!(ws.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        // degree 14: ∫x¹⁴ = 2/15
        let s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(14)).sum();
        assert_relative_eq!(s, 2.0 / 15.0, max_relative = 1e-13);
    }

    #[test]
    fn form_factor_is_continuous_at_series_switch() {
        let x: f64 = 0.05;
        let direct = 3.0 * (x.sin() - x * x.cos()) / (x * x * x);
        assert_relative_eq!(form_factor(x - 1e-12), direct, max_relative = 1e-12);
    }

    #[test]
    fn point_particle_integrals() {
        // ρ → 0: ∫t⁴e^{−t²} = 3√π/8, ∫t²e^{−t²} = √π/4
        assert_relative_eq!(radial_integral(4, 1e-9), 3.0 * PI.sqrt() / 8.0, max_relative = 1e-12);
        assert_relative_eq!(radial_integral(2, 1e-9), PI.sqrt() / 4.0, max_relative = 1e-12);
    }
}
