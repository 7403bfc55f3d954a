//! Physical constants (CODATA 2018) and unit conversions.

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380649e-23;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054571817e-34;
/// Elementary charge, C.
pub const E_CHARGE: f64 = 1.602176634e-19;
/// Newtonian constant of gravitation, m^3 kg^-1 s^-2.
pub const G_NEWTON: f64 = 6.67430e-11;
/// Atomic mass unit, kg. Also used as the reference nucleon mass of collapse models.
pub const AMU: f64 = 1.66053906660e-27;
/// Reference nucleon mass of the CSL family.
pub const NUCLEON_MASS: f64 = AMU;

/// Molecular mass of N2, kg.
pub const N2_MOLECULAR_MASS: f64 = 4.65e-26;

/// 1 mbar in Pa (exact).
pub const PA_PER_MBAR: f64 = 100.0;

pub fn mbar_to_pa(p: f64) -> f64 {
    p * PA_PER_MBAR
}

pub fn pa_to_mbar(p: f64) -> f64 {
    p / PA_PER_MBAR
}

/// Angular rate (rad/s) to ordinary frequency (Hz).
pub fn rad_to_hz(w: f64) -> f64 {
    w / std::f64::consts::TAU
}

pub fn hz_to_rad(f: f64) -> f64 {
    f * std::f64::consts::TAU
}
