//! Closed-form physics of the linear Paul trap, the residual gas and the
//! force-noise budget.
//!
//! Everything here is a pure function of immutable value types. Damping
//! rates are angular (rad/s); divide by 2π for the linewidth in Hz.

use std::f64::consts::PI;

use crate::constants::{AMU, E_CHARGE, HBAR, K_B, N2_MOLECULAR_MASS, PA_PER_MBAR};
use crate::error::{invalid, require_non_negative, require_positive, Axis, Error, Result};

/// Geometry, mass, charge and material constants of the levitated sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSpec {
    radius: f64,
    density: f64,
    mass: f64,
    mass_overridden: bool,
    charge_count: u32,
    avg_nucleus_mass: f64,
    lattice_constant: f64,
}

/// Default building-block mass of the bulk collapse-model formulas (one nucleon).
pub const DEFAULT_NUCLEUS_MASS: f64 = AMU;
/// Default lattice constant of amorphous silica, m.
pub const DEFAULT_LATTICE_CONSTANT: f64 = 0.4e-9;
/// Nominal density of the silica nanospheres, kg/m^3.
pub const SILICA_DENSITY: f64 = 1850.0;

impl ParticleSpec {
    /// Homogeneous sphere; the mass follows from radius and density.
    pub fn new(radius: f64, density: f64) -> Result<Self> {
        require_positive("radius", radius)?;
        require_positive("density", density)?;
        Ok(Self {
            radius,
            density,
            mass: sphere_mass(radius, density),
            mass_overridden: false,
            charge_count: 0,
            avg_nucleus_mass: DEFAULT_NUCLEUS_MASS,
            lattice_constant: DEFAULT_LATTICE_CONSTANT,
        })
    }

    pub fn silica(radius: f64) -> Result<Self> {
        Self::new(radius, SILICA_DENSITY)
    }

    /// Replace the geometric mass by a measured value.
    pub fn with_mass(mut self, mass: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        self.mass = mass;
        self.mass_overridden = true;
        Ok(self)
    }

    pub fn with_charge_count(mut self, n: u32) -> Self {
        self.charge_count = n;
        self
    }

    pub fn with_nucleus_mass(mut self, m_a: f64) -> Result<Self> {
        require_positive("avg_nucleus_mass", m_a)?;
        self.avg_nucleus_mass = m_a;
        Ok(self)
    }

    pub fn with_lattice_constant(mut self, a: f64) -> Result<Self> {
        require_positive("lattice_constant", a)?;
        self.lattice_constant = a;
        Ok(self)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn density(&self) -> f64 {
        self.density
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn mass_overridden(&self) -> bool {
        self.mass_overridden
    }
    pub fn charge_count(&self) -> u32 {
        self.charge_count
    }
    /// Total charge, C.
    pub fn charge(&self) -> f64 {
        self.charge_count as f64 * E_CHARGE
    }
    pub fn avg_nucleus_mass(&self) -> f64 {
        self.avg_nucleus_mass
    }
    pub fn lattice_constant(&self) -> f64 {
        self.lattice_constant
    }
}

pub fn sphere_mass(radius: f64, density: f64) -> f64 {
    4.0 / 3.0 * PI * density * radius.powi(3)
}

/// Residual gas surrounding the particle. Pressure is stored in Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasEnvironment {
    pressure: f64,
    temperature: f64,
    molecular_mass: f64,
}

impl GasEnvironment {
    pub fn new(pressure_pa: f64, temperature: f64, molecular_mass: f64) -> Result<Self> {
        require_non_negative("pressure", pressure_pa)?;
        require_positive("temperature", temperature)?;
        require_positive("molecular_mass", molecular_mass)?;
        Ok(Self {
            pressure: pressure_pa,
            temperature,
            molecular_mass,
        })
    }

    /// Nitrogen at the given pressure (mbar) and temperature.
    pub fn nitrogen_mbar(pressure_mbar: f64, temperature: f64) -> Result<Self> {
        Self::new(pressure_mbar * PA_PER_MBAR, temperature, N2_MOLECULAR_MASS)
    }

    pub fn with_pressure_pa(self, pressure_pa: f64) -> Result<Self> {
        Self::new(pressure_pa, self.temperature, self.molecular_mass)
    }

    pub fn pressure(&self) -> f64 {
        self.pressure
    }
    pub fn pressure_mbar(&self) -> f64 {
        self.pressure / PA_PER_MBAR
    }
    pub fn temperature(&self) -> f64 {
        self.temperature
    }
    pub fn molecular_mass(&self) -> f64 {
        self.molecular_mass
    }

    /// Mean thermal speed of the gas molecules, m/s.
    pub fn thermal_velocity(&self) -> f64 {
        (8.0 * K_B * self.temperature / (PI * self.molecular_mass)).sqrt()
    }
}

/// Electrode geometry and drive of the linear Paul trap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    /// Centre to AC electrode distance, m.
    pub r_o: f64,
    /// Centre to DC end-cap distance, m.
    pub z_o: f64,
    /// Quadrupole efficiency of the AC potential.
    pub eta_ac: f64,
    /// Quadratic efficiency of the DC potential.
    pub kappa_dc: f64,
    /// DC end-cap voltage, V.
    pub u_dc: f64,
    /// AC amplitude, V.
    pub v_ac: f64,
    /// Drive angular frequency, rad/s.
    pub drive_angular_freq: f64,
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("r_o", self.r_o)?;
        require_positive("z_o", self.z_o)?;
        for (name, v) in [("eta_ac", self.eta_ac), ("kappa_dc", self.kappa_dc)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(invalid(name, format!("must lie in (0, 1], got {v}")));
            }
        }
        if !self.u_dc.is_finite() || !self.v_ac.is_finite() {
            return Err(invalid("voltage", "voltages must be finite"));
        }
        require_positive("drive_angular_freq", self.drive_angular_freq)
    }

    pub fn drive_period(&self) -> f64 {
        std::f64::consts::TAU / self.drive_angular_freq
    }
}

/// Mathieu stability parameters along (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathieuParams {
    pub a: [f64; 3],
    pub q: [f64; 3],
}

impl MathieuParams {
    pub fn radicand(&self, axis: Axis) -> f64 {
        let i = axis.index();
        self.a[i] + 0.5 * self.q[i] * self.q[i]
    }
}

pub fn mathieu_params(trap: &TrapConfig, particle: &ParticleSpec) -> Result<MathieuParams> {
    trap.validate()?;
    let charge = particle.charge();
    if charge <= 0.0 {
        return Err(invalid("charge_count", "particle must carry charge to be trapped"));
    }
    let q_over_m = charge / particle.mass();
    let wd2 = trap.drive_angular_freq * trap.drive_angular_freq;
    let a_xy = -q_over_m * 4.0 * trap.kappa_dc * trap.u_dc / (trap.z_o * trap.z_o * wd2);
    let q_x = q_over_m * 2.0 * trap.eta_ac * trap.v_ac / (trap.r_o * trap.r_o * wd2);
    Ok(MathieuParams {
        a: [a_xy, a_xy, -2.0 * a_xy],
        q: [q_x, -q_x, 0.0],
    })
}

/// Pseudopotential secular frequency of a single axis, rad/s.
pub fn secular_frequency(mp: &MathieuParams, drive_angular_freq: f64, axis: Axis) -> Result<f64> {
    require_positive("drive_angular_freq", drive_angular_freq)?;
    let radicand = mp.radicand(axis);
    if radicand <= 0.0 {
        return Err(Error::Untrapped { axis, radicand });
    }
    Ok(0.5 * drive_angular_freq * radicand.sqrt())
}

/// Secular angular frequencies on all three axes; fails on the first untrapped axis.
pub fn secular_frequencies(mp: &MathieuParams, drive_angular_freq: f64) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for axis in Axis::ALL {
        out[axis.index()] = secular_frequency(mp, drive_angular_freq, axis)?;
    }
    Ok(out)
}

/// Above this |q| the pseudopotential description is no longer accurate.
pub const PSEUDO_POTENTIAL_Q_LIMIT: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub trapped: [bool; 3],
    pub max_abs_q: f64,
    pub pseudo_potential_valid: bool,
}

impl StabilityReport {
    pub fn all_trapped(&self) -> bool {
        self.trapped.iter().all(|&t| t)
    }
}

pub fn stability_check(mp: &MathieuParams) -> StabilityReport {
    let trapped = Axis::ALL.map(|ax| mp.radicand(ax) > 0.0);
    let max_abs_q = mp.q.iter().fold(0.0_f64, |acc, q| acc.max(q.abs()));
    StabilityReport {
        trapped,
        max_abs_q,
        pseudo_potential_valid: max_abs_q <= PSEUDO_POTENTIAL_Q_LIMIT,
    }
}

/// Epstein damping rate (rad/s) from inelastic gas collisions.
pub fn gas_damping(particle: &ParticleSpec, gas: &GasEnvironment) -> f64 {
    let r = particle.radius();
    let v_t = gas.thermal_velocity();
    4.0 * PI * gas.molecular_mass() * r * r * v_t * gas.pressure() / (3.0 * K_B * gas.temperature() * particle.mass()) * (1.0 + PI / 8.0)
}

/// Thermal force noise S_F = 2 k_B T m γ, N^2/Hz.
pub fn thermal_force_psd(temperature: f64, mass: f64, gamma: f64) -> f64 {
    2.0 * K_B * temperature * mass * gamma
}

/// Force noise from electrode voltage noise, S_ff = (n e)^2 S_VV / D^2.
pub fn voltage_noise_force_psd(charge_count: u32, s_vv: f64, distance: f64) -> Result<f64> {
    require_positive("distance", distance)?;
    require_non_negative("s_vv", s_vv)?;
    let q = charge_count as f64 * E_CHARGE;
    Ok(q * q * s_vv / (distance * distance))
}

/// First-order expansion of the AC electrode field near the trap centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldExpansion {
    /// Characteristic distance of the AC electrodes, m.
    pub d: f64,
    /// Gradient length of the first-order term, m.
    pub d1: f64,
}

/// Field per applied volt, (E_x/V, E_y/V) in 1/m, at the mean particle position.
pub fn field_gradient(fields: FieldExpansion, mean_pos: (f64, f64)) -> [f64; 2] {
    [1.0 / fields.d + mean_pos.0 / fields.d1, 1.0 / fields.d + mean_pos.1 / fields.d1]
}

/// Heating rate in quanta/s produced by a white force noise.
pub fn heating_rate(force_psd: f64, mass: f64, omega: f64) -> f64 {
    force_psd / (2.0 * mass * HBAR * omega)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEntry {
    pub label: String,
    pub force_psd: f64,
    pub heating_rate: f64,
}

/// Force-noise budget and the effective temperature it implies versus pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBudget {
    pub entries: Vec<NoiseEntry>,
    pub reference_secular_freq: f64,
    pub mass: f64,
    pub temperature: f64,
    /// Sum of the non-thermal entries.
    pub excess_force_psd: f64,
    /// Thermal force PSD per Pa of pressure (it is linear in pressure).
    pub thermal_psd_per_pa: f64,
}

impl NoiseBudget {
    pub fn thermal_force_psd_at(&self, pressure_pa: f64) -> f64 {
        self.thermal_psd_per_pa * pressure_pa
    }

    /// T_eff(P) = T (1 + S_excess / S_thermal(P)).
    pub fn effective_temperature(&self, pressure_pa: f64) -> f64 {
        if self.excess_force_psd == 0.0 {
            return self.temperature;
        }
        self.temperature * (1.0 + self.excess_force_psd / self.thermal_force_psd_at(pressure_pa))
    }

    /// Pressure (Pa) at which the excess noise equals the thermal noise.
    pub fn three_db_pressure(&self) -> f64 {
        self.excess_force_psd / self.thermal_psd_per_pa
    }

    pub fn three_db_pressure_mbar(&self) -> f64 {
        self.three_db_pressure() / PA_PER_MBAR
    }
}

/// Annotates excess force-noise sources with heating rates and adds the
/// thermal contribution at the gas pressure as the first entry.
pub fn noise_budget(sources: &[(String, f64)], particle: &ParticleSpec, omega_o: f64, gas: &GasEnvironment) -> Result<NoiseBudget> {
    require_positive("omega_o", omega_o)?;
    let m = particle.mass();
    let unit_gas = gas.with_pressure_pa(1.0)?;
    let thermal_psd_per_pa = thermal_force_psd(gas.temperature(), m, gas_damping(particle, &unit_gas));

    let thermal = thermal_psd_per_pa * gas.pressure();
    let mut entries = vec![NoiseEntry {
        label: format!("thermal ({:e} mbar)", gas.pressure_mbar()),
        force_psd: thermal,
        heating_rate: heating_rate(thermal, m, omega_o),
    }];
    let mut excess = 0.0;
    for (label, s) in sources {
        require_non_negative("force_psd", *s)?;
        excess += s;
        entries.push(NoiseEntry {
            label: label.clone(),
            force_psd: *s,
            heating_rate: heating_rate(*s, m, omega_o),
        });
    }
    Ok(NoiseBudget {
        entries,
        reference_secular_freq: omega_o,
        mass: m,
        temperature: gas.temperature(),
        excess_force_psd: excess,
        thermal_psd_per_pa,
    })
}

/// Stationary position variance of a thermal oscillator, k_B T / (m ω²).
pub fn thermal_variance(temperature: f64, mass: f64, omega: f64) -> f64 {
    K_B * temperature / (mass * omega * omega)
}
