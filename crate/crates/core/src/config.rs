//! TOML run configuration.
//!
//! Every section is optional except where a subcommand needs it; unknown
//! keys are rejected. Semantic errors name the offending key and, when the
//! key is present in the file, its line.
//!
//! ```
//! let cfg = levlw::config::RunConfig::from_toml_str(r#"
//!     seed = 7
//!     [particle]
//!     radius_m = 231e-9
//!     mass_kg = 9.6e-17
//!     [sim]
//!     engine = "quadrature"
//!     duration_s = 1000.0
//!     output_rate_hz = 2.0
//!     frequencies_hz = [327.0]
//! "#).unwrap();
//! assert_eq!(cfg.seed, 7);
//! assert_eq!(cfg.sim.unwrap().engine, "quadrature");
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::collapse::{MeasuredBound, Variant};
use crate::constants::{AMU, N2_MOLECULAR_MASS, PA_PER_MBAR};
use crate::error::{Axis, Error, Result};
use crate::simulate::{DriftProfile, DriftShape, Engine};
use crate::trapphys::{GasEnvironment, ParticleSpec, TrapConfig, DEFAULT_LATTICE_CONSTANT, SILICA_DENSITY};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub particle: ParticleSection,
    #[serde(default)]
    pub gas: GasSection,
    pub trap: Option<TrapSection>,
    #[serde(default)]
    pub noise: NoiseSection,
    pub sim: Option<SimSection>,
    pub lockin: Option<LockinSection>,
    #[serde(default)]
    pub fit: FitSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub bounds: BoundsSection,
    /// Source text, kept for diagnostics and the manifest hash.
    #[serde(skip)]
    pub source: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSection {
    #[serde(default = "default_radius")]
    pub radius_m: f64,
    #[serde(default = "default_density")]
    pub density_kg_m3: f64,
    pub mass_kg: Option<f64>,
    #[serde(default)]
    pub charge_count: u32,
    #[serde(default = "default_nucleus_mass")]
    pub nucleus_mass_u: f64,
    #[serde(default = "default_lattice")]
    pub lattice_constant_m: f64,
}

impl Default for ParticleSection {
    fn default() -> Self {
        Self {
            radius_m: default_radius(),
            density_kg_m3: default_density(),
            mass_kg: None,
            charge_count: 0,
            nucleus_mass_u: default_nucleus_mass(),
            lattice_constant_m: default_lattice(),
        }
    }
}

fn default_radius() -> f64 {
    231e-9
}
fn default_density() -> f64 {
    SILICA_DENSITY
}
fn default_nucleus_mass() -> f64 {
    1.0
}
fn default_lattice() -> f64 {
    DEFAULT_LATTICE_CONSTANT
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    #[serde(default = "default_pressure")]
    pub pressure_mbar: f64,
    #[serde(default = "default_temperature")]
    pub temperature_k: f64,
    #[serde(default = "default_molecular_mass")]
    pub molecular_mass_kg: f64,
}

impl Default for GasSection {
    fn default() -> Self {
        Self {
            pressure_mbar: default_pressure(),
            temperature_k: default_temperature(),
            molecular_mass_kg: default_molecular_mass(),
        }
    }
}

fn default_pressure() -> f64 {
    1e-4
}
fn default_temperature() -> f64 {
    293.0
}
fn default_molecular_mass() -> f64 {
    N2_MOLECULAR_MASS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub r_o_m: f64,
    pub z_o_m: f64,
    pub eta_ac: f64,
    pub kappa_dc: f64,
    pub u_dc_v: f64,
    pub v_ac_v: f64,
    pub drive_freq_hz: f64,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Electrode voltage noise, V²/Hz.
    #[serde(default)]
    pub voltage_psd_v2_per_hz: f64,
    pub electrode_distance_m: Option<f64>,
    /// Additional white force noise, N²/Hz.
    #[serde(default)]
    pub extra_force_psd: f64,
    /// Detection floor, one-sided units²/Hz.
    #[serde(default)]
    pub measurement_floor: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub engine: String,
    pub duration_s: f64,
    pub output_rate_hz: f64,
    pub solver_step_s: Option<f64>,
    #[serde(default = "default_axes")]
    pub axes: Vec<String>,
    /// Secular frequencies, one per axis. Taken from `[trap]` when absent.
    pub frequencies_hz: Option<Vec<f64>>,
    /// Linewidth γ/2π; defaults to gas damping at the configured pressure.
    pub gamma_hz: Option<f64>,
    /// 0 disables the anti-alias stage.
    #[serde(default = "default_anti_alias")]
    pub anti_alias_order: usize,
    pub drift: Option<DriftSection>,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_axes() -> Vec<String> {
    vec!["x".into()]
}
fn default_anti_alias() -> usize {
    4
}
fn default_format() -> String {
    "both".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    pub shape: String,
    #[serde(default)]
    pub amplitude_hz: f64,
    #[serde(default)]
    pub period_s: f64,
    #[serde(default)]
    pub linear_rate_hz_per_s: f64,
    #[serde(default)]
    pub offset_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LockinSection {
    pub f_lo_hz: Option<f64>,
    pub cutoff_hz: f64,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_decimation")]
    pub decimation: usize,
}

fn default_order() -> usize {
    crate::demod::DEFAULT_FILTER_ORDER
}
fn default_decimation() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Welch segment length; chosen from the expected linewidth when absent.
    pub segment_length: Option<usize>,
    #[serde(default = "default_overlap")]
    pub overlap: f64,
    pub f_min_hz: Option<f64>,
    pub f_max_hz: Option<f64>,
    /// Linewidth guess γ/2π, Hz.
    pub gamma_guess_hz: Option<f64>,
    #[serde(default = "default_histogram_bins")]
    pub histogram_bins: usize,
    /// Also fit the displacement spectrum ("r2", "displacement" or "both").
    #[serde(default = "default_method")]
    pub method: String,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            segment_length: None,
            overlap: default_overlap(),
            f_min_hz: None,
            f_max_hz: None,
            gamma_guess_hz: None,
            histogram_bins: default_histogram_bins(),
            method: default_method(),
        }
    }
}

fn default_overlap() -> f64 {
    0.5
}
fn default_histogram_bins() -> usize {
    40
}
fn default_method() -> String {
    "both".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub pressures_mbar: Vec<f64>,
    /// "simulate" runs the quadrature engine at every pressure;
    /// "synthetic" draws linewidths from the error model below;
    /// "file" reads `points_csv`.
    #[serde(default = "default_sweep_mode")]
    pub mode: String,
    pub points_csv: Option<PathBuf>,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Excess damping γ_exc/2π added at every pressure, Hz.
    #[serde(default)]
    pub excess_gamma_hz: f64,
    /// Synthetic mode: slope k, Hz/mbar. Defaults to gas damping per mbar.
    pub slope_hz_per_mbar: Option<f64>,
    /// Synthetic mode: σ(P) = sigma_ref_hz·(P/p_ref_mbar)^sigma_exponent.
    #[serde(default = "default_sigma_ref")]
    pub sigma_ref_hz: f64,
    #[serde(default = "default_p_ref")]
    pub p_ref_mbar: f64,
    #[serde(default = "default_sigma_exponent")]
    pub sigma_exponent: f64,
    #[serde(default)]
    pub bootstrap_resamples: usize,
}

fn default_sweep_mode() -> String {
    "simulate".into()
}
fn default_confidence() -> f64 {
    0.95
}
fn default_sigma_ref() -> f64 {
    23e-6
}
fn default_p_ref() -> f64 {
    3e-7
}
fn default_sigma_exponent() -> f64 {
    0.73
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    #[serde(default = "default_bound")]
    pub gamma_cm_upper_hz: f64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_dcsl_temperature")]
    pub dcsl_temperature_k: f64,
    #[serde(default = "default_lambda_range")]
    pub lambda_range: [f64; 2],
    #[serde(default = "default_r_c_range")]
    pub r_c_range_m: [f64; 2],
    #[serde(default = "default_r0_range")]
    pub r0_range_m: [f64; 2],
    #[serde(default = "default_ddp_t_range")]
    pub ddp_temperature_range_k: [f64; 2],
    #[serde(default = "default_dcsl_variant")]
    pub dcsl_variant: String,
    #[serde(default = "default_ddp_variant")]
    pub ddp_variant: String,
    /// Temperature of the one-dimensional R₀ scan.
    #[serde(default = "default_scan_temperature")]
    pub ddp_scan_temperature_k: f64,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self {
            gamma_cm_upper_hz: default_bound(),
            confidence: default_confidence(),
            grid_points: default_grid_points(),
            dcsl_temperature_k: default_dcsl_temperature(),
            lambda_range: default_lambda_range(),
            r_c_range_m: default_r_c_range(),
            r0_range_m: default_r0_range(),
            ddp_temperature_range_k: default_ddp_t_range(),
            dcsl_variant: default_dcsl_variant(),
            ddp_variant: default_ddp_variant(),
            ddp_scan_temperature_k: default_scan_temperature(),
        }
    }
}

fn default_bound() -> f64 {
    48e-6
}
fn default_grid_points() -> usize {
    200
}
fn default_dcsl_temperature() -> f64 {
    1e-7
}
fn default_lambda_range() -> [f64; 2] {
    [1e-20, 1e-4]
}
fn default_r_c_range() -> [f64; 2] {
    [1e-9, 1e-3]
}
fn default_r0_range() -> [f64; 2] {
    [1e-18, 1e-2]
}
fn default_ddp_t_range() -> [f64; 2] {
    [1e-18, 1e12]
}
fn default_dcsl_variant() -> String {
    "sphere".into()
}
fn default_ddp_variant() -> String {
    "single".into()
}
fn default_scan_temperature() -> f64 {
    2.7
}

/// Line number (1-based) of `key` inside `[section]`, or at top level when
/// `section` is empty.
fn locate(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.source = text.to_string();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Config error pointing at `section.key`.
    pub fn key_error(&self, section: &str, key: &str, reason: impl std::fmt::Display) -> Error {
        let name = if section.is_empty() || key.is_empty() {
            format!("{section}{key}")
        } else {
            format!("{section}.{key}")
        };
        match locate(&self.source, section, key) {
            Some(line) => Error::Config(format!("line {line}, key `{name}`: {reason}")),
            None => Error::Config(format!("key `{name}`: {reason}")),
        }
    }

    fn positive(&self, section: &str, key: &str, v: f64) -> Result<()> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(self.key_error(section, key, format!("must be finite and > 0, got {v}")))
        }
    }

    /// Checks every present section; runs before any computation.
    pub fn validate(&self) -> Result<()> {
        let p = &self.particle;
        self.positive("particle", "radius_m", p.radius_m)?;
        self.positive("particle", "density_kg_m3", p.density_kg_m3)?;
        if let Some(m) = p.mass_kg {
            self.positive("particle", "mass_kg", m)?;
        }
        self.positive("particle", "nucleus_mass_u", p.nucleus_mass_u)?;
        self.positive("particle", "lattice_constant_m", p.lattice_constant_m)?;
        let g = &self.gas;
        self.positive("gas", "pressure_mbar", g.pressure_mbar)?;
        self.positive("gas", "temperature_k", g.temperature_k)?;
        self.positive("gas", "molecular_mass_kg", g.molecular_mass_kg)?;
        if let Some(t) = &self.trap {
            self.trap_config_from(t)?;
        }
        if !(self.noise.voltage_psd_v2_per_hz >= 0.0 && self.noise.extra_force_psd >= 0.0 && self.noise.measurement_floor >= 0.0) {
            return Err(self.key_error("noise", "voltage_psd_v2_per_hz", "noise levels must be >= 0"));
        }
        if self.noise.voltage_psd_v2_per_hz > 0.0 && self.noise.electrode_distance_m.is_none() {
            return Err(self.key_error("noise", "electrode_distance_m", "required when voltage noise is set"));
        }
        if let Some(s) = &self.sim {
            self.validate_sim(s)?;
        }
        if let Some(l) = &self.lockin {
            self.positive("lockin", "cutoff_hz", l.cutoff_hz)?;
            if let Some(f) = l.f_lo_hz {
                self.positive("lockin", "f_lo_hz", f)?;
            }
            if l.order == 0 {
                return Err(self.key_error("lockin", "order", "must be >= 1"));
            }
            if l.decimation == 0 {
                return Err(self.key_error("lockin", "decimation", "must be >= 1"));
            }
        }
        let f = &self.fit;
        if !(0.0..1.0).contains(&f.overlap) {
            return Err(self.key_error("fit", "overlap", format!("must be in [0, 1), got {}", f.overlap)));
        }
        if matches!(f.segment_length, Some(n) if n < 16) {
            return Err(self.key_error("fit", "segment_length", "must be >= 16"));
        }
        if !matches!(f.method.as_str(), "r2" | "displacement" | "both") {
            return Err(self.key_error("fit", "method", format!("expected r2, displacement or both, got `{}`", f.method)));
        }
        if let Some(s) = &self.sweep {
            self.validate_sweep(s)?;
        }
        self.bound()?;
        let b = &self.bounds;
        if b.grid_points < crate::collapse::MIN_AXIS_POINTS {
            return Err(self.key_error("bounds", "grid_points", format!("must be >= {}", crate::collapse::MIN_AXIS_POINTS)));
        }
        self.positive("bounds", "dcsl_temperature_k", b.dcsl_temperature_k)?;
        self.positive("bounds", "ddp_scan_temperature_k", b.ddp_scan_temperature_k)?;
        for (key, r) in [
            ("lambda_range", b.lambda_range),
            ("r_c_range_m", b.r_c_range_m),
            ("r0_range_m", b.r0_range_m),
            ("ddp_temperature_range_k", b.ddp_temperature_range_k),
        ] {
            if !(r[0] > 0.0 && r[1] > r[0] && r[1].is_finite()) {
                return Err(self.key_error("bounds", key, "need 0 < lo < hi"));
            }
        }
        self.variant("dcsl_variant", &b.dcsl_variant)?;
        self.variant("ddp_variant", &b.ddp_variant)?;
        Ok(())
    }

    fn validate_sim(&self, s: &SimSection) -> Result<()> {
        self.engine()?;
        self.positive("sim", "duration_s", s.duration_s)?;
        self.positive("sim", "output_rate_hz", s.output_rate_hz)?;
        if let Some(h) = s.solver_step_s {
            self.positive("sim", "solver_step_s", h)?;
        }
        if s.axes.is_empty() {
            return Err(self.key_error("sim", "axes", "need at least one axis"));
        }
        for a in &s.axes {
            if Axis::parse(a).is_none() {
                return Err(self.key_error("sim", "axes", format!("unknown axis `{a}`")));
            }
        }
        match &s.frequencies_hz {
            Some(f) => {
                if f.len() != s.axes.len() {
                    return Err(self.key_error("sim", "frequencies_hz", format!("{} values for {} axes", f.len(), s.axes.len())));
                }
                for &v in f {
                    self.positive("sim", "frequencies_hz", v)?;
                }
            }
            None if self.trap.is_none() => {
                return Err(self.key_error("sim", "frequencies_hz", "required when there is no [trap] section"));
            }
            None => {}
        }
        if let Some(g) = s.gamma_hz {
            self.positive("sim", "gamma_hz", g)?;
        }
        if !matches!(s.format.as_str(), "levt" | "csv" | "both") {
            return Err(self.key_error("sim", "format", format!("expected levt, csv or both, got `{}`", s.format)));
        }
        if s.drift.is_some() {
            self.drift()?;
        }
        Ok(())
    }

    fn validate_sweep(&self, s: &SweepSection) -> Result<()> {
        match s.mode.as_str() {
            "simulate" | "synthetic" => {
                if s.pressures_mbar.len() < 3 {
                    return Err(self.key_error("sweep", "pressures_mbar", "need at least 3 pressures"));
                }
                for &p in &s.pressures_mbar {
                    self.positive("sweep", "pressures_mbar", p)?;
                }
            }
            "file" => {
                if s.points_csv.is_none() {
                    return Err(self.key_error("sweep", "points_csv", "required in file mode"));
                }
            }
            m => return Err(self.key_error("sweep", "mode", format!("expected simulate, synthetic or file, got `{m}`"))),
        }
        if s.mode == "simulate" && self.sim.is_none() {
            return Err(Error::Config("sweep mode `simulate` needs a [sim] section".into()));
        }
        if !(s.confidence > 0.0 && s.confidence < 1.0) {
            return Err(self.key_error("sweep", "confidence", "must be in (0, 1)"));
        }
        if !(s.excess_gamma_hz >= 0.0) {
            return Err(self.key_error("sweep", "excess_gamma_hz", "must be >= 0"));
        }
        self.positive("sweep", "sigma_ref_hz", s.sigma_ref_hz)?;
        self.positive("sweep", "p_ref_mbar", s.p_ref_mbar)?;
        Ok(())
    }

    fn variant(&self, key: &str, s: &str) -> Result<Variant> {
        Variant::parse(s).ok_or_else(|| self.key_error("bounds", key, format!("expected sphere, strong or single, got `{s}`")))
    }

    pub fn dcsl_variant(&self) -> Result<Variant> {
        self.variant("dcsl_variant", &self.bounds.dcsl_variant)
    }

    pub fn ddp_variant(&self) -> Result<Variant> {
        self.variant("ddp_variant", &self.bounds.ddp_variant)
    }

    pub fn particle(&self) -> Result<ParticleSpec> {
        let p = &self.particle;
        let mut spec = ParticleSpec::new(p.radius_m, p.density_kg_m3)?
            .with_charge_count(p.charge_count)
            .with_nucleus_mass(p.nucleus_mass_u * AMU)?
            .with_lattice_constant(p.lattice_constant_m)?;
        if let Some(m) = p.mass_kg {
            spec = spec.with_mass(m)?;
        }
        Ok(spec)
    }

    pub fn gas(&self) -> Result<GasEnvironment> {
        GasEnvironment::new(
            self.gas.pressure_mbar * PA_PER_MBAR,
            self.gas.temperature_k,
            self.gas.molecular_mass_kg,
        )
    }

    fn trap_config_from(&self, t: &TrapSection) -> Result<TrapConfig> {
        let cfg = TrapConfig {
            r_o: t.r_o_m,
            z_o: t.z_o_m,
            eta_ac: t.eta_ac,
            kappa_dc: t.kappa_dc,
            u_dc: t.u_dc_v,
            v_ac: t.v_ac_v,
            drive_angular_freq: std::f64::consts::TAU * t.drive_freq_hz,
        };
        cfg.validate().map_err(|e| self.key_error("trap", "", e))?;
        Ok(cfg)
    }

    pub fn trap(&self) -> Result<Option<TrapConfig>> {
        self.trap.as_ref().map(|t| self.trap_config_from(t)).transpose()
    }

    pub fn sim(&self) -> Result<&SimSection> {
        self.sim.as_ref().ok_or_else(|| Error::Config("missing [sim] section".into()))
    }

    pub fn engine(&self) -> Result<Engine> {
        let s = self.sim()?;
        Engine::parse(&s.engine).ok_or_else(|| {
            self.key_error(
                "sim",
                "engine",
                format!("expected secular, quadrature or mathieu, got `{}`", s.engine),
            )
        })
    }

    pub fn axes(&self) -> Result<Vec<Axis>> {
        Ok(self.sim()?.axes.iter().filter_map(|a| Axis::parse(a)).collect())
    }

    pub fn drift(&self) -> Result<DriftProfile> {
        let Some(d) = self.sim()?.drift.as_ref() else {
            return Ok(DriftProfile::none());
        };
        let shape = DriftShape::parse(&d.shape)
            .ok_or_else(|| self.key_error("sim.drift", "shape", format!("unknown drift shape `{}`", d.shape)))?;
        let tau = std::f64::consts::TAU;
        let profile = DriftProfile {
            offset: 0.0,
            linear_rate: tau * d.linear_rate_hz_per_s,
            mod_amplitude: tau * d.amplitude_hz,
            mod_period: d.period_s,
            shape,
        };
        // a bare offset is still a drift
        let profile = if d.offset_hz != 0.0 {
            profile.with_offset(tau * d.offset_hz)
        } else {
            profile
        };
        profile.validate().map_err(|e| self.key_error("sim.drift", "shape", e))?;
        Ok(profile)
    }

    pub fn bound(&self) -> Result<MeasuredBound> {
        MeasuredBound::new(self.bounds.gamma_cm_upper_hz, self.bounds.confidence)
            .map_err(|e| self.key_error("bounds", "gamma_cm_upper_hz", e))
    }

    /// Output directory: the `--out` override, then `out`, then `./out`.
    pub fn out_dir(&self, over: Option<&Path>) -> PathBuf {
        over.map(Path::to_path_buf)
            .or_else(|| self.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_rejected_with_its_name() {
        let e = RunConfig::from_toml_str("[particle]\nradius = 1e-7\n").unwrap_err().to_string();
        assert!(e.contains("radius") && e.contains("line 2"), "{e}");
    }

    #[test]
    fn semantic_errors_point_at_the_line() {
        let e = RunConfig::from_toml_str("seed = 1\n\n[gas]\npressure_mbar = -1.0\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 4") && e.contains("gas.pressure_mbar"), "{e}");
    }

    #[test]
    fn defaults_fill_the_paper_particle() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        let p = cfg.particle().unwrap();
        assert_eq!(p.radius(), 231e-9);
        assert_eq!(cfg.bounds.gamma_cm_upper_hz, 48e-6);
        assert!(cfg.sim.is_none());
    }

    #[test]
    fn sim_needs_frequencies_or_trap() {
        let e = RunConfig::from_toml_str("[sim]\nengine = \"secular\"\nduration_s = 1.0\noutput_rate_hz = 100.0\n").unwrap_err();
        assert!(e.to_string().contains("frequencies_hz"));
        let e = RunConfig::from_toml_str("[sim]\nengine = \"warp\"\nduration_s = 1.0\noutput_rate_hz = 100.0\nfrequencies_hz = [1.0]\n")
            .unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn drift_converts_to_angular_units() {
        let cfg = RunConfig::from_toml_str(
            "[sim]\nengine = \"quadrature\"\nduration_s = 10.0\noutput_rate_hz = 2.0\nfrequencies_hz = [300.0]\n\
             [sim.drift]\nshape = \"sinusoidal\"\namplitude_hz = 12.5\nperiod_s = 3600.0\n",
        )
        .unwrap();
        let d = cfg.drift().unwrap();
        assert!((d.mod_amplitude - std::f64::consts::TAU * 12.5).abs() < 1e-12);
    }
}
