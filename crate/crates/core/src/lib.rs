//! Linewidth estimation for levitated nanoparticle oscillators.
//!
//! The crate simulates the centre-of-mass motion of a charged particle in a
//! Paul trap, demodulates it with a numerical lock-in amplifier, fits the
//! spectrum of the squared amplitude to extract the damping rate, and turns
//! an upper bound on that rate into exclusion regions for dissipative
//! collapse models.
//!
//! Units are SI throughout except where a name says otherwise: pressures
//! carrying an `_mbar` suffix, and linewidths reported in Hz as γ/2π.
//! Damping rates passed between functions are angular (rad/s).
//!
//! ```
//! use levlw::trapphys::{gas_damping, GasEnvironment, ParticleSpec};
//!
//! let particle = ParticleSpec::silica(231e-9).unwrap().with_mass(9.6e-17).unwrap();
//! let gas = GasEnvironment::nitrogen_mbar(1e-4, 293.0).unwrap();
//! let gamma = gas_damping(&particle, &gas);
//! assert!((gamma / std::f64::consts::TAU - 0.028).abs() < 0.002);
//! ```

pub mod collapse;
pub mod config;
pub mod constants;
pub mod demod;
pub mod error;
pub mod filter;
pub mod io;
pub mod pipeline;
pub mod series;
pub mod simulate;
pub mod specfit;
pub mod trapphys;

pub use error::{Axis, Error, Result};
pub use series::{QuadratureSeries, TimeSeries};
