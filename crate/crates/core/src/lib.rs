//! Numerical laboratory for physical random bit generation from a
//! dual-channel chaotic VCSEL.
//!
//! The pieces, in pipeline order:
//! - [`sfm`]: spin-flip VCSEL model with polarization-rotated optical
//!   feedback and delayed electro-optic phase modulation, integrated as a
//!   fixed-step delay differential equation.
//! - [`acf`] / [`bandwidth`]: autocorrelation analysis for time-delay
//!   signature concealment and chaos-bandwidth estimation.
//! - [`extract`]: the M-comparator / staggered-latch / parity extractor
//!   turning chaotic intensity into a serial bit stream.
//! - [`nist`]: the fifteen SP 800-22 statistical tests and the suite-level
//!   pass-proportion analysis.
//!
//! Everything numeric is generic over the scalar type (see [`scalar::Real`]);
//! the aliases below pin the default `f64` instantiation used by the CLI.

pub mod acf;
pub mod bandwidth;
pub mod bits;
pub mod error;
pub mod extract;
pub mod nist;
pub mod params;
pub mod scalar;
pub mod sfm;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Real;
pub use trajectory::Channel;

/// Default scalar type for end-to-end runs.
pub type Scalar = f64;

pub type VcselParams = params::VcselParams<Scalar>;
pub type SimState = sfm::SimState<Scalar>;
pub type IntegrationConfig = sfm::IntegrationConfig<Scalar>;
pub type Trajectory = trajectory::Trajectory<Scalar>;
pub type AcfCurve = acf::AcfCurve<Scalar>;
pub type TdReport = acf::TdReport<Scalar>;
pub type ExtractionConfig = extract::ExtractionConfig<Scalar>;
pub type BitStream = bits::BitStream;
