//! Scalar abstraction: the numerical core is generic over the floating-point
//! type; `f64` is the default used by the CLI (see the crate-root aliases).

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar usable throughout the simulation and analysis code.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssignOps
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + rustfft::FftNum
    + serde::Serialize
    + for<'de> serde::Deserialize<'de>
    + 'static
{
    /// Shorthand for lossy conversion from `f64` (panics only if the
    /// target type cannot represent any finite value, which f32/f64 can).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to Real")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
