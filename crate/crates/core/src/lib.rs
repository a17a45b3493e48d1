//! Pricing of European calls and extraction of risk-neutral densities (RNDs)
//! under three models: Black-Scholes, Generalized Gamma / Inverse Generalized
//! Gamma scale-family RNDs, and Heston (1993) stochastic volatility, together
//! with MSE calibration to option-chain data and Monte-Carlo cross-validation.
//!
//! The numerical core is generic over the scalar type via [`Real`]; the
//! concrete alias [`Scalar`] (`f64`) is what the calibration, simulation and
//! I/O layers use. `f32` builds too, but the documented accuracy targets
//! assume double precision.

pub mod bs;
pub mod calibrate;
pub mod chain;
pub mod error;
pub mod gg;
pub mod heston;
pub mod igg;
pub mod mc;
pub mod numerics;
pub mod optim;
pub mod rnd;

pub use error::{Error, Result};

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Scalar type the library's math is written against: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static {
    /// Lift an `f64` constant into `Self`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Default scalar used by the calibration, Monte-Carlo and CLI layers.
pub type Scalar = f64;

/// Market context at the default precision.
pub type MarketContext = rnd::MarketContext<Scalar>;
/// Density curve at the default precision.
pub type DensityCurve = rnd::DensityCurve<Scalar>;
/// Quadrature settings at the default precision.
pub type QuadratureSpec = numerics::QuadratureSpec<Scalar>;
