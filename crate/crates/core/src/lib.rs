//! Large-maturity asymptotics for the Heston model.
//!
//! This crate implements the closed-form constant and first-order (1/t)
//! terms of the large-maturity implied-volatility expansion in the Heston
//! stochastic volatility model, for both maturity-dependent strikes
//! `K = S0*exp(x*t)` and fixed strikes `K = S0*exp(x)`, together with:
//!
//! - the analytic building blocks (limiting cumulant generating function
//!   `V`, its Fenchel-Legendre transform `V*`, the closed-form saddlepoint
//!   `p*`, the amplitude `A`),
//! - Black-Scholes analytics (call formula, implied-volatility inversion,
//!   large-time expansions),
//! - an exact Fourier-inversion call pricer along a saddlepoint-informed
//!   contour, used as the in-repo reference for all convergence checks,
//! - a least-squares smile calibration harness driven by the closed-form
//!   expansion, with an optional exact-pricer refinement pass.
//!
//! All operations are pure functions of immutable inputs and safe to call
//! concurrently.

pub mod asymptotics;
pub mod bs;
pub mod calibration;
pub mod cgf;
pub mod charfn;
pub mod fourier;
pub mod params;
pub mod quad;

pub use asymptotics::{
    AsymError, AsymptoticSmilePoint, FixedStrikeSmilePoint, PricingMethod, PricingResult,
};
pub use bs::BsError;
pub use calibration::{CalibError, CalibrationResult, Quote, QuoteSet, SmileModel, ValueKind};
pub use cgf::{CgfError, RateFunctionPoint};
pub use charfn::CharFnError;
pub use fourier::{ContourChoice, FourierError, QuadratureConfig, StrikeSpec};
pub use params::{HestonParams, ParamError};
