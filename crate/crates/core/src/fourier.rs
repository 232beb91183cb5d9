//! Exact Heston call pricing by Fourier inversion along a horizontal
//! contour in the moment strip.
//!
//! For any admissible contour level `alpha` in `(p_minus, p_plus)` the
//! normalised call price with total log-moneyness `x = log(K/S0)` is
//!
//! ```text
//! C/S0 = 1_{0<alpha<1} + (1 - e^x) 1_{alpha<0} + 1/2 1_{alpha=1}
//!      + (1 - e^x/2) 1_{alpha=0}
//!      + (e^x / pi) int_0^inf Re( e^{i k x} phi_t(-k) / (i k - k^2) ) dk_r,
//! ```
//!
//! where `k = k_r + i alpha`. The real part of the integrand is even in
//! `k_r` and the imaginary part odd, which is why the integral runs over
//! the positive half-line only. At the pole levels `alpha = 0` and
//! `alpha = 1` the half-residue terms above apply exactly and the
//! real-part integrand stays regular, so no contour nudging is needed.
//!
//! The default contour level is the saddlepoint `p*(x/t)`, which
//! minimises the modulus of the integrand along horizontal lines and
//! makes the quadrature benign even for large `t`.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::bs::{self, BsError};
use crate::charfn::CharFnError;
use crate::params::HestonParams;
use crate::quad;

/// Tolerances and budgets of the adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    /// Absolute tolerance of the contour integral.
    pub abs_tol: f64,
    /// Relative tolerance of the contour integral.
    pub rel_tol: f64,
    /// First truncation radius; doubled until the tail is negligible.
    pub initial_truncation: f64,
    /// Hard cap on the truncation radius.
    pub max_truncation: f64,
    /// Subdivision budget per truncation block.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            initial_truncation: 200.0,
            max_truncation: 1e5,
            max_subdivisions: 2000,
        }
    }
}

/// How the contour level was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourMode {
    /// `alpha = p*(x/t)`, clamped strictly inside the moment strip.
    Saddlepoint,
    /// The classic in-(0,1) level `alpha = 1/2`.
    LeeDefault,
    /// Caller-supplied level.
    User,
}

/// The imaginary level of the integration line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourChoice {
    pub alpha: f64,
    pub mode: ContourMode,
}

impl ContourChoice {
    /// The midpoint level `alpha = 1/2`, admissible for every parameter
    /// set.
    pub fn lee_default() -> Self {
        Self { alpha: 0.5, mode: ContourMode::LeeDefault }
    }

    /// A caller-chosen level; validated by the pricer.
    pub fn user(alpha: f64) -> Self {
        Self { alpha, mode: ContourMode::User }
    }
}

/// Strike conventions accepted by [`exact_implied_vol`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrikeSpec {
    /// Total log-moneyness: `K = S0 e^{x}`.
    Total(f64),
    /// Log-moneyness rate: `K = S0 e^{x t}`.
    Rate(f64),
}

impl StrikeSpec {
    pub fn total_log_moneyness(&self, t: f64) -> f64 {
        match *self {
            StrikeSpec::Total(x) => x,
            StrikeSpec::Rate(x) => x * t,
        }
    }
}

/// Errors from Fourier pricing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FourierError {
    /// The integrand tail was still above tolerance at the truncation cap.
    #[error("integrand tail above tolerance at truncation radius {radius}")]
    TruncationFailure { radius: f64 },
    /// A truncation block exhausted its subdivision budget.
    #[error("quadrature subdivision budget exhausted (residual error {abs_error})")]
    SubdivisionExhausted { abs_error: f64 },
    /// The contour level lies outside the open moment strip.
    #[error("contour level alpha = {alpha} outside the moment strip ({lo}, {hi})")]
    OutsideStrip { alpha: f64, lo: f64, hi: f64 },
    /// Maturity must be strictly positive.
    #[error("maturity must be strictly positive, got {0}")]
    NonPositiveMaturity(f64),
    /// Characteristic-function failure along the contour.
    #[error(transparent)]
    CharFn(#[from] CharFnError),
    /// Implied-volatility inversion failure on the produced price.
    #[error(transparent)]
    Bs(#[from] BsError),
}

/// Contour level at the saddlepoint `p*(x_rate)`, clamped strictly inside
/// the moment strip with a relative margin of `1e-6 (p_plus - p_minus)`.
pub fn default_alpha(params: &HestonParams, x_rate: f64) -> ContourChoice {
    let margin = 1e-6 * (params.p_plus - params.p_minus);
    let alpha = params
        .saddlepoint(x_rate)
        .clamp(params.p_minus + margin, params.p_plus - margin);
    ContourChoice { alpha, mode: ContourMode::Saddlepoint }
}

/// Residue terms of the inversion formula for the given contour level.
fn residue_terms(alpha: f64, x_total: f64) -> f64 {
    if alpha == 0.0 {
        1.0 - 0.5 * x_total.exp()
    } else if alpha == 1.0 {
        0.5
    } else if alpha < 0.0 {
        1.0 - x_total.exp()
    } else if alpha < 1.0 {
        1.0
    } else {
        0.0
    }
}

/// Normalised Heston call price `E(S_t - S0 e^{x})^+ / S0` by Fourier
/// inversion along `Im(k) = alpha`.
///
/// The price is independent of the admissible `alpha` up to quadrature
/// tolerance; the half-residue cases `alpha = 0` and `alpha = 1` are
/// handled exactly.
pub fn lee_call_price(
    params: &HestonParams,
    x_total: f64,
    t: f64,
    contour: &ContourChoice,
    config: &QuadratureConfig,
) -> Result<f64, FourierError> {
    if !(t > 0.0) {
        return Err(FourierError::NonPositiveMaturity(t));
    }
    let alpha = contour.alpha;
    if !params.in_moment_domain(alpha) {
        return Err(FourierError::OutsideStrip {
            alpha,
            lo: params.p_minus,
            hi: params.p_plus,
        });
    }

    let failure: Cell<Option<CharFnError>> = Cell::new(None);
    let integrand = |kr: f64| -> f64 {
        let k = Complex64::new(kr, alpha);
        match params.char_fn(t, -k) {
            Ok(phi) => {
                let denom = Complex64::i() * k - k * k;
                ((Complex64::i() * k * x_total).exp() * phi / denom).re
            }
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    };

    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = config.initial_truncation;
    loop {
        let block = quad::integrate_adaptive(
            &integrand,
            lo,
            hi,
            config.abs_tol / 10.0,
            config.rel_tol,
            config.max_subdivisions,
        )
        .map_err(|e| FourierError::SubdivisionExhausted { abs_error: e.abs_error })?;
        if let Some(e) = failure.take() {
            return Err(FourierError::CharFn(e));
        }
        total += block.value;
        if block.value.abs() < config.abs_tol / 10.0 && lo > 0.0 {
            break;
        }
        if hi >= config.max_truncation {
            // accept only if the last block itself was already negligible
            if block.value.abs() < config.abs_tol / 10.0 {
                break;
            }
            return Err(FourierError::TruncationFailure { radius: hi });
        }
        lo = hi;
        hi = (2.0 * hi).min(config.max_truncation);
    }

    Ok(residue_terms(alpha, x_total) + x_total.exp() / PI * total)
}

/// Implied Black-Scholes volatility of the Fourier price, accepting
/// either strike convention.
pub fn exact_implied_vol(
    params: &HestonParams,
    strike: StrikeSpec,
    t: f64,
    config: &QuadratureConfig,
) -> Result<f64, FourierError> {
    if !(t > 0.0) {
        return Err(FourierError::NonPositiveMaturity(t));
    }
    let x_total = strike.total_log_moneyness(t);
    let contour = default_alpha(params, x_total / t);
    let price = lee_call_price(params, x_total, t, &contour, config)?;
    Ok(bs::implied_vol(price, x_total, t)?)
}
