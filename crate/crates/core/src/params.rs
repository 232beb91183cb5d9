//! Validated Heston model parameters.
//!
//! The model for the log-stock `X = log(S)` is
//!
//! ```text
//! dX = -Y/2 dt + sqrt(Y) dW1,   X0 = x0,
//! dY = kappa (theta - Y) dt + sigma sqrt(Y) dW2,   Y0 = y0 > 0,
//! d<W1,W2> = rho dt,
//! ```
//!
//! with `kappa, theta, sigma, y0 > 0` and `|rho| < 1`. The standing
//! assumption `kappa_bar = kappa - rho*sigma > 0` guarantees that moments
//! of `S` greater than one exist for all times; everything downstream
//! (moment bounds, saddlepoint, rate function) relies on it. The Feller
//! condition `2*kappa*theta > sigma^2` is deliberately *not* required:
//! the transform analysis stays valid without it.

use thiserror::Error;

/// Rejection reasons for [`HestonParams::new`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    /// One of `kappa`, `theta`, `sigma`, `y0` is not strictly positive.
    #[error("parameter {0} must be strictly positive, got {1}")]
    NonPositiveParam(&'static str, f64),
    /// `|rho| >= 1`.
    #[error("correlation must satisfy |rho| < 1, got {0}")]
    CorrelationOutOfRange(f64),
    /// The standing assumption `kappa - rho*sigma > 0` fails.
    #[error("kappa_bar = kappa - rho*sigma must be strictly positive, got {0}")]
    KappaBarNonPositive(f64),
}

/// Validated Heston parameters plus the derived quantities used everywhere.
///
/// `p_minus < 0 < 1 < p_plus` delimit the open interval on which the
/// limiting cumulant generating function is finite:
///
/// ```text
/// p_pm = (-2 kappa rho + sigma pm sqrt(sigma^2 + 4 kappa^2 - 4 kappa rho sigma))
///        / (2 sigma rho_bar^2)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    /// Mean-reversion speed (1/years).
    pub kappa: f64,
    /// Long-run variance level.
    pub theta: f64,
    /// Volatility of volatility.
    pub sigma: f64,
    /// Spot/variance correlation.
    pub rho: f64,
    /// Initial variance.
    pub y0: f64,
    /// `kappa - rho*sigma`, the variance mean-reversion speed under the
    /// share measure.
    pub kappa_bar: f64,
    /// `sqrt(1 - rho^2)`.
    pub rho_bar: f64,
    /// `kappa*theta/kappa_bar`, the long-run variance under the share
    /// measure.
    pub theta_bar: f64,
    /// Lower critical moment (< 0).
    pub p_minus: f64,
    /// Upper critical moment (> 1).
    pub p_plus: f64,
}

impl HestonParams {
    /// Validates raw parameters and populates the derived fields.
    pub fn new(kappa: f64, theta: f64, sigma: f64, rho: f64, y0: f64) -> Result<Self, ParamError> {
        for (name, v) in [("kappa", kappa), ("theta", theta), ("sigma", sigma), ("y0", y0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ParamError::NonPositiveParam(name, v));
            }
        }
        if !(rho.abs() < 1.0) {
            return Err(ParamError::CorrelationOutOfRange(rho));
        }
        let kappa_bar = kappa - rho * sigma;
        if !(kappa_bar > 0.0) {
            return Err(ParamError::KappaBarNonPositive(kappa_bar));
        }
        let rho_bar = (1.0 - rho * rho).sqrt();
        let theta_bar = kappa * theta / kappa_bar;
        let eta = (sigma * sigma + 4.0 * kappa * kappa - 4.0 * kappa * rho * sigma).sqrt();
        let denom = 2.0 * sigma * rho_bar * rho_bar;
        let p_minus = (-2.0 * kappa * rho + sigma - eta) / denom;
        let p_plus = (-2.0 * kappa * rho + sigma + eta) / denom;
        debug_assert!(p_minus < 0.0 && p_plus > 1.0);
        Ok(Self {
            kappa,
            theta,
            sigma,
            rho,
            y0,
            kappa_bar,
            rho_bar,
            theta_bar,
            p_minus,
            p_plus,
        })
    }

    /// The calibrated Eurostoxx 50 parameter set used across the test
    /// suites: kappa=1.7609, theta=0.0494, sigma=0.4086, rho=-0.5195,
    /// y0=0.0464.
    pub fn eurostoxx_2006() -> Self {
        Self::new(1.7609, 0.0494, 0.4086, -0.5195, 0.0464).expect("reference set is valid")
    }

    /// `sqrt(sigma^2 + 4 kappa^2 - 4 kappa rho sigma)`, the square root in
    /// the critical moments and the closed-form saddlepoint.
    pub(crate) fn eta(&self) -> f64 {
        (self.sigma * self.sigma + 4.0 * self.kappa * self.kappa
            - 4.0 * self.kappa * self.rho * self.sigma)
            .sqrt()
    }

    /// True iff `p` lies strictly inside the open moment interval.
    pub fn in_moment_domain(&self, p: f64) -> bool {
        p > self.p_minus && p < self.p_plus
    }
}
