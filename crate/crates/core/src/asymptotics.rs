//! The large-maturity call-price and implied-volatility expansions.
//!
//! Maturity-dependent strike `K = S0 e^{xt}`:
//!
//! ```text
//! C/S0        = I(x, t; -theta/2, theta_bar/2)
//!               + (2 pi t)^{-1/2} exp(-(V*(x) - x) t) A(x) (1 + O(1/t)),
//! sigma_t^2(x) = sigma_inf^2(x) + a1_hat(x)/t + o(1/t),
//! ```
//!
//! fixed strike `K = S0 e^{x}`:
//!
//! ```text
//! C/S0        = 1 + A(0) (2 pi t)^{-1/2} exp((1 - p*(0)) x - V*(0) t) (1 + O(1/t)),
//! sigma_t^2(x) = 8 V*(0) + a1(x)/t + o(1/t).
//! ```
//!
//! The amplitude `A` has removable 0/0 poles at `x = -theta/2` and
//! `x = theta_bar/2` with finite special values; inputs within 1e-9 of
//! either point are routed to the special branch. Near (but outside) the
//! snap window, `V*(x)` and `V*(x) - x` are evaluated through the
//! integral of the saddlepoint (`V*' = p*`), which avoids the
//! subtractive cancellation that otherwise destroys `sigma_inf^2` and
//! `a1_hat` there, and the log-ratio in `a1_hat` is taken as
//! `log|A| - log|A_BS|` after a same-sign check.

use std::f64::consts::PI;

use thiserror::Error;

use crate::bs::indicator_residue;
use crate::cgf::RateFunctionPoint;
use crate::params::HestonParams;
use crate::quad::gauss7;

/// Inputs this close to a special point are evaluated on the special
/// branch of `A` and `a1_hat`.
const SNAP_WINDOW: f64 = 1e-9;

/// Errors from the expansion operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsymError {
    /// The quotient `A(x)/A_BS(x, sigma_inf(x), 0)` came out non-positive
    /// away from the special points; indicates an implementation bug.
    #[error("amplitude ratio non-positive at x = {x}: A = {a}, A_BS = {a_bs}")]
    AmplitudeRatioNonPositive { x: f64, a: f64, a_bs: f64 },
    /// The two-term variance is not positive at this maturity; the
    /// expansion is out of its regime.
    #[error("two-term implied variance {0} is not positive at this maturity")]
    NonPositiveResult(f64),
}

/// Which branch of the piecewise definitions applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    General,
    SpecialMinusThetaHalf,
    SpecialThetaBarHalf,
}

/// Zeroth- and first-order smile data at one log-moneyness rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSmilePoint {
    /// Log-moneyness rate.
    pub x: f64,
    /// Limiting implied variance `sigma_inf^2(x)`, strictly positive.
    pub sigma_inf_sq: f64,
    /// First-order variance correction `a1_hat(x)`.
    pub a1_hat: f64,
    /// Branch used for the correction term.
    pub regime: Regime,
}

/// Zeroth- and first-order smile data at one fixed total log-moneyness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedStrikeSmilePoint {
    /// Total log-moneyness.
    pub x_total: f64,
    /// Strike-independent variance level `8 V*(0)`.
    pub level: f64,
    /// Affine correction `a1(x_total)`.
    pub a1: f64,
}

/// Which pricing route produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricingMethod {
    Asymptotic,
    Fourier,
}

/// A normalised call price split into its residue and correction parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingResult {
    pub normalized_price: f64,
    pub method: PricingMethod,
    pub residue_part: f64,
    pub correction_part: f64,
}

/// Which special point, if any, the input is snapped to.
fn snapped(params: &HestonParams, x: f64) -> Option<Regime> {
    if (x + params.theta / 2.0).abs() < SNAP_WINDOW {
        Some(Regime::SpecialMinusThetaHalf)
    } else if (x - params.theta_bar / 2.0).abs() < SNAP_WINDOW {
        Some(Regime::SpecialThetaBarHalf)
    } else {
        None
    }
}

/// `V*(x)` and `delta = V*(x) - x`, evaluated so that both stay accurate
/// arbitrarily close to the special points. Within a neighbourhood of
/// either point, the vanishing quantity is recovered from
/// `V*(x2) - V*(x1) = int_{x1}^{x2} p*(s) ds`, whose integrand carries no
/// cancellation; a 7-point Gauss pass is exact to machine precision on
/// these short intervals.
fn rate_split(params: &HestonParams, x: f64) -> (f64, f64) {
    let left = -params.theta / 2.0;
    let right = params.theta_bar / 2.0;
    let span = right - left;
    let near = (0.25 * span).min(1e-3);
    let (v_star, delta) = if (x - right).abs() <= near {
        let v_star = params.rate_function(x).v_star;
        let delta = gauss7(|s| params.saddlepoint(s) - 1.0, right, x);
        (v_star, delta)
    } else if (x - left).abs() <= near {
        let v_star = gauss7(|s| params.saddlepoint(s), left, x);
        (v_star, v_star - x)
    } else {
        let b = params.rate_function(x);
        (b.v_star, b.v_star - x)
    };
    (v_star.max(0.0), delta.max(0.0))
}

/// Sign of the square-root term in `sigma_inf^2`: `+1` strictly between
/// the special points, `-1` outside (the value at the points themselves
/// does not depend on it).
fn root_sign(params: &HestonParams, x: f64) -> f64 {
    if x > -params.theta / 2.0 && x < params.theta_bar / 2.0 {
        1.0
    } else {
        -1.0
    }
}

/// Limiting implied variance
///
/// ```text
/// sigma_inf^2(x) = 2 (2 V*(x) - x + 2 s sqrt(V*(x)^2 - V*(x) x))
///                = 2 (sqrt(V*) + s sqrt(V* - x))^2,
/// ```
///
/// with `s = +1` inside `(-theta/2, theta_bar/2)` and `-1` outside.
/// Continuous and strictly positive on the whole line;
/// `sigma_inf^2(-theta/2) = theta` and
/// `sigma_inf^2(theta_bar/2) = theta_bar` exactly.
pub fn sigma_inf_sq(params: &HestonParams, x: f64) -> f64 {
    match snapped(params, x) {
        Some(Regime::SpecialMinusThetaHalf) => params.theta,
        Some(Regime::SpecialThetaBarHalf) => params.theta_bar,
        _ => {
            let (v_star, delta) = rate_split(params, x);
            let r = v_star.sqrt() + root_sign(params, x) * delta.sqrt();
            2.0 * r * r
        }
    }
}

/// Special-branch amplitude at `p = 0` or `p = 1`.
fn amplitude_special(params: &HestonParams, p: f64, sgn: f64) -> f64 {
    let (_, v2, v3) = params.cgf_derivatives(p).expect("0 and 1 are inside the moment domain");
    let u1 = params.u_prime(p).expect("0 and 1 are inside the moment domain");
    (-1.0 - sgn * (v3 / (6.0 * v2) - u1)) / v2.sqrt()
}

/// The Heston amplitude
///
/// ```text
/// A(x) = U(p*(x)) / (p*(x) (p*(x) - 1) sqrt(V''(p*(x))))
/// ```
///
/// away from the special points, with the finite special values
/// `(-1 - sgn(x)(V'''/(6 V'') - U'))/sqrt(V'')` evaluated at `p* = 0` or
/// `1` there (`sgn(x) = 1` for `x > 0`, `-1` otherwise). `A(0) < 0`.
pub fn amplitude(params: &HestonParams, x: f64) -> f64 {
    match snapped(params, x) {
        Some(Regime::SpecialMinusThetaHalf) => amplitude_special(params, 0.0, -1.0),
        Some(Regime::SpecialThetaBarHalf) => amplitude_special(params, 1.0, 1.0),
        _ => {
            let b: RateFunctionPoint = params.rate_function(x);
            let u = params.u_fn(b.p_star).expect("p* lies inside the moment domain");
            u / (b.p_star * (b.p_star - 1.0) * b.v2.sqrt())
        }
    }
}

/// First-order implied-variance correction `a1_hat(x)`:
///
/// ```text
/// a1_hat(x) = 2 (x^2/sigma_inf^4 - 1/4)^{-1} log(A(x) / A_BS(x, sigma_inf(x), 0))
/// ```
///
/// away from the special points and
///
/// ```text
/// a1_hat(x) = 2 (1 - sigma_inf(x)/sqrt(V''(p*)) (1 + sgn(x)(V'''/(6 V'') - U'(p*))))
/// ```
///
/// at them. The defining identity `A(x) = A_BS(x, sigma_inf(x), a1_hat(x))`
/// holds for all `x`.
pub fn a1_hat(params: &HestonParams, x: f64) -> Result<f64, AsymError> {
    let special = |p: f64, sgn: f64, var: f64| -> f64 {
        let (_, v2, v3) = params.cgf_derivatives(p).expect("inside domain");
        let u1 = params.u_prime(p).expect("inside domain");
        2.0 * (1.0 - var.sqrt() / v2.sqrt() * (1.0 + sgn * (v3 / (6.0 * v2) - u1)))
    };
    match snapped(params, x) {
        Some(Regime::SpecialMinusThetaHalf) => Ok(special(0.0, -1.0, params.theta)),
        Some(Regime::SpecialThetaBarHalf) => Ok(special(1.0, 1.0, params.theta_bar)),
        _ => {
            let (v_star, delta) = rate_split(params, x);
            let s = root_sign(params, x);
            let root_prod = (v_star * delta).sqrt();
            // sigma_inf = sqrt(2) |r|; r is negative left of the interval
            let r = v_star.sqrt() + s * delta.sqrt();
            // x^2/sigma_inf^4 - 1/4 and A_BS(x, sigma_inf, 0) in factored
            // form; exact consequences of the quadratic link.
            let divisor = -s * root_prod / (r * r);
            let a_bs0 = -s * r.abs() / (std::f64::consts::SQRT_2 * root_prod);
            let a = amplitude(params, x);
            if !(a * a_bs0 > 0.0) {
                return Err(AsymError::AmplitudeRatioNonPositive { x, a, a_bs: a_bs0 });
            }
            Ok(2.0 * (a.abs().ln() - a_bs0.abs().ln()) / divisor)
        }
    }
}

/// The bundled smile point `(x, sigma_inf^2, a1_hat, regime)`.
pub fn smile_point(params: &HestonParams, x: f64) -> Result<AsymptoticSmilePoint, AsymError> {
    Ok(AsymptoticSmilePoint {
        x,
        sigma_inf_sq: sigma_inf_sq(params, x),
        a1_hat: a1_hat(params, x)?,
        regime: snapped(params, x).unwrap_or(Regime::General),
    })
}

/// Two-term large-maturity call price for strike `K = S0 e^{xt}`:
/// residue `I(x, t; -theta/2, theta_bar/2)` plus
/// `(2 pi t)^{-1/2} e^{-(V*(x)-x) t} A(x)`.
pub fn call_price_asymptotic(params: &HestonParams, x: f64, t: f64) -> PricingResult {
    assert!(t > 0.0, "maturity must be positive");
    let residue = indicator_residue(x, t, -params.theta / 2.0, params.theta_bar / 2.0)
        .expect("thresholds ordered for valid params")
        .value;
    let (_, delta) = rate_split(params, x);
    let correction = (2.0 * PI * t).sqrt().recip() * (-delta * t).exp() * amplitude(params, x);
    PricingResult {
        normalized_price: residue + correction,
        method: PricingMethod::Asymptotic,
        residue_part: residue,
        correction_part: correction,
    }
}

/// Two-term large-maturity call price for fixed strike `K = S0 e^{x}`:
/// `1 + A(0) (2 pi t)^{-1/2} exp((1 - p*(0)) x - V*(0) t)`.
pub fn call_price_fixed_strike_asymptotic(
    params: &HestonParams,
    x_total: f64,
    t: f64,
) -> PricingResult {
    assert!(t > 0.0, "maturity must be positive");
    let b0 = params.rate_function(0.0);
    let a0 = amplitude(params, 0.0);
    let correction = a0 / (2.0 * PI * t).sqrt()
        * ((1.0 - b0.p_star) * x_total - b0.v_star * t).exp();
    PricingResult {
        normalized_price: 1.0 + correction,
        method: PricingMethod::Asymptotic,
        residue_part: 1.0,
        correction_part: correction,
    }
}

/// Two-term implied variance `sigma_inf^2(x) + a1_hat(x)/t` for the
/// maturity-dependent strike convention.
pub fn implied_var_asymptotic(params: &HestonParams, x: f64, t: f64) -> Result<f64, AsymError> {
    assert!(t > 0.0, "maturity must be positive");
    let v = sigma_inf_sq(params, x) + a1_hat(params, x)? / t;
    if !(v > 0.0) {
        return Err(AsymError::NonPositiveResult(v));
    }
    Ok(v)
}

/// Fixed-strike first-order coefficient
/// `a1(x) = -8 log(-A(0) sqrt(2 V*(0))) + 4 (2 p*(0) - 1) x`, affine in
/// the total log-moneyness.
pub fn a1_fixed(params: &HestonParams, x_total: f64) -> f64 {
    let b0 = params.rate_function(0.0);
    let a0 = amplitude(params, 0.0);
    let arg = -a0 * (2.0 * b0.v_star).sqrt();
    debug_assert!(arg > 0.0, "A(0) < 0 and V*(0) > 0 make the log argument positive");
    -8.0 * arg.ln() + 4.0 * (2.0 * b0.p_star - 1.0) * x_total
}

/// The bundled fixed-strike smile point `(x_total, 8 V*(0), a1(x_total))`.
pub fn fixed_strike_point(params: &HestonParams, x_total: f64) -> FixedStrikeSmilePoint {
    FixedStrikeSmilePoint {
        x_total,
        level: 8.0 * params.rate_function(0.0).v_star,
        a1: a1_fixed(params, x_total),
    }
}

/// Two-term fixed-strike implied variance `8 V*(0) + a1(x_total)/t`.
/// Returned as stated even when the value is not yet positive at small
/// `t` (the strike-independent level dominates only for large `t`).
pub fn implied_var_fixed_strike(params: &HestonParams, x_total: f64, t: f64) -> f64 {
    assert!(t > 0.0, "maturity must be positive");
    8.0 * params.rate_function(0.0).v_star + a1_fixed(params, x_total) / t
}
