//! Time-t characteristic function of the log-price increment.
//!
//! For `-Im(k)` inside the moment interval,
//!
//! ```text
//! phi_t(k) = exp( V(ik) t - (2 kappa theta / sigma^2) log((1 - g e^{-dt}) / (1 - g)) )
//!          * exp( (y0 / (kappa theta)) V(ik) (1 - e^{-dt}) / (1 - g e^{-dt}) ),
//! ```
//!
//! with `d = d(k)`, `g = g(k)` and principal branches throughout. In this
//! arrangement the log argument never crosses the negative real axis on
//! the strip, so the principal branch is the correct one for all `t`; a
//! guard band turns any violation into a hard error instead of a silently
//! wrong price.

use num_complex::Complex64;
use thiserror::Error;

use crate::params::HestonParams;

/// Errors from characteristic-function evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharFnError {
    /// `-Im(k)` is not strictly inside `(p_minus, p_plus)`.
    #[error("-Im(k) = {0} outside the moment strip ({1}, {2})")]
    OutsideStrip(f64, f64, f64),
    /// The principal-branch log argument entered the guard band around
    /// zero or the negative real axis; indicates out-of-strip use.
    #[error("log branch guard tripped at k = {0}, t = {1}")]
    LogBranchFailure(Complex64, f64),
}

/// `log(1 + u)` for complex `u`, accurate for small `|u|`.
fn ln_1p_c(u: Complex64) -> Complex64 {
    if u.norm() < 1e-4 {
        // |u|^6 < 1e-24: five terms reach full double precision
        let u2 = u * u;
        u - u2 / 2.0 + u2 * u / 3.0 - u2 * u2 / 4.0 + u2 * u2 * u / 5.0
    } else {
        (Complex64::new(1.0, 0.0) + u).ln()
    }
}

impl HestonParams {
    /// Characteristic function `phi_t(k) = E exp(i k (X_t - x0))` for
    /// `t >= 0` and `-Im(k)` strictly inside the moment interval.
    ///
    /// `phi_0(k) = 1`, `phi_t(0) = 1` and `phi_t(-i) = 1` (martingale).
    pub fn char_fn(&self, t: f64, k: Complex64) -> Result<Complex64, CharFnError> {
        let p = -k.im;
        if !self.in_moment_domain(p) {
            return Err(CharFnError::OutsideStrip(p, self.p_minus, self.p_plus));
        }
        let beta = Complex64::new(self.kappa, 0.0) - Complex64::i() * (self.rho * self.sigma) * k;
        let d = self.d(k);
        let bpd = beta + d;
        let ik_k2 = Complex64::i() * k + k * k;
        // V(ik) and g(k), both rationalised through beta^2 - d^2
        let v = -self.kappa * self.theta * ik_k2 / bpd;
        let g = -self.sigma * self.sigma * ik_k2 / (bpd * bpd);
        let e = (-d * t).exp();
        let one = Complex64::new(1.0, 0.0);
        // (1 - g e^{-dt}) / (1 - g) = 1 + u
        let u = g * (one - e) / (one - g);
        let w = one + u;
        if w.norm() < 1e-14 || (w.re < 0.0 && w.im.abs() < 1e-12) {
            return Err(CharFnError::LogBranchFailure(k, t));
        }
        let c = 2.0 * self.kappa * self.theta / (self.sigma * self.sigma);
        let exponent = v * t - c * ln_1p_c(u)
            + self.y0 / (self.kappa * self.theta) * v * (one - e) / (one - g * e);
        Ok(exponent.exp())
    }
}
