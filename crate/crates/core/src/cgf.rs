//! Analytic building blocks of the large-maturity expansion.
//!
//! Everything here is elementary once the limiting cumulant generating
//! function of the log-price is written down:
//!
//! ```text
//! V(p)  = (kappa theta / sigma^2) (kappa - rho sigma p - d(-i p)),
//! d(k)  = sqrt((kappa - i rho sigma k)^2 + sigma^2 (i k + k^2)),
//! ```
//!
//! with the principal branch for the complex square root. On the open
//! moment interval `(p_minus, p_plus)` the radicand
//!
//! ```text
//! Q(p) = (kappa - rho sigma p)^2 + sigma^2 p (1 - p)
//! ```
//!
//! is strictly positive, so all real-variable quantities reduce to
//! algebra in `Q` and its (at most quadratic) derivatives. `V` itself is
//! evaluated in the rationalised form
//!
//! ```text
//! V(p) = -kappa theta p (1 - p) / (kappa - rho sigma p + sqrt(Q(p))),
//! ```
//!
//! which is exact at `p = 0, 1` and immune to the catastrophic
//! cancellation of `kappa - ... - sqrt(Q)` in the small-vol-of-vol limit.
//!
//! The Fenchel-Legendre transform `V*(x) = p*(x) x - V(p*(x))` uses the
//! closed-form saddlepoint
//!
//! ```text
//! p*(x) = (sigma - 2 kappa rho
//!          + (kappa theta rho + x sigma) sqrt(eta^2 / xi(x))) / (2 sigma rho_bar^2),
//! xi(x) = (x sigma + kappa theta rho)^2 + kappa^2 theta^2 (1 - rho^2),
//! ```
//!
//! whose radicand is positive for every real `x`.

use num_complex::Complex64;
use thiserror::Error;

use crate::params::HestonParams;

/// Errors from the real-variable operations on the moment interval.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CgfError {
    /// `p` is outside the open interval `(p_minus, p_plus)`.
    #[error("p = {p} outside the moment domain ({lo}, {hi})")]
    OutsideMomentDomain { p: f64, lo: f64, hi: f64 },
    /// The denominator of `g` is numerically zero.
    #[error("denominator of g(k) is degenerate at k = {0}")]
    DegenerateDenominator(Complex64),
}

/// The saddlepoint bundle for one log-moneyness rate `x`: everything the
/// call-price and implied-volatility expansions need at `p*(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFunctionPoint {
    /// Log-moneyness rate (log-moneyness per year).
    pub x: f64,
    /// Saddlepoint `p*(x)`, inside `(p_minus, p_plus)`.
    pub p_star: f64,
    /// Rate function `V*(x) = p*(x) x - V(p*(x))`, nonnegative.
    pub v_star: f64,
    /// `V''(p*(x))`, strictly positive.
    pub v2: f64,
    /// `V'''(p*(x))`.
    pub v3: f64,
}

impl HestonParams {
    /// Radicand `Q(p) = (kappa - rho sigma p)^2 + sigma^2 p (1 - p)` and
    /// its first two derivatives (it is a quadratic in `p`).
    fn q_poly(&self, p: f64) -> (f64, f64, f64) {
        let (k, s, r) = (self.kappa, self.sigma, self.rho);
        let rb2 = self.rho_bar * self.rho_bar;
        let q = {
            let a = k - r * s * p;
            a * a + s * s * p * (1.0 - p)
        };
        let q1 = s * (s - 2.0 * k * r) - 2.0 * s * s * rb2 * p;
        let q2 = -2.0 * s * s * rb2;
        (q, q1, q2)
    }

    fn check_domain(&self, p: f64) -> Result<(), CgfError> {
        if self.in_moment_domain(p) {
            Ok(())
        } else {
            Err(CgfError::OutsideMomentDomain {
                p,
                lo: self.p_minus,
                hi: self.p_plus,
            })
        }
    }

    /// `d(k) = sqrt((kappa - i rho sigma k)^2 + sigma^2 (i k + k^2))`,
    /// principal branch. Total on the complex plane; has strictly
    /// positive real part whenever `-Im(k)` lies in the moment interval.
    pub fn d(&self, k: Complex64) -> Complex64 {
        self.d_of_p_c(Complex64::i() * k)
    }

    /// `d(-i w)` for complex `w`; coincides with `sqrt(Q(p))` for real
    /// `w = p` in the moment interval.
    pub fn d_of_p_c(&self, w: Complex64) -> Complex64 {
        let a = self.kappa - self.rho * self.sigma * w;
        (a * a + self.sigma * self.sigma * w * (1.0 - w)).sqrt()
    }

    /// `g(k) = (kappa - i rho sigma k - d(k)) / (kappa - i rho sigma k + d(k))`,
    /// evaluated with the numerator rationalised so that `g(0) = g(-i) = 0`
    /// holds exactly.
    pub fn g(&self, k: Complex64) -> Result<Complex64, CgfError> {
        let beta = Complex64::new(self.kappa, 0.0) - Complex64::i() * (self.rho * self.sigma) * k;
        let d = self.d(k);
        let denom = beta + d;
        if denom.norm() < 1e-14 * (beta.norm() + d.norm() + 1.0) {
            return Err(CgfError::DegenerateDenominator(k));
        }
        // beta - d = -sigma^2 (i k + k^2) / (beta + d)
        let ik_k2 = Complex64::i() * k + k * k;
        Ok(-self.sigma * self.sigma * ik_k2 / (denom * denom))
    }

    /// Limiting cumulant generating function `V(p)` of the log-price, for
    /// `p` strictly inside the moment interval. `V(0) = V(1) = 0`.
    pub fn limiting_cgf(&self, p: f64) -> Result<f64, CgfError> {
        self.check_domain(p)?;
        let (q, _, _) = self.q_poly(p);
        let m = self.kappa - self.rho * self.sigma * p + q.sqrt();
        Ok(-self.kappa * self.theta * p * (1.0 - p) / m)
    }

    /// Analytic extension of `V` to complex arguments:
    /// `V(w) = -kappa theta w (1 - w) / (kappa - rho sigma w + d(-i w))`.
    pub fn limiting_cgf_c(&self, w: Complex64) -> Complex64 {
        let m = self.kappa - self.rho * self.sigma * w + self.d_of_p_c(w);
        -self.kappa * self.theta * w * (1.0 - w) / m
    }

    /// Closed-form first, second and third derivatives of `V` on the
    /// moment interval. `V''` is strictly positive there.
    pub fn cgf_derivatives(&self, p: f64) -> Result<(f64, f64, f64), CgfError> {
        self.check_domain(p)?;
        Ok(self.cgf_derivatives_unchecked(p))
    }

    pub(crate) fn cgf_derivatives_unchecked(&self, p: f64) -> (f64, f64, f64) {
        let (q, q1, q2) = self.q_poly(p);
        let d = q.sqrt();
        let d1 = q1 / (2.0 * d);
        let d2 = q2 / (2.0 * d) - q1 * q1 / (4.0 * d * q);
        let d3 = 3.0 * q1 * q1 * q1 / (8.0 * d * q * q) - 3.0 * q1 * q2 / (4.0 * d * q);
        let scale = self.kappa * self.theta / (self.sigma * self.sigma);
        let v1 = scale * (-self.rho * self.sigma - d1);
        let v2 = -scale * d2;
        let v3 = -scale * d3;
        (v1, v2, v3)
    }

    /// `U(p)` from the large-time factorisation of the characteristic
    /// function:
    ///
    /// ```text
    /// U(p) = (2 d(-i p) / (kappa - rho sigma p + d(-i p)))^(2 kappa theta / sigma^2)
    ///        * exp(y0 V(p) / (kappa theta))
    /// ```
    ///
    /// Strictly positive on the moment interval, with `U(0) = U(1) = 1`.
    pub fn u_fn(&self, p: f64) -> Result<f64, CgfError> {
        self.check_domain(p)?;
        let (q, _, _) = self.q_poly(p);
        let d = q.sqrt();
        let m = self.kappa - self.rho * self.sigma * p + d;
        // log(2d/m) = log1p((d - (kappa - rho sigma p))/m) with the
        // numerator rationalised through Q.
        let log_base = (self.sigma * self.sigma * p * (1.0 - p) / (m * m)).ln_1p();
        let c = 2.0 * self.kappa * self.theta / (self.sigma * self.sigma);
        let v = -self.kappa * self.theta * p * (1.0 - p) / m;
        Ok((c * log_base + self.y0 * v / (self.kappa * self.theta)).exp())
    }

    /// Analytic derivative of [`Self::u_fn`].
    pub fn u_prime(&self, p: f64) -> Result<f64, CgfError> {
        self.check_domain(p)?;
        let (q, q1, _) = self.q_poly(p);
        let d = q.sqrt();
        let d1 = q1 / (2.0 * d);
        let m = self.kappa - self.rho * self.sigma * p + d;
        let log_base_prime = d1 / d - (d1 - self.rho * self.sigma) / m;
        let c = 2.0 * self.kappa * self.theta / (self.sigma * self.sigma);
        let (v1, _, _) = self.cgf_derivatives_unchecked(p);
        let u = self.u_fn(p)?;
        Ok(u * (c * log_base_prime + self.y0 * v1 / (self.kappa * self.theta)))
    }

    /// Analytic extension of `U` to complex arguments, used by the
    /// large-time factorisation of the characteristic function.
    pub fn u_fn_c(&self, w: Complex64) -> Complex64 {
        let d = self.d_of_p_c(w);
        let m = self.kappa - self.rho * self.sigma * w + d;
        let base = 2.0 * d / m;
        let c = 2.0 * self.kappa * self.theta / (self.sigma * self.sigma);
        let v = self.limiting_cgf_c(w);
        base.powf(c) * (self.y0 * v / (self.kappa * self.theta)).exp()
    }

    /// Closed-form saddlepoint `p*(x)`: the unique solution in
    /// `(p_minus, p_plus)` of `V'(p) = x`, strictly increasing in `x`.
    pub fn saddlepoint(&self, x: f64) -> f64 {
        let (k, s, r) = (self.kappa, self.sigma, self.rho);
        let rb2 = self.rho_bar * self.rho_bar;
        let a = k * self.theta * r + x * s;
        // xi = (x sigma + kappa theta rho)^2 + kappa^2 theta^2 (1 - rho^2),
        // positive for all real x.
        let xi = a * a + k * k * self.theta * self.theta * rb2;
        (s - 2.0 * k * r + a * self.eta() / xi.sqrt()) / (2.0 * s * rb2)
    }

    /// Rate function `V*(x)` bundled with the saddlepoint and the second
    /// and third cgf derivatives there.
    pub fn rate_function(&self, x: f64) -> RateFunctionPoint {
        let p_star = self.saddlepoint(x);
        // p* lies strictly inside the moment interval for every real x;
        // clamp defensively against roundoff at extreme |x|.
        let p_star = p_star.clamp(
            self.p_minus + f64::EPSILON * self.p_minus.abs(),
            self.p_plus - f64::EPSILON * self.p_plus.abs(),
        );
        let (q, _, _) = self.q_poly(p_star);
        let m = self.kappa - self.rho * self.sigma * p_star + q.sqrt();
        let v = -self.kappa * self.theta * p_star * (1.0 - p_star) / m;
        let (_, v2, v3) = self.cgf_derivatives_unchecked(p_star);
        RateFunctionPoint {
            x,
            p_star,
            v_star: p_star * x - v,
            v2,
            v3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p5() -> HestonParams {
        HestonParams::eurostoxx_2006()
    }

    /// Both square roots of the radicand via polar decomposition; the
    /// principal one has its argument halved into (-pi/2, pi/2].
    fn d_via_polar(p: &HestonParams, k: Complex64) -> Complex64 {
        let a = Complex64::new(p.kappa, 0.0) - Complex64::i() * (p.rho * p.sigma) * k;
        let radicand = a * a + p.sigma * p.sigma * (Complex64::i() * k + k * k);
        let (r, th) = radicand.to_polar();
        let root = Complex64::from_polar(r.sqrt(), th / 2.0);
        // th/2 in (-pi/2, pi/2] already selects the principal branch.
        root
    }

    #[test]
    fn d_at_zero_and_minus_i() {
        let p = p5();
        let d0 = p.d(Complex64::new(0.0, 0.0));
        assert!((d0 - p.kappa).norm() < 1e-14);
        let dmi = p.d(Complex64::new(0.0, -1.0));
        assert!((dmi - p.kappa_bar).norm() < 1e-13);
    }

    #[test]
    fn d_matches_polar_decomposition_and_has_positive_real_part() {
        let p = p5();
        let k = Complex64::new(1.0, -0.5);
        let d = p.d(k);
        let oracle = d_via_polar(&p, k);
        assert!((d - oracle).norm() < 1e-13 * oracle.norm());
        assert!(d.re > 0.0);
        // sweep the strip: -Im(k) in (p_minus, p_plus)
        for i in 0..40 {
            let ki = p.p_minus + (p.p_plus - p.p_minus) * (i as f64 + 0.5) / 40.0;
            for kr in [-30.0, -2.0, -0.1, 0.0, 0.1, 2.0, 30.0] {
                let k = Complex64::new(kr, -ki);
                let d = p.d(k);
                assert!(d.re > 0.0, "Re d(k) <= 0 at k = {k}");
                let oracle = d_via_polar(&p, k);
                assert!((d - oracle).norm() <= 1e-12 * (1.0 + oracle.norm()));
            }
        }
    }

    #[test]
    fn g_vanishes_at_zero_and_minus_i() {
        let p = p5();
        assert_eq!(p.g(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        let gmi = p.g(Complex64::new(0.0, -1.0)).unwrap();
        assert!(gmi.norm() < 1e-15);
    }

    #[test]
    fn g_has_modulus_below_one_at_real_argument() {
        let p = p5();
        let k = Complex64::new(2.0, 0.0);
        let g = p.g(k).unwrap();
        assert!(g.norm() < 1.0);
        // cross-check against the unrationalised quotient with the polar d
        let beta = Complex64::new(p.kappa, 0.0) - Complex64::i() * (p.rho * p.sigma) * k;
        let d = d_via_polar(&p, k);
        let oracle = (beta - d) / (beta + d);
        assert!((g - oracle).norm() < 1e-13);
    }

    #[test]
    fn cgf_vanishes_at_zero_and_one() {
        let p = p5();
        assert_eq!(p.limiting_cgf(0.0).unwrap(), 0.0);
        assert_eq!(p.limiting_cgf(1.0).unwrap(), 0.0);
        let v_half = p.limiting_cgf(0.5).unwrap();
        assert!(v_half.is_finite() && v_half < 0.0);
    }

    #[test]
    fn cgf_rejects_outside_domain() {
        let p = p5();
        assert!(matches!(
            p.limiting_cgf(p.p_plus + 0.1),
            Err(CgfError::OutsideMomentDomain { .. })
        ));
        assert!(matches!(p.u_fn(p.p_minus), Err(CgfError::OutsideMomentDomain { .. })));
        assert!(matches!(
            p.cgf_derivatives(p.p_minus - 1.0),
            Err(CgfError::OutsideMomentDomain { .. })
        ));
    }

    #[test]
    fn complex_extension_agrees_with_real_cgf() {
        let p = p5();
        for q in [-2.0, -0.5, 0.0, 0.3, 1.0, 3.0, 9.0] {
            let re = p.limiting_cgf(q);
            let c = p.limiting_cgf_c(Complex64::new(q, 0.0));
            if let Ok(v) = re {
                assert!((c.re - v).abs() < 1e-14 * (1.0 + v.abs()));
                assert_eq!(c.im, 0.0);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = p5();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let lo = p.p_minus + 0.05 * (p.p_plus - p.p_minus);
        let hi = p.p_plus - 0.05 * (p.p_plus - p.p_minus);
        for _ in 0..20 {
            let x: f64 = rng.gen_range(lo..hi);
            let h = 1e-4 * (1.0 + x.abs());
            let f = |p_: f64| p.limiting_cgf(p_).unwrap();
            // 4th-order central stencils
            let fd1 = (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h))
                / (12.0 * h);
            let fd2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x)
                + 16.0 * f(x - h)
                - f(x - 2.0 * h))
                / (12.0 * h * h);
            let fd3 = (f(x - 3.0 * h) - 8.0 * f(x - 2.0 * h) + 13.0 * f(x - h)
                - 13.0 * f(x + h)
                + 8.0 * f(x + 2.0 * h)
                - f(x + 3.0 * h))
                / (8.0 * h * h * h);
            let (v1, v2, v3) = p.cgf_derivatives(x).unwrap();
            assert!((v1 - fd1).abs() < 1e-6 * (1.0 + v1.abs()), "V' at {x}: {v1} vs {fd1}");
            assert!((v2 - fd2).abs() < 1e-6 * (1.0 + v2.abs()), "V'' at {x}: {v2} vs {fd2}");
            assert!((v3 - fd3).abs() < 1e-5 * (1.0 + v3.abs()), "V''' at {x}: {v3} vs {fd3}");
        }
    }

    #[test]
    fn second_derivative_positive_across_domain() {
        let p = p5();
        let eps = 1e-3 * (p.p_plus - p.p_minus);
        for i in 0..100 {
            let q = p.p_minus + eps + (p.p_plus - p.p_minus - 2.0 * eps) * i as f64 / 99.0;
            let (_, v2, _) = p.cgf_derivatives(q).unwrap();
            assert!(v2 > 0.0, "V''({q}) = {v2}");
        }
    }

    #[test]
    fn u_identities() {
        let p = p5();
        assert_eq!(p.u_fn(0.0).unwrap(), 1.0);
        assert_eq!(p.u_fn(1.0).unwrap(), 1.0);
        let expected0 = (p.theta - p.y0) / (2.0 * p.kappa);
        assert!((p.u_prime(0.0).unwrap() - expected0).abs() < 1e-12);
        let expected1 = (p.y0 - p.theta_bar) / (2.0 * p.kappa_bar);
        assert!((p.u_prime(1.0).unwrap() - expected1).abs() < 1e-12);
    }

    #[test]
    fn u_prime_matches_finite_differences() {
        let p = p5();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lo = p.p_minus + 0.05 * (p.p_plus - p.p_minus);
        let hi = p.p_plus - 0.05 * (p.p_plus - p.p_minus);
        for _ in 0..20 {
            let x: f64 = rng.gen_range(lo..hi);
            let h = 1e-5 * (1.0 + x.abs());
            let f = |p_: f64| p.u_fn(p_).unwrap();
            let fd = (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h))
                / (12.0 * h);
            let u1 = p.u_prime(x).unwrap();
            assert!((u1 - fd).abs() < 1e-6 * (1.0 + u1.abs()), "U' at {x}: {u1} vs {fd}");
        }
    }

    #[test]
    fn u_positive_on_domain() {
        let p = p5();
        for i in 0..60 {
            let q = p.p_minus + (p.p_plus - p.p_minus) * (i as f64 + 0.5) / 60.0;
            assert!(p.u_fn(q).unwrap() > 0.0);
        }
    }

    #[test]
    fn saddlepoint_hits_the_two_thresholds() {
        let p = p5();
        assert!(p.saddlepoint(-p.theta / 2.0).abs() < 1e-14);
        assert!((p.saddlepoint(p.theta_bar / 2.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn saddlepoint_degenerates_to_black_scholes() {
        // rho = 0, sigma -> 0: p*(x) -> 1/2 + x/theta
        let p = HestonParams::new(1.0, 0.04, 1e-6, 0.0, 0.04).unwrap();
        for x in [-0.02, 0.0, 0.02] {
            let expected = 0.5 + x / p.theta;
            assert!((p.saddlepoint(x) - expected).abs() < 1e-3);
        }
    }

    #[test]
    fn saddlepoint_agrees_with_bisection_on_cgf_slope() {
        let p = p5();
        // independent oracle: bisect V'(p) = x
        let bisect = |x: f64| {
            let mut lo = p.p_minus + 1e-9 * (p.p_plus - p.p_minus);
            let mut hi = p.p_plus - 1e-9 * (p.p_plus - p.p_minus);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let (v1, _, _) = p.cgf_derivatives(mid).unwrap();
                if v1 < x {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        for x in [-0.3, -0.05, 0.0, 0.05, 0.2] {
            let ps = p.saddlepoint(x);
            assert!((ps - bisect(x)).abs() < 1e-9, "x = {x}");
        }
        let ps = p.saddlepoint(0.05);
        assert!(ps > 1.0 && ps < p.p_plus);
    }

    #[test]
    fn saddlepoint_equation_on_grid() {
        let p = p5();
        for i in 0..201 {
            let x = -1.0 + 2.0 * i as f64 / 200.0;
            let ps = p.saddlepoint(x);
            assert!(ps > p.p_minus && ps < p.p_plus);
            let (v1, _, _) = p.cgf_derivatives(ps).unwrap();
            assert!((v1 - x).abs() < 1e-10, "V'(p*({x})) = {v1}");
        }
    }

    #[test]
    fn saddlepoint_strictly_increasing() {
        let p = p5();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..400 {
            let x = -2.0 + 4.0 * i as f64 / 399.0;
            let ps = p.saddlepoint(x);
            assert!(ps > prev, "p* not increasing at x = {x}");
            prev = ps;
        }
    }

    #[test]
    fn rate_function_threshold_values() {
        let p = p5();
        let at_left = p.rate_function(-p.theta / 2.0);
        assert!(at_left.v_star.abs() < 1e-14);
        let at_right = p.rate_function(p.theta_bar / 2.0);
        assert!((at_right.v_star - p.theta_bar / 2.0).abs() < 1e-13);
        assert!(at_left.v2 > 0.0 && at_right.v2 > 0.0);
    }

    #[test]
    fn rate_function_matches_grid_supremum() {
        let p = p5();
        let x = 0.1;
        let bundle = p.rate_function(x);
        assert!(bundle.v_star > 0.0);
        // independent oracle: sup over a dense grid of p x - V(p)
        let n = 100_000;
        let mut best = f64::NEG_INFINITY;
        for i in 1..n {
            let q = p.p_minus + (p.p_plus - p.p_minus) * i as f64 / n as f64;
            let v = p.limiting_cgf(q).unwrap();
            best = best.max(q * x - v);
        }
        assert!((bundle.v_star - best).abs() < 1e-8, "{} vs {}", bundle.v_star, best);
    }

    #[test]
    fn rate_function_nonnegativity_properties() {
        let p = p5();
        for i in 0..400 {
            let x = -1.0 + 2.0 * i as f64 / 399.0;
            let b = p.rate_function(x);
            assert!(b.v_star >= -1e-14, "V*({x}) = {}", b.v_star);
            assert!(b.v_star - x >= -1e-14, "V*({x}) - x = {}", b.v_star - x);
            if (x + p.theta / 2.0).abs() > 1e-3 {
                assert!(b.v_star > 0.0);
            }
            if (x - p.theta_bar / 2.0).abs() > 1e-3 {
                assert!(b.v_star - x > 0.0);
            }
        }
    }

    #[test]
    fn rate_function_derivative_is_saddlepoint() {
        let p = p5();
        for x in [-0.4, -0.1, 0.0, 0.05, 0.3] {
            let h = 1e-6;
            let fd = (p.rate_function(x + h).v_star - p.rate_function(x - h).v_star) / (2.0 * h);
            let ps = p.saddlepoint(x);
            assert!((fd - ps).abs() < 1e-6 * (1.0 + ps.abs()), "x = {x}: {fd} vs {ps}");
        }
    }

    #[test]
    fn rate_function_convex_in_x() {
        let p = p5();
        for i in 0..50 {
            let x = -0.5 + i as f64 / 49.0;
            let h = 1e-4;
            let fd2 = (p.rate_function(x + h).v_star - 2.0 * p.rate_function(x).v_star
                + p.rate_function(x - h).v_star)
                / (h * h);
            assert!(fd2 > 0.0, "V*'' <= 0 at x = {x}");
        }
    }
}
