//! Scalar special functions underlying every tail bound in the crate.
//!
//! * `phi(t) = e^t - 1 - t`, the exponential remainder that controls the mgf
//!   of a centered increment.
//! * `h(x) = (1+x)ln(1+x) - x`, the convex conjugate of `phi`; Bennett-type
//!   deviations are `h_inv` of the exponent.
//! * `upsilon(t) = t*phi(t)/(phi(t) - t^2/2)`, the curvature ratio that
//!   decides where the tail-split threshold sits (continuous extension
//!   `upsilon(0) = 3`, horizontal asymptote 2 at -inf).
//! * `rho(lambda, alpha, x) = (phi(lambda*x) - (lambda*x)^2/2) * e^{-x^alpha}`,
//!   the integrand whose unimodality drives the truncated-moment estimates.
//! * `z_threshold`, the deviation-scale threshold z(U, sigma; alpha), with the
//!   invariant `alpha * z^alpha >= 4` checked on every call.
//! * `g_inv`, the inverse of the range-restricted conjugate
//!   `g(t) = sup_{0<=lambda<=lambda0} (lambda*t - phi(lambda))`: the Bennett
//!   branch `h_inv` up to the slope-matching breakpoint, linear after it.
//! * `underline_log(x) = max(ln x, 1)`.
//!
//! Near-zero arguments go through explicit truncated series so the removable
//! singularities (`phi/t^2`, `upsilon`) stay accurate in double precision;
//! each crossover is chosen so the truncation error is below 1e-15 relative.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Shared stopping control for the iterative inversions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_iter: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-12, max_iter: 100 }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs > 0.0) {
            return Err(Error::Invalid(format!("tolerance abs must be > 0, got {}", self.abs)));
        }
        if !(self.rel >= 0.0) {
            return Err(Error::Invalid(format!("tolerance rel must be >= 0, got {}", self.rel)));
        }
        if self.max_iter < 1 {
            return Err(Error::Invalid("tolerance max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Inputs of the threshold z(U, sigma; alpha).
#[derive(Debug, Clone, Copy)]
pub struct ZInput {
    pub big_u: f64,
    pub sigma: f64,
    pub alpha: f64,
}

impl ZInput {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("bigU", self.big_u), ("sigma", self.sigma), ("alpha", self.alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("z_threshold: {name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

pub fn phi(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        // t^2/2 * (1 + t/3 + t^2/12 + t^3/60); next term is t^4/360 relative.
        0.5 * t * t * (1.0 + t / 3.0 + t * t / 12.0 + t * t * t / 60.0)
    } else {
        t.exp_m1() - t
    }
}

/// phi(t) - t^2/2, kept accurate near 0 where the leading terms cancel.
pub(crate) fn phi_residual(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        // t^3/6 * (1 + t/4 + t^2/20 + t^3/120)
        t * t * t / 6.0 * (1.0 + t / 4.0 + t * t / 20.0 + t * t * t / 120.0)
    } else {
        phi(t) - 0.5 * t * t
    }
}

pub fn upsilon(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        // Cancel t^3 in numerator and denominator and keep five series terms:
        //   t*phi(t)          = t^3 * (1/2 + t/6 + t^2/24 + t^3/120 + t^4/720)
        //   phi(t) - t^2/2    = t^3 * (1/6 + t/24 + t^2/120 + t^3/720 + t^4/5040)
        let num = 0.5 + t * (1.0 / 6.0 + t * (1.0 / 24.0 + t * (1.0 / 120.0 + t / 720.0)));
        let den = 1.0 / 6.0
            + t * (1.0 / 24.0 + t * (1.0 / 120.0 + t * (1.0 / 720.0 + t / 5040.0)));
        num / den
    } else {
        t * phi(t) / phi_residual(t)
    }
}

pub fn h(x: f64) -> Result<f64> {
    if !(x > -1.0) {
        return Err(Error::Domain(format!("h: x must be > -1, got {x}")));
    }
    if x.abs() < 1e-4 {
        // x^2/2 * (1 - x/3 + x^2/6 - x^3/10)
        Ok(0.5 * x * x * (1.0 - x / 3.0 + x * x / 6.0 - x * x * x / 10.0))
    } else {
        Ok((1.0 + x) * x.ln_1p() - x)
    }
}

/// Inverse of `h` on [0, inf): bracketed Newton started from the analytic
/// envelope sqrt(2u) <= h_inv(u) <= sqrt(2u) + u/3.
pub fn h_inv(u: f64, tol: &Tolerance) -> Result<f64> {
    tol.validate()?;
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("h_inv: u must be >= 0, got {u}")));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let mut lo = (2.0 * u).sqrt();
    let mut hi = lo + u / 3.0;
    let mut t = hi;
    for _ in 0..tol.max_iter {
        let r = h(t)? - u;
        if r.abs() <= tol.abs + tol.rel * u {
            return Ok(t);
        }
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        // h'(t) = ln(1+t); Newton step, bisection fallback if it leaves the bracket.
        let newton = t - r / t.ln_1p();
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::Iteration(format!("h_inv: no convergence at u={u} within {} iterations", tol.max_iter)))
}

pub fn rho(lambda: f64, alpha: f64, x: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("rho: lambda must be finite and > 0, got {lambda}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("rho: alpha must be finite and > 0, got {alpha}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("rho: x must be >= 0, got {x}")));
    }
    Ok(phi_residual(lambda * x) * (-x.powf(alpha)).exp())
}

pub fn underline_log(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("underline_log: x must be > 0, got {x}")));
    }
    Ok(x.ln().max(1.0))
}

/// z(U, sigma; alpha). For alpha >= 1 this is (4*underline_log(e U/sigma))^(1/alpha);
/// below 1 the quasi-norm variant ((4/alpha)ln(e/alpha) + 4(ln(U/sigma))_+)^(1/alpha).
pub fn z_threshold(zin: &ZInput) -> Result<f64> {
    zin.validate()?;
    let ZInput { big_u, sigma, alpha } = *zin;
    let z = if alpha >= 1.0 {
        (4.0 * underline_log(std::f64::consts::E * big_u / sigma)?).powf(1.0 / alpha)
    } else {
        let pos_log = (big_u / sigma).ln().max(0.0);
        ((4.0 / alpha) * (1.0 - alpha.ln()) + 4.0 * pos_log).powf(1.0 / alpha)
    };
    let zp = alpha * z.powf(alpha);
    assert!(
        zp >= 4.0 * (1.0 - 1e-12),
        "z_threshold invariant alpha*z^alpha >= 4 violated: got {zp} at U={big_u} sigma={sigma} alpha={alpha}"
    );
    Ok(z)
}

/// Gamma function for positive arguments (Lanczos, g = 7); used for the
/// declared Weibull moments. Accurate to ~1e-14 relative on the range the
/// generators use (x >= 1).
pub fn gamma(x: f64) -> Result<f64> {
    if !(x >= 0.5 && x.is_finite()) {
        return Err(Error::Domain(format!("gamma: only x >= 0.5 is supported, got {x}")));
    }
    const C: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    let z = x - 1.0;
    let mut a = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + 7.5;
    Ok((2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * a)
}

/// Inverse of g(t) = sup_{0<=lambda<=lambda0} (lambda t - phi(lambda)):
/// the Bennett inverse h_inv up to the breakpoint
/// x0 = lambda0*phi'(lambda0) - phi(lambda0), then linear with slope 1/lambda0.
pub fn g_inv(lambda0: f64, x: f64, tol: &Tolerance) -> Result<f64> {
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::Domain(format!("g_inv: lambda0 must be finite and > 0, got {lambda0}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("g_inv: x must be >= 0, got {x}")));
    }
    let t0 = lambda0.exp_m1(); // phi'(lambda0)
    let x0 = lambda0 * t0 - phi(lambda0);
    if x <= x0 {
        h_inv(x, tol)
    } else {
        Ok(t0 + (x - x0) / lambda0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, LN_2};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    /// Independent plain-bisection inverse of h, used as an oracle for h_inv.
    fn bisect_h(u: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while h(hi).unwrap() < u {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid).unwrap() < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn phi_values() {
        assert!(phi(0.0) == 0.0, "phi(0) must be exactly 0");
        assert!((phi(1.0) - (E - 2.0)).abs() < 1e-15, "phi(1) = e - 2");
        assert!((phi(-1.0) - (-1.0f64).exp()).abs() < 1e-15, "phi(-1) = 1/e");
        assert!(phi(-30.0) > 0.0 && phi(0.5) > 0.0, "phi > 0 away from 0");
    }

    #[test]
    fn phi_series_matches_direct_branch() {
        for &t in &[0.999e-4f64, 1.001e-4, -0.999e-4, -1.001e-4] {
            let series = 0.5 * t * t * (1.0 + t / 3.0 + t * t / 12.0 + t * t * t / 60.0);
            let direct = t.exp_m1() - t;
            assert!(
                (series - direct).abs() <= 5e-11 * direct.abs(),
                "phi branches disagree at t={t}: {series} vs {direct}"
            );
        }
    }

    #[test]
    fn phi_over_t_squared_increasing_with_limit_half() {
        // ratio r(t) = phi(t)/t^2 is increasing, and r(0+) = 1/2.
        let r = |t: f64| if t == 0.0 { 0.5 } else { phi(t) / (t * t) };
        let mut prev = r(-10.0);
        let mut t = -10.0f64 + 0.25;
        while t <= 10.0 + 1e-9 {
            let cur = r(t);
            assert!(cur > prev, "phi(t)/t^2 not increasing at t={t}: {cur} <= {prev}");
            prev = cur;
            t += 0.25;
        }
        assert!((r(1e-9) - 0.5).abs() < 1e-9, "phi(t)/t^2 -> 1/2 at 0");
    }

    #[test]
    fn h_values_and_domain() {
        assert!(h(0.0).unwrap() == 0.0);
        assert!((h(1.0).unwrap() - (2.0 * LN_2 - 1.0)).abs() < 1e-15, "h(1) = 2 ln 2 - 1");
        assert!((h(E - 1.0).unwrap() - 1.0).abs() < 1e-14, "h(e-1) = 1");
        assert!(h(-1.0).is_err() && h(-2.0).is_err(), "h domain is x > -1");
        assert!(h(f64::NAN).is_err());
        // series branch consistency
        for &x in &[0.999e-4f64, -0.999e-4, 1.001e-4, -1.001e-4] {
            let direct = (1.0 + x) * x.ln_1p() - x;
            assert!((h(x).unwrap() - direct).abs() <= 5e-11 * direct.abs() + 1e-30);
        }
    }

    #[test]
    fn h_is_conjugate_of_phi() {
        // h(x) = sup_lambda (lambda x - phi(lambda)), maximizer lambda* = ln(1+x).
        let mut x = 0.0f64;
        while x <= 50.0 {
            let lam = x.ln_1p();
            let inner = lam * x - phi(lam);
            assert!(
                (h(x).unwrap() - inner).abs() <= 1e-6,
                "conjugacy identity off at x={x}"
            );
            // no lambda on a coarse grid beats the closed-form maximizer
            let mut l = 0.0f64;
            while l <= lam + 2.0 {
                assert!(l * x - phi(l) <= h(x).unwrap() + 1e-9, "conjugate exceeded at x={x}, lambda={l}");
                l += 0.05;
            }
            x += 0.5;
        }
    }

    #[test]
    fn upsilon_values() {
        assert!(upsilon(0.0) == 3.0, "continuity extension upsilon(0) = 3");
        let far = upsilon(-1e6);
        assert!(far > 2.0 && far < 2.001, "upsilon(-1e6) should sit just above the asymptote 2, got {far}");
        let near_four = upsilon(2.68);
        assert!((near_four - 3.996).abs() < 2e-3 && near_four < 4.0, "upsilon(2.68) ~ 3.996, got {near_four}");
        // series/direct crossover
        for &t in &[0.999e-3f64, 1.001e-3, -0.999e-3, -1.001e-3] {
            let direct = t * (t.exp_m1() - t) / ((t.exp_m1() - t) - 0.5 * t * t);
            assert!((upsilon(t) - direct).abs() <= 1e-9 * direct.abs(), "upsilon branches disagree at t={t}");
        }
    }

    #[test]
    fn upsilon_monotone_convex_and_bounded() {
        // increasing and strictly convex on [-20, 20], and <= max(4, 1.5 t) everywhere sampled
        let step = 0.05;
        let n = (40.0 / step) as usize;
        let vals: Vec<f64> = (0..=n).map(|i| upsilon(-20.0 + step * i as f64)).collect();
        for w in vals.windows(2) {
            assert!(w[1] > w[0], "upsilon not increasing");
        }
        for w in vals.windows(3) {
            let second = w[2] - 2.0 * w[1] + w[0];
            assert!(second > 0.0, "upsilon not strictly convex: second difference {second}");
        }
        let mut t = -20.0f64;
        while t <= 30.0 {
            let cap = 4.0f64.max(1.5 * t);
            assert!(upsilon(t) <= cap + 1e-12, "upsilon({t}) exceeds max(4, 1.5t)");
            t += 0.1;
        }
    }

    #[test]
    fn rho_values_domain_and_derivative_sign() {
        assert!(rho(1.0, 1.0, 0.0).unwrap() == 0.0);
        let expect = (E - 2.5) / E;
        assert!((rho(1.0, 1.0, 1.0).unwrap() - expect).abs() < 1e-15, "rho(1,1,1) = (e - 5/2)/e");
        assert!(rho(0.0, 1.0, 1.0).is_err());
        assert!(rho(1.0, 0.0, 1.0).is_err());
        assert!(rho(1.0, 1.0, -0.1).is_err());
        // sign of d rho/dx equals sign of upsilon(lambda x) - alpha x^alpha
        let sign_cases = [
            (1.0, 1.0, 2.0),  // upsilon(2) ~ 3.67 > 2  -> increasing
            (1.0, 2.0, 2.0),  // upsilon(2) ~ 3.67 < 2*2^2 -> decreasing
            (0.5, 1.0, 6.0),  // upsilon(3) ~ 4.33 < 6 -> decreasing
        ];
        for &(lam, alpha, x) in &sign_cases {
            let hdx = 1e-6;
            let slope = rho(lam, alpha, x + hdx).unwrap() - rho(lam, alpha, x - hdx).unwrap();
            let predictor = upsilon(lam * x) - alpha * x.powf(alpha);
            assert!(
                slope.signum() == predictor.signum(),
                "rho' sign mismatch at lambda={lam} alpha={alpha} x={x}: slope {slope}, predictor {predictor}"
            );
        }
    }

    #[test]
    fn underline_log_values() {
        assert!(underline_log(1.0).unwrap() == 1.0);
        assert!(underline_log(E).unwrap() == 1.0);
        assert!((underline_log(E * E).unwrap() - 2.0).abs() < 1e-15);
        assert!(underline_log(0.5).unwrap() == 1.0, "clamped below e");
        assert!(underline_log(0.0).is_err() && underline_log(-3.0).is_err());
    }

    #[test]
    fn z_threshold_values() {
        let z1 = z_threshold(&ZInput { big_u: 1.0, sigma: 1.0, alpha: 1.0 }).unwrap();
        assert!((z1 - 4.0).abs() < 1e-12, "z(1,1;1) = 4, got {z1}");
        let z2 = z_threshold(&ZInput { big_u: 1.0, sigma: 1.0, alpha: 2.0 }).unwrap();
        assert!((z2 - 2.0).abs() < 1e-12, "z(1,1;2) = 2, got {z2}");
        // scale invariance in U/sigma
        let z1s = z_threshold(&ZInput { big_u: 7.0, sigma: 7.0, alpha: 1.0 }).unwrap();
        assert!((z1s - 4.0).abs() < 1e-12);
        // alpha = 1/2: z = ((8)ln(2e))^2 since ln(e/alpha) = ln(2e), (ln U/sigma)_+ = 0
        let zh = z_threshold(&ZInput { big_u: 1.0, sigma: 1.0, alpha: 0.5 }).unwrap();
        let expect = (8.0 * (2.0 * E).ln()).powi(2);
        assert!((zh - expect).abs() < 1e-9 * expect, "z(1,1;1/2), got {zh} want {expect}");
        assert!(z_threshold(&ZInput { big_u: 0.0, sigma: 1.0, alpha: 1.0 }).is_err());
        assert!(z_threshold(&ZInput { big_u: 1.0, sigma: -1.0, alpha: 1.0 }).is_err());
    }

    #[test]
    fn z_threshold_invariant_grid() {
        // alpha*z^alpha >= 4 and e^{z^alpha} >= (e^4/16)(U z/sigma)^2 on the documented grid
        for &alpha in &[0.25, 0.5, 1.0, 2.0, 4.0] {
            for &ratio in &[0.5, 1.0, 10.0, 1e3] {
                let z = z_threshold(&ZInput { big_u: ratio, sigma: 1.0, alpha }).unwrap();
                let za = alpha * z.powf(alpha);
                assert!(za >= 4.0 - 1e-9, "alpha z^alpha = {za} < 4 at alpha={alpha} ratio={ratio}");
                // compare in log space to dodge overflow at small alpha
                let lhs = z.powf(alpha);
                let rhs = 4.0 - (16.0f64).ln() + 2.0 * (ratio * z).ln();
                assert!(lhs >= rhs - 1e-9, "e^(z^alpha) lower bound fails at alpha={alpha} ratio={ratio}");
            }
        }
    }

    #[test]
    fn moment_versus_orlicz_exponential_bound() {
        // t^p <= (p/(alpha e))^(p/alpha) * e^(t^alpha) on t in [0, 50]
        for &p in &[1.0, 2.0, 4.0] {
            for &alpha in &[0.5, 1.0, 2.0] {
                let c = (p / (alpha * E)).powf(p / alpha);
                let mut t = 0.0f64;
                while t <= 50.0 {
                    let lhs = t.powf(p);
                    let rhs_log = t.powf(alpha);
                    // compare in logs when the exponential is large
                    if rhs_log < 700.0 {
                        assert!(lhs <= c * rhs_log.exp() * (1.0 + 1e-12), "moment bound fails p={p} alpha={alpha} t={t}");
                    }
                    t += 0.25;
                }
            }
        }
    }

    #[test]
    fn tail_weight_monotone_once_past_critical_point() {
        // t^p e^{-t^alpha} is nonincreasing where alpha t^alpha >= p
        for &p in &[1.0, 2.0, 4.0] {
            for &alpha in &[0.5, 1.0, 2.0] {
                let f = |t: f64| p * t.ln() - t.powf(alpha); // log of t^p e^{-t^alpha}
                let start = (p / alpha).powf(1.0 / alpha);
                let mut t = start.max(1e-6);
                let mut prev = f(t);
                for _ in 0..200 {
                    t += 0.25;
                    let cur = f(t);
                    assert!(cur <= prev + 1e-12, "t^p e^(-t^alpha) increased past critical point, p={p} alpha={alpha} t={t}");
                    prev = cur;
                }
            }
        }
    }

    #[test]
    fn h_inv_roundtrip_envelopes_and_oracle() {
        let mut u = 1e-6f64;
        while u <= 1e6 {
            let t = h_inv(u, &tol()).unwrap();
            let back = h(t).unwrap();
            assert!(
                (back - u).abs() <= 1e-10 * (1.0 + u),
                "h_inv roundtrip off at u={u}: h(h_inv(u)) = {back}"
            );
            let lo = (2.0 * u).sqrt();
            assert!(t >= lo - 1e-12 * (1.0 + lo), "lower envelope sqrt(2u) violated at u={u}");
            assert!(t <= lo + u / 3.0 + 1e-12 * (1.0 + u), "upper envelope sqrt(2u)+u/3 violated at u={u}");
            u *= 3.7;
        }
        assert!(h_inv(0.0, &tol()).unwrap() == 0.0);
        assert!((h_inv(1.0, &tol()).unwrap() - (E - 1.0)).abs() < 1e-10, "h_inv(1) = e - 1");
        assert!(h_inv(-0.5, &tol()).is_err());
        for &u in &[1e-3f64, 0.1, 2.0 * LN_2 - 1.0, 1.0, 17.5, 4096.0] {
            let fast = h_inv(u, &tol()).unwrap();
            let slow = bisect_h(u);
            assert!((fast - slow).abs() <= 1e-8 * (1.0 + slow), "h_inv disagrees with bisection oracle at u={u}");
        }
    }

    #[test]
    fn h_inv_respects_max_iter() {
        let strict = Tolerance { abs: 1e-300, rel: 0.0, max_iter: 1 };
        assert!(matches!(h_inv(5.0, &strict), Err(Error::Iteration(_))));
        let bad = Tolerance { abs: 0.0, ..Tolerance::default() };
        assert!(matches!(h_inv(1.0, &bad), Err(Error::Invalid(_))));
    }

    #[test]
    fn g_inv_branches_and_breakpoint_continuity() {
        let lam = LN_2;
        let x0 = 2.0 * LN_2 - 1.0; // lambda0 phi'(lambda0) - phi(lambda0) at lambda0 = ln 2
        // Bennett branch exactly at the breakpoint: g_inv = h_inv(x0) = 1
        let at = g_inv(lam, x0, &tol()).unwrap();
        assert!((at - 1.0).abs() < 1e-8, "g_inv at breakpoint should be 1, got {at}");
        // continuity across the breakpoint
        let below = g_inv(lam, x0 - 1e-10, &tol()).unwrap();
        let above = g_inv(lam, x0 + 1e-10, &tol()).unwrap();
        assert!((below - above).abs() < 1e-8, "g_inv jumps at breakpoint: {below} vs {above}");
        // linear branch value: t0 + (x - x0)/lambda0 with t0 = 1
        let lin = g_inv(lam, 1.0, &tol()).unwrap();
        let expect = 1.0 + (1.0 - x0) / lam;
        assert!((lin - expect).abs() < 1e-12, "linear branch at x=1: got {lin} want {expect}");
        assert!(g_inv(lam, 0.0, &tol()).unwrap() == 0.0);
        assert!(g_inv(0.0, 1.0, &tol()).is_err());
        assert!(g_inv(lam, -1.0, &tol()).is_err());
    }

    #[test]
    fn g_inv_linear_branch_bounded_by_two_x_over_lambda() {
        for &lam in &[0.25, LN_2, 1.0, 2.0] {
            let t0 = lam.exp_m1();
            let x0 = lam * t0 - phi(lam);
            for &mult in &[1.001, 2.0, 10.0, 100.0] {
                let x = x0 * mult;
                let v = g_inv(lam, x, &tol()).unwrap();
                assert!(v <= 2.0 * x / lam + 1e-12, "g_inv({lam}, {x}) = {v} exceeds 2x/lambda0");
            }
        }
    }

    #[test]
    fn gamma_reference_values() {
        let pi = std::f64::consts::PI;
        for (x, want) in [
            (1.0, 1.0),
            (2.0, 1.0),
            (3.0, 2.0),
            (5.0, 24.0),
            (1.5, pi.sqrt() / 2.0),
            (2.5, 3.0 * pi.sqrt() / 4.0),
            (0.5, pi.sqrt()),
        ] {
            let got = gamma(x).unwrap();
            assert!((got - want).abs() <= 1e-13 * want, "gamma({x}) = {got}, want {want}");
        }
        // recurrence gamma(x+1) = x gamma(x) on an off-integer grid
        for &x in &[1.2f64, 1.9, 3.3, 7.7] {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs, "recurrence fails at {x}");
        }
        assert!(gamma(0.4).is_err());
        assert!(gamma(f64::NAN).is_err());
    }

    #[test]
    fn g_inv_monotone_in_x() {
        let lam = 0.7;
        let mut prev = 0.0f64;
        let mut x = 0.0f64;
        while x < 5.0 {
            x += 0.05;
            let v = g_inv(lam, x, &tol()).unwrap();
            assert!(v > prev, "g_inv not increasing at x={x}");
            prev = v;
        }
    }
}
