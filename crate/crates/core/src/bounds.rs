//! The deviation-bound evaluators: the master Bennett/Bernstein pair for
//! matrix supermartingales with psi_alpha-bounded differences, the
//! intrinsic-dimension variants (bounded and unbounded increments), the
//! corollaries (i.i.d. sums, scalar case, sample covariance, empirical
//! Bernstein, bounded differences / McDiarmid, norm of a sum), the tail
//! threshold lemma, and the prior-work baselines used for comparison.
//!
//! Conventions shared by every evaluator:
//! * deviations bound `max_k lambda_max(S_k)` on the declared event, with
//!   confidence `1 - failure_budget`;
//! * `z = z_threshold(U, sigma; alpha)` unless a corollary pins different
//!   arguments (the i.i.d. corollary uses z(K, sigma; alpha), the covariance
//!   corollary z(U, sigma; alpha/2));
//! * for alpha < 1 an additive correction `(3K/alpha) x (2x + A_ln)^((1-alpha)/alpha)`
//!   applies and the failure budget gains one extra e^{-x} term. The log
//!   block A_ln defaults to the conservative reading 4 ln(2U/K) +
//!   (4/alpha) ln(4/(alpha e)), valid for every x > 0; `literal_log_block`
//!   switches to 2 ln(4U/K) + (4/alpha) ln(4/(alpha e)). Either choice is
//!   recorded in `warnings`.

use crate::error::{Error, Result};
use crate::linalg::{intrinsic_dim, lambda_max, matrix_fn, psd_leq, HermitianMatrix};
use crate::scalar::{h, h_inv, underline_log, z_threshold, Tolerance, ZInput};
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, SQRT_2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SubGaussian,
    SubPoisson,
    SubExponential,
    NotApplicable,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::SubGaussian => "SubGaussian",
            Regime::SubPoisson => "SubPoisson",
            Regime::SubExponential => "SubExponential",
            Regime::NotApplicable => "NotApplicable",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundResult {
    pub deviation: f64,
    pub failure_budget: f64,
    pub regime: Regime,
    pub formula: String,
    pub warnings: Vec<String>,
}

/// Common inputs of the martingale bounds. `dim` and `cov` are mutually
/// exclusive: ambient-dimension results take `dim`, intrinsic-dimension
/// results take the covariance-proxy matrix.
#[derive(Debug, Clone)]
pub struct TailParams {
    pub alpha: f64,
    pub sigma: f64,
    pub big_u: f64,
    pub big_k: f64,
    pub x: f64,
    pub dim: Option<usize>,
    pub cov: Option<HermitianMatrix>,
    /// Balance parameter of the unbounded intrinsic-dimension bound, in (0, 1].
    pub eps: f64,
    pub n: Option<u64>,
    pub literal_log_block: bool,
    /// Covariance corollary: evaluate the min-block exponent at alpha/2
    /// instead of the literal alpha.
    pub cov_half_alpha: bool,
}

impl TailParams {
    pub fn new(alpha: f64, sigma: f64, big_u: f64, big_k: f64, x: f64) -> Self {
        TailParams {
            alpha,
            sigma,
            big_u,
            big_k,
            x,
            dim: None,
            cov: None,
            eps: 1.0,
            n: None,
            literal_log_block: false,
            cov_half_alpha: false,
        }
    }

    pub fn with_dim(mut self, d: usize) -> Self {
        self.dim = Some(d);
        self
    }

    pub fn with_cov(mut self, cov: HermitianMatrix) -> Self {
        self.cov = Some(cov);
        self
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("sigma", self.sigma),
            ("bigK", self.big_k),
            ("x", self.x),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Precondition(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.big_u >= self.big_k && self.big_u.is_finite()) {
            return Err(Error::Precondition(format!(
                "bigU >= bigK > 0 required, got bigU = {}, bigK = {}",
                self.big_u, self.big_k
            )));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::Precondition(format!("eps must lie in (0, 1], got {}", self.eps)));
        }
        match (&self.dim, &self.cov) {
            (Some(d), None) => {
                if *d == 0 {
                    return Err(Error::Precondition("dim must be >= 1".into()));
                }
            }
            (None, Some(_)) => {}
            (None, None) => {
                return Err(Error::Precondition("exactly one of dim/cov must be set (got neither)".into()))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Precondition("exactly one of dim/cov must be set (got both)".into()))
            }
        }
        if let Some(n) = self.n {
            if n == 0 {
                return Err(Error::Precondition("n must be >= 1".into()));
            }
        }
        Ok(())
    }

    fn require_dim(&self) -> Result<usize> {
        self.dim
            .ok_or_else(|| Error::Precondition("this bound needs the ambient dimension `dim`".into()))
    }

    fn require_cov(&self) -> Result<&HermitianMatrix> {
        self.cov
            .as_ref()
            .ok_or_else(|| Error::Precondition("this bound needs the covariance-proxy matrix `cov`".into()))
    }

    fn require_n(&self) -> Result<f64> {
        self.n
            .map(|n| n as f64)
            .ok_or_else(|| Error::Precondition("this bound needs the sample count `n`".into()))
    }

    fn z(&self) -> Result<f64> {
        z_threshold(&ZInput { big_u: self.big_u, sigma: self.sigma, alpha: self.alpha })
    }
}

fn thm1_budget(d: f64, x: f64, alpha: f64) -> f64 {
    d * (-x).exp() + if alpha < 1.0 { (-x).exp() } else { 0.0 }
}

/// The alpha < 1 additive correction and its provenance code; zero above 1.
/// `x_factor` is x for the master bounds and max(1, x) for the unbounded
/// intrinsic-dimension variant.
fn subunit_extra(p: &TailParams, x_factor: f64) -> (f64, Vec<String>) {
    if p.alpha >= 1.0 {
        return (0.0, vec![]);
    }
    let a = p.alpha;
    let tail_block = (4.0 / a) * (4.0 / (a * E)).ln();
    let (a_ln, code) = if p.literal_log_block {
        (2.0 * (4.0 * p.big_u / p.big_k).ln() + tail_block, "alpha-lt-1-log-block=literal")
    } else {
        (4.0 * (2.0 * p.big_u / p.big_k).ln() + tail_block, "alpha-lt-1-log-block=conservative")
    };
    let extra = (3.0 * p.big_k / a) * x_factor * (2.0 * p.x + a_ln).powf((1.0 - a) / a);
    (extra, vec![code.to_string()])
}

/// Shared min-block of the Bennett-flavored bounds.
fn bennett_denominator(alpha: f64, z: f64, ratio_sq_x: f64) -> Result<f64> {
    Ok((2.0 * alpha * z.powf(alpha)).min(underline_log(ratio_sq_x)?))
}

pub fn thm1_bennett(p: &TailParams) -> Result<BoundResult> {
    p.validate()?;
    let d = p.require_dim()? as f64;
    let z = p.z()?;
    let denom = bennett_denominator(p.alpha, z, (p.big_k * z / p.sigma).powi(2) * p.x)?;
    let (extra, warnings) = subunit_extra(p, p.x);
    let deviation = p.sigma * (2.0 * p.x).sqrt() + 4.0 * p.big_k * z * p.x / denom + extra;
    let (regime, _) = regime_classify(p)?;
    Ok(BoundResult {
        deviation,
        failure_budget: thm1_budget(d, p.x, p.alpha),
        regime,
        formula: "thm1-ben".into(),
        warnings,
    })
}

pub fn thm1_bernstein(p: &TailParams) -> Result<BoundResult> {
    p.validate()?;
    let d = p.require_dim()? as f64;
    let z = p.z()?;
    let (extra, warnings) = subunit_extra(p, p.x);
    let deviation = p.sigma * (2.0 * p.x).sqrt() + 0.75 * p.big_k * z * p.x + extra;
    let (regime, _) = regime_classify(p)?;
    Ok(BoundResult {
        deviation,
        failure_budget: thm1_budget(d, p.x, p.alpha),
        regime,
        formula: "thm1-ber".into(),
        warnings,
    })
}

pub fn thm1_mixed(p: &TailParams) -> Result<BoundResult> {
    let ben = thm1_bennett(p)?;
    let ber = thm1_bernstein(p)?;
    let mut out = if ben.deviation <= ber.deviation { ben } else { ber };
    out.formula = "thm1-mixed".into();
    Ok(out)
}

/// Bernstein variant optimized over the variance proxy: the objective
/// sigma' sqrt(2x) + (3/4) K z(U, sigma'; alpha) x is nonincreasing in
/// sigma' only while sigma' < U (z is clamped above), so a coarse scan plus
/// golden-section on the documented bracket, with sigma' = U added to the
/// candidate set, returns the true infimum over sigma' >= sigma. That makes
/// the output nonincreasing as sigma decreases.
pub fn thm1_monotone(p: &TailParams, grid: u32) -> Result<BoundResult> {
    p.validate()?;
    if grid < 1 {
        return Err(Error::Precondition("grid must be >= 1".into()));
    }
    let d = p.require_dim()? as f64;
    let sqrt2x = (2.0 * p.x).sqrt();
    let objective = |sp: f64| -> Result<f64> {
        let z = z_threshold(&ZInput { big_u: p.big_u, sigma: sp, alpha: p.alpha })?;
        Ok(sp * sqrt2x + 0.75 * p.big_k * z * p.x)
    };
    let z_tilde =
        z_threshold(&ZInput { big_u: p.big_u, sigma: p.big_k * p.x.sqrt(), alpha: p.alpha })?;
    let hi = p.sigma + p.big_k * z_tilde * p.x.sqrt();
    let g = grid as usize;
    let pts: Vec<f64> = (0..=g)
        .map(|i| p.sigma + (hi - p.sigma) * i as f64 / g as f64)
        .collect();
    let mut best = f64::INFINITY;
    let mut best_i = 0usize;
    for (i, &sp) in pts.iter().enumerate() {
        let v = objective(sp)?;
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut a = pts[best_i.saturating_sub(1)];
    let mut b = pts[(best_i + 1).min(g)];
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c1 = b - INVPHI * (b - a);
    let mut c2 = a + INVPHI * (b - a);
    let mut f1 = objective(c1)?;
    let mut f2 = objective(c2)?;
    for _ in 0..120 {
        if b - a <= 1e-12 * (1.0 + b) {
            break;
        }
        if f1 <= f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - INVPHI * (b - a);
            f1 = objective(c1)?;
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + INVPHI * (b - a);
            f2 = objective(c2)?;
        }
    }
    let mut core = best.min(f1).min(f2);
    if p.big_u > p.sigma {
        core = core.min(objective(p.big_u)?);
    }
    // closed-form certificate: inf <= sigma sqrt(2x) + (5/2) K z~ x
    let certificate = p.sigma * sqrt2x + 2.5 * p.big_k * z_tilde * p.x;
    assert!(
        core <= certificate * (1.0 + 1e-9),
        "optimized variance proxy exceeded its closed-form certificate: {core} > {certificate}"
    );
    let (extra, warnings) = subunit_extra(p, p.x);
    let (regime, _) = regime_classify(p)?;
    Ok(BoundResult {
        deviation: core + extra,
        failure_budget: thm1_budget(d, p.x, p.alpha),
        regime,
        formula: "thm1-monotone".into(),
        warnings,
    })
}

/// Classifies r = (K z / sigma)^2 x against 1 and e^{2 alpha z^alpha} and
/// returns the certified envelope for the regime (None when alpha < 1 or in
/// the limiting degenerate cases). Boundaries are inclusive on the left
/// regime.
pub fn regime_classify(p: &TailParams) -> Result<(Regime, Option<f64>)> {
    p.validate()?;
    if p.alpha < 1.0 {
        return Ok((Regime::NotApplicable, None));
    }
    let z = p.z()?;
    let r = (p.big_k * z / p.sigma).powi(2) * p.x;
    if r <= 1.0 {
        return Ok((Regime::SubGaussian, Some(6.0 * p.sigma * (2.0 * p.x).sqrt())));
    }
    let split = 2.0 * p.alpha * z.powf(p.alpha);
    // compare against e^split without overflowing for large alpha z^alpha
    let sub_poisson = if split < 709.0 { r <= split.exp() } else { r.ln() <= split };
    if sub_poisson {
        Ok((Regime::SubPoisson, Some(8.0 * p.big_k * z * p.x / r.ln())))
    } else {
        Ok((
            Regime::SubExponential,
            Some(6.0 * p.big_k * z * p.x / (p.alpha * z.powf(p.alpha))),
        ))
    }
}

/// Source of the intrinsic dimension for the dimension-free bounds: either
/// the covariance-proxy matrix itself or a precomputed r >= 1.
pub enum CovOrR<'a> {
    Cov(&'a HermitianMatrix),
    R(f64),
}

fn resolve_intrinsic(sigma2: f64, cov_or_r: &CovOrR) -> Result<f64> {
    match cov_or_r {
        CovOrR::R(r) => {
            if !(*r >= 1.0 && r.is_finite()) {
                return Err(Error::Precondition(format!("intrinsic dimension must be >= 1, got {r}")));
            }
            Ok(*r)
        }
        CovOrR::Cov(c) => {
            let lmax = lambda_max(c)?;
            if (sigma2 - lmax).abs() > 1e-9 * (1.0 + lmax.abs()) {
                return Err(Error::Precondition(format!(
                    "sigma2 = {sigma2} must equal lambda_max(cov) = {lmax}"
                )));
            }
            intrinsic_dim(c)
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundedResult {
    pub bound: BoundResult,
    /// underline-log relaxation of the exact h-inverse deviation.
    pub relaxed_deviation: f64,
    pub intrinsic_dim: f64,
}

/// Intrinsic-dimension bound for a.s. bounded increments
/// (lambda_max(X_i) <= K): deviation (sigma^2/K) h^{-1}(K^2 x / sigma^2)
/// with failure budget r(cov) e^{-x+1}, stated for x >= 1.
pub fn thm2_bounded(
    sigma2: f64,
    big_k: f64,
    cov_or_r: CovOrR,
    x: f64,
    tol: &Tolerance,
) -> Result<BoundedResult> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Precondition(format!("sigma2 must be finite and > 0, got {sigma2}")));
    }
    if !(big_k > 0.0 && big_k.is_finite()) {
        return Err(Error::Precondition(format!("bigK must be finite and > 0, got {big_k}")));
    }
    if !(x >= 1.0) {
        return Err(Error::Precondition(format!(
            "the bounded intrinsic-dimension bound is stated for x >= 1, got {x}"
        )));
    }
    let r = resolve_intrinsic(sigma2, &cov_or_r)?;
    let sigma = sigma2.sqrt();
    let deviation = sigma2 / big_k * h_inv(big_k * big_k * x / sigma2, tol)?;
    let relaxed = sigma * (2.0 * x).sqrt()
        + 2.0 * big_k * x / underline_log((big_k / sigma).powi(2) * x)?;
    assert!(
        relaxed >= deviation * (1.0 - 1e-9),
        "h-inverse relaxation fell below the exact deviation: {relaxed} < {deviation}"
    );
    Ok(BoundedResult {
        bound: BoundResult {
            deviation,
            failure_budget: r * (1.0 - x).exp(),
            regime: Regime::NotApplicable,
            formula: "thm2".into(),
            warnings: vec![],
        },
        relaxed_deviation: relaxed,
        intrinsic_dim: r,
    })
}

/// Tail form of the bounded intrinsic-dimension result:
/// P(max_k lambda_max(S_k) >= t) <= e r exp(-(sigma^2/K^2) h(K t / sigma^2)).
pub fn thm2_tail(sigma2: f64, big_k: f64, cov_or_r: CovOrR, t: f64) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) || !(big_k > 0.0 && big_k.is_finite()) {
        return Err(Error::Precondition("sigma2 and bigK must be finite and > 0".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Precondition(format!("t must be >= 0, got {t}")));
    }
    let r = resolve_intrinsic(sigma2, &cov_or_r)?;
    Ok(E * r * (-(sigma2 / (big_k * big_k)) * h(big_k * t / sigma2)?).exp())
}

#[derive(Debug, Clone)]
pub struct UnboundedBounds {
    pub bennett: BoundResult,
    pub bernstein: BoundResult,
    pub intrinsic_dim: f64,
}

/// Intrinsic-dimension bound without a.s. boundedness: Bennett and Bernstein
/// variants balanced by eps, failure budget (e r(cov) + 1) e^{-x}
/// (+ e^{-x} below alpha = 1).
pub fn thm3_unbounded(p: &TailParams) -> Result<UnboundedBounds> {
    p.validate()?;
    let cov = p.require_cov()?;
    let lmax = lambda_max(cov)?;
    if (p.sigma * p.sigma - lmax).abs() > 1e-9 * (1.0 + lmax.abs()) {
        return Err(Error::Precondition(format!(
            "sigma^2 = {} must equal lambda_max(cov) = {lmax}",
            p.sigma * p.sigma
        )));
    }
    let r = intrinsic_dim(cov)?;
    let z = p.z()?;
    let lfac = (8.0 / p.eps).ln().powf(1.0 / p.alpha);
    let denom = bennett_denominator(p.alpha, z, (p.big_k * z / p.sigma).powi(2) * p.x)?;
    let (extra, mut warnings) = subunit_extra(p, p.x.max(1.0));
    if p.alpha < 1.0 {
        warnings.push("alpha-lt-1-extra-x-factor=max(1,x)".into());
    }
    let first = (1.0 + p.eps) * p.sigma * (2.0 * p.x).sqrt();
    let budget = (E * r + 1.0) * (-p.x).exp() + if p.alpha < 1.0 { (-p.x).exp() } else { 0.0 };
    let bennett = BoundResult {
        deviation: first + 7.0 * lfac * p.big_k * z * p.x / denom + extra,
        failure_budget: budget,
        regime: Regime::NotApplicable,
        formula: "thm3-ben".into(),
        warnings: warnings.clone(),
    };
    let bernstein = BoundResult {
        deviation: first + 2.0 * lfac * p.big_k * z * p.x + extra,
        failure_budget: budget,
        regime: Regime::NotApplicable,
        formula: "thm3-ber".into(),
        warnings,
    };
    Ok(UnboundedBounds { bennett, bernstein, intrinsic_dim: r })
}

/// I.i.d.-sum corollary (alpha >= 1): the master Bennett form at x/n with
/// z = z(K, sigma; alpha), where sigma and K are per-step declarations.
pub fn cor_iid(p: &TailParams) -> Result<BoundResult> {
    p.validate()?;
    let d = p.require_dim()? as f64;
    let n = p.require_n()?;
    if p.alpha < 1.0 {
        return Err(Error::Precondition(format!(
            "the i.i.d. corollary is stated for alpha >= 1, got alpha = {}",
            p.alpha
        )));
    }
    let z = z_threshold(&ZInput { big_u: p.big_k, sigma: p.sigma, alpha: p.alpha })?;
    let xn = p.x / n;
    let denom = bennett_denominator(p.alpha, z, (p.big_k * z / p.sigma).powi(2) * xn)?;
    let deviation = p.sigma * (2.0 * xn).sqrt() + 4.0 * p.big_k * z * xn / denom;
    Ok(BoundResult {
        deviation,
        failure_budget: d * (-p.x).exp(),
        regime: Regime::NotApplicable,
        formula: "cor-iid".into(),
        warnings: vec![],
    })
}

/// Scalar corollary: the d = 1 master Bennett bound (valid down to any
/// alpha > 0, with the subunit correction below 1).
pub fn cor_scalar(p: &TailParams) -> Result<BoundResult> {
    p.validate()?;
    let d = p.require_dim()?;
    if d != 1 {
        return Err(Error::Precondition(format!("the scalar corollary requires dim = 1, got {d}")));
    }
    let mut out = thm1_bennett(p)?;
    out.formula = "cor-scalar".into();
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CovarianceBounds {
    pub upper: BoundResult,
    pub lower: BoundResult,
    /// underline-log relaxation of the exact lower deviation.
    pub lower_relaxed: f64,
}

/// Sample-covariance corollary (alpha >= 2), with z = z(U, sigma; alpha/2).
/// The min-block exponent uses the literal alpha unless `cov_half_alpha`.
pub fn cor_covariance(p: &TailParams, tol: &Tolerance) -> Result<CovarianceBounds> {
    p.validate()?;
    let d = p.require_dim()? as f64;
    if p.alpha < 2.0 {
        return Err(Error::Precondition(format!(
            "the covariance corollary requires alpha >= 2, got {}",
            p.alpha
        )));
    }
    let z = z_threshold(&ZInput { big_u: p.big_u, sigma: p.sigma, alpha: p.alpha / 2.0 })?;
    let (mb_alpha, code) = if p.cov_half_alpha {
        (p.alpha / 2.0, "cov-min-exponent=alpha/2")
    } else {
        (p.alpha, "cov-min-exponent=alpha")
    };
    let denom = (2.0 * mb_alpha * z.powf(mb_alpha))
        .min(underline_log((p.big_k / (SQRT_2 * p.sigma)).powi(2) * p.x)?);
    let kz = p.big_k * z;
    let warnings = vec![code.to_string()];
    let budget = d * (-p.x).exp();
    let upper = BoundResult {
        deviation: 2.0 * p.sigma * kz * p.x.sqrt() + 4.0 * p.big_k * kz * p.x / denom,
        failure_budget: budget,
        regime: Regime::NotApplicable,
        formula: "cor-cov-upper".into(),
        warnings: warnings.clone(),
    };
    let exact = 2.0 * kz * kz * h_inv(p.sigma * p.sigma * p.x / (2.0 * kz * kz), tol)?;
    let lower_relaxed = 2.0 * p.sigma * kz * p.x.sqrt()
        + 2.0 * p.sigma * p.sigma * p.x / underline_log((p.sigma / kz).powi(2) * p.x)?;
    assert!(
        lower_relaxed >= exact * (1.0 - 1e-9),
        "covariance lower relaxation fell below the exact form"
    );
    let lower = BoundResult {
        deviation: exact,
        failure_budget: budget,
        regime: Regime::NotApplicable,
        formula: "cor-cov-lower".into(),
        warnings,
    };
    Ok(CovarianceBounds { upper, lower, lower_relaxed })
}

#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalBound {
    pub radius: f64,
    pub z_hat: f64,
    pub failure_budget: f64,
}

/// Empirical-Bernstein confidence radius around the sample mean:
/// sigma_hat sqrt(2x/n) + 15 K z_hat x / n, z_hat = (4 underline_log(K e /
/// sigma_hat))^(1/alpha), budget 3 d e^{-x}; stated for alpha >= 1 and
/// n >= 8x. A zero sample deviation makes z_hat (and the radius) infinite.
pub fn cor_empirical(
    sigma_hat: f64,
    big_k: f64,
    alpha: f64,
    x: f64,
    n: u64,
    d: usize,
) -> Result<EmpiricalBound> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!(
            "the empirical corollary is stated for alpha >= 1, got {alpha}"
        )));
    }
    if !(big_k > 0.0 && big_k.is_finite()) {
        return Err(Error::Precondition(format!("bigK must be finite and > 0, got {big_k}")));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Precondition(format!("x must be finite and > 0, got {x}")));
    }
    if !(sigma_hat >= 0.0 && sigma_hat.is_finite()) {
        return Err(Error::Precondition(format!("sigma_hat must be finite and >= 0, got {sigma_hat}")));
    }
    if d == 0 || n == 0 {
        return Err(Error::Precondition("d and n must be >= 1".into()));
    }
    if (n as f64) < 8.0 * x {
        return Err(Error::Precondition(format!(
            "the empirical corollary requires n >= 8x, got n = {n}, 8x = {}",
            8.0 * x
        )));
    }
    let z_hat = if sigma_hat > 0.0 {
        (4.0 * underline_log(big_k * E / sigma_hat)?).powf(1.0 / alpha)
    } else {
        f64::INFINITY
    };
    let nf = n as f64;
    let radius = sigma_hat * (2.0 * x / nf).sqrt() + 15.0 * big_k * z_hat * x / nf;
    Ok(EmpiricalBound { radius, z_hat, failure_budget: 3.0 * d as f64 * (-x).exp() })
}

#[derive(Debug, Clone)]
pub struct McdiarmidBounds {
    pub bennett: BoundResult,
    pub bernstein: BoundResult,
}

/// Bounded-differences (McDiarmid-type) bound for f(Y_1..Y_n) with
/// psi_alpha-dominated symmetrized increments; the (n+1)/n inflation
/// multiplies the variance term (both variants) and the Bernstein linear
/// term, but not the Bennett min-block numerator.
pub fn mcdiarmid_bound(p: &TailParams) -> Result<McdiarmidBounds> {
    p.validate()?;
    let n = p.require_n()?;
    if p.alpha < 1.0 {
        return Err(Error::Precondition(format!(
            "the bounded-differences bound is stated for alpha >= 1, got {}",
            p.alpha
        )));
    }
    let z = p.z()?;
    let fac = (n + 1.0) / n;
    let first = p.sigma * (2.0 * p.x * fac).sqrt();
    let denom = bennett_denominator(p.alpha, z, (p.big_k * z / (p.sigma * fac)).powi(2) * p.x)?;
    let budget = (-p.x).exp();
    let bennett = BoundResult {
        deviation: first + 4.0 * p.big_k * z * p.x / denom,
        failure_budget: budget,
        regime: Regime::NotApplicable,
        formula: "mcd-ben".into(),
        warnings: vec![],
    };
    let bernstein = BoundResult {
        deviation: first + 0.75 * p.big_k * z * p.x * fac,
        failure_budget: budget,
        regime: Regime::NotApplicable,
        formula: "mcd-ber".into(),
        warnings: vec![],
    };
    Ok(McdiarmidBounds { bennett, bernstein })
}

#[derive(Debug, Clone, Serialize)]
pub struct NormSumParams {
    pub big_k: f64,
    pub big_u: f64,
    pub sigma: f64,
    pub n: u64,
}

/// Norm-of-a-sum specialization f(y) = (1/2) || sum_i y_i ||: aggregates the
/// per-coordinate psi_alpha norms and second moments into McDiarmid inputs
/// K = max_i ||...||, U^2 = sum_i ||...||^2, sigma^2 = sum_i E ||Y_i||^2.
pub fn mcdiarmid_norm_sum(
    psi_norms: &[f64],
    mean_sq_norms: &[f64],
    alpha: f64,
    x: f64,
) -> Result<(McdiarmidBounds, NormSumParams)> {
    if psi_norms.is_empty() || psi_norms.len() != mean_sq_norms.len() {
        return Err(Error::Precondition(format!(
            "need equal nonempty norm/moment lists, got {} and {}",
            psi_norms.len(),
            mean_sq_norms.len()
        )));
    }
    for &v in psi_norms {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Precondition(format!("psi norms must be finite and >= 0, got {v}")));
        }
    }
    for &v in mean_sq_norms {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Precondition(format!("second moments must be finite and >= 0, got {v}")));
        }
    }
    let big_k = psi_norms.iter().cloned().fold(0.0, f64::max);
    let big_u = psi_norms.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sigma = mean_sq_norms.iter().sum::<f64>().sqrt();
    if big_k <= 0.0 || sigma <= 0.0 {
        return Err(Error::Precondition(
            "norm-sum aggregation needs a positive max norm and positive total variance".into(),
        ));
    }
    let n = psi_norms.len() as u64;
    let params = TailParams {
        n: Some(n),
        dim: Some(1),
        ..TailParams::new(alpha, sigma, big_u, big_k, x)
    };
    Ok((mcdiarmid_bound(&params)?, NormSumParams { big_k, big_u, sigma, n }))
}

/// Threshold tau(x) at which the two-sided psi_alpha tail integrates to at
/// most e^{-x}: tau = K (2x + 4 ln(2U/K) + (4/alpha) ln(4/(alpha e)))^(1/alpha).
pub fn tail_threshold_tau(big_k: f64, big_u: f64, alpha: f64, x: f64) -> Result<f64> {
    if !(big_k > 0.0 && big_u >= big_k && big_u.is_finite()) {
        return Err(Error::Precondition(format!(
            "need bigU >= bigK > 0, got bigU = {big_u}, bigK = {big_k}"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!("alpha must be finite and > 0, got {alpha}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Precondition(format!("x must be >= 0, got {x}")));
    }
    let base = 2.0 * x + 4.0 * (2.0 * big_u / big_k).ln() + (4.0 / alpha) * (4.0 / (alpha * E)).ln();
    Ok(big_k * base.powf(1.0 / alpha))
}

/// The tail mass bound at threshold tau >= K:
/// 2 (4/(alpha e))^(2/alpha) (U/tau)^2 e^{-(tau/K)^alpha / 2}.
pub fn tail_prob_bound(big_k: f64, big_u: f64, alpha: f64, tau: f64) -> Result<f64> {
    if !(big_k > 0.0 && big_u >= big_k && big_u.is_finite()) {
        return Err(Error::Precondition(format!(
            "need bigU >= bigK > 0, got bigU = {big_u}, bigK = {big_k}"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!("alpha must be finite and > 0, got {alpha}")));
    }
    if !(tau >= big_k) {
        return Err(Error::Precondition(format!(
            "the tail bound is valid for tau >= bigK, got tau = {tau}, bigK = {big_k}"
        )));
    }
    let prefactor = 2.0 * (4.0 / (alpha * E)).powf(2.0 / alpha) * (big_u / tau).powi(2);
    Ok(prefactor * (-(tau / big_k).powf(alpha) / 2.0).exp())
}

/// Evaluate a bound by its CLI token. Every token resolves to a single
/// `BoundResult` so tabular consumers (scan rows, bindings) share one schema;
/// pair-producing evaluators are split into -ben/-ber (or upper/lower) tokens.
///
/// `thm2` reads the spectral input from `p.dim`/`p.cov` (exactly one must be
/// set) and ignores `p.alpha`/`p.big_u`. `grid` only affects `thm1-monotone`.
pub fn eval_named(token: &str, p: &TailParams, grid: u32, tol: &Tolerance) -> Result<BoundResult> {
    match token {
        "thm1-ben" => thm1_bennett(p),
        "thm1-ber" => thm1_bernstein(p),
        "thm1-mixed" => thm1_mixed(p),
        "thm1-monotone" => thm1_monotone(p, grid),
        "thm2" => {
            let cov_or_r = match (&p.cov, p.dim) {
                (Some(c), None) => CovOrR::Cov(c),
                (None, Some(d)) => CovOrR::R(d as f64),
                _ => {
                    return Err(Error::Precondition(
                        "'thm2' needs exactly one of dim / cov".into(),
                    ))
                }
            };
            Ok(thm2_bounded(p.sigma * p.sigma, p.big_k, cov_or_r, p.x, tol)?.bound)
        }
        "thm3-ben" => Ok(thm3_unbounded(p)?.bennett),
        "thm3-ber" => Ok(thm3_unbounded(p)?.bernstein),
        "cor-iid" => cor_iid(p),
        "cor-scalar" => cor_scalar(p),
        "cor-cov" => Ok(cor_covariance(p, tol)?.upper),
        "cor-cov-lower" => Ok(cor_covariance(p, tol)?.lower),
        "mcd-ben" => Ok(mcdiarmid_bound(p)?.bennett),
        "mcd-ber" => Ok(mcdiarmid_bound(p)?.bernstein),
        other => Err(Error::Invalid(format!(
            "unknown theorem '{other}' (expected thm1-ben, thm1-ber, thm1-mixed, \
             thm1-monotone, thm2, thm3-ben, thm3-ber, cor-iid, cor-scalar, cor-cov, \
             cor-cov-lower, mcd-ben or mcd-ber)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Prior-work baselines
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Scalar Bernstein inequality.
    Bernstein,
    /// Scalar Bennett inequality.
    Bennett,
    /// Matrix Freedman (ambient-dimension Bennett for matrix martingales).
    Freedman,
    /// Matrix bound with the moment-style denominator sigma^2 + K t.
    MatrixMoment,
    /// Sub-Weibull matrix bound with an unspecified absolute constant and a
    /// (log n K^2/sigma^2)^(1/alpha) inflation.
    Koltchinskii,
    /// Intrinsic-dimension Bernstein with prefactor 50 tr min(1, (t/K) ExpCov/sigma^2),
    /// valid above t = (K + sqrt(K^2 + 36 sigma^2))/6.
    Minsker,
    /// Intrinsic-dimension subexponential bound with free constants c, C and
    /// validity threshold c1 max(K, sigma).
    KlochkovZhivotovskiy,
    /// Self-bounding/functional deviation bound 2e U sqrt(x) + 2e K x.
    MaurerFunction,
    /// Norm-of-sum variant 4e U sqrt(x) + 4e K x.
    MaurerNorm,
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bernstein" => BaselineKind::Bernstein,
            "bennett" => BaselineKind::Bennett,
            "freedman" => BaselineKind::Freedman,
            "matrix-moment" => BaselineKind::MatrixMoment,
            "koltchinskii" => BaselineKind::Koltchinskii,
            "minsker" => BaselineKind::Minsker,
            "klochkov-zhivotovskiy" => BaselineKind::KlochkovZhivotovskiy,
            "maurer-function" => BaselineKind::MaurerFunction,
            "maurer-norm" => BaselineKind::MaurerNorm,
            other => return Err(Error::Invalid(format!("unknown baseline kind '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct BaselineParams {
    pub sigma: Option<f64>,
    pub big_k: Option<f64>,
    pub big_u: Option<f64>,
    /// Deviation level for tail-probability baselines.
    pub t: Option<f64>,
    /// Exponent for deviation-form baselines.
    pub x: Option<f64>,
    pub dim: Option<usize>,
    pub n: Option<u64>,
    pub alpha: Option<f64>,
    /// The unspecified absolute constant (rate constant where several exist).
    pub free_constant: Option<f64>,
    /// Prefactor constant of the intrinsic-dimension subexponential baseline.
    pub free_prefactor: Option<f64>,
    /// Validity-threshold constant of the same baseline.
    pub free_validity: Option<f64>,
    /// Expected covariance-type matrix for the intrinsic/effective-rank baselines.
    pub mean_cov: Option<HermitianMatrix>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum BaselineOutput {
    /// P(deviation >= t) bound.
    Tail { probability: f64 },
    /// Deviation-at-confidence form, comparable to the module's own bounds.
    Deviation(BoundResult),
}

fn need(v: Option<f64>, what: &str, kind: &str) -> Result<f64> {
    let v = v.ok_or_else(|| Error::Invalid(format!("baseline '{kind}' requires {what}")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Invalid(format!("baseline '{kind}': {what} must be finite and > 0, got {v}")));
    }
    Ok(v)
}

fn need_t(params: &BaselineParams, kind: &str) -> Result<f64> {
    let t = params.t.ok_or_else(|| Error::Invalid(format!("baseline '{kind}' requires t")))?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Invalid(format!("baseline '{kind}': t must be finite and >= 0, got {t}")));
    }
    Ok(t)
}

pub fn baseline(kind: BaselineKind, params: &BaselineParams) -> Result<BaselineOutput> {
    match kind {
        BaselineKind::Bernstein => {
            let sigma = need(params.sigma, "sigma", "bernstein")?;
            let k = need(params.big_k, "bigK", "bernstein")?;
            let t = need_t(params, "bernstein")?;
            let p = (-t * t / (2.0 * (sigma * sigma + k * t / 3.0))).exp();
            Ok(BaselineOutput::Tail { probability: p })
        }
        BaselineKind::Bennett => {
            let sigma = need(params.sigma, "sigma", "bennett")?;
            let k = need(params.big_k, "bigK", "bennett")?;
            let t = need_t(params, "bennett")?;
            let s2 = sigma * sigma;
            let p = (-(s2 / (k * k)) * h(k * t / s2)?).exp();
            Ok(BaselineOutput::Tail { probability: p })
        }
        BaselineKind::Freedman => {
            let d = params
                .dim
                .ok_or_else(|| Error::Invalid("baseline 'freedman' requires dim".into()))?;
            let inner = baseline(BaselineKind::Bennett, params)?;
            match inner {
                BaselineOutput::Tail { probability } => {
                    Ok(BaselineOutput::Tail { probability: d as f64 * probability })
                }
                _ => unreachable!(),
            }
        }
        BaselineKind::MatrixMoment => {
            let sigma = need(params.sigma, "sigma", "matrix-moment")?;
            let k = need(params.big_k, "bigK", "matrix-moment")?;
            let t = need_t(params, "matrix-moment")?;
            let d = params
                .dim
                .ok_or_else(|| Error::Invalid("baseline 'matrix-moment' requires dim".into()))?;
            let p = d as f64 * (-t * t / (2.0 * (sigma * sigma + k * t))).exp();
            Ok(BaselineOutput::Tail { probability: p })
        }
        BaselineKind::Koltchinskii => {
            let sigma = need(params.sigma, "sigma", "koltchinskii")?;
            let k = need(params.big_k, "bigK", "koltchinskii")?;
            let t = need_t(params, "koltchinskii")?;
            let alpha = need(params.alpha, "alpha", "koltchinskii")?;
            let big_c = need(params.free_constant, "free_constant", "koltchinskii")?;
            let d = params
                .dim
                .ok_or_else(|| Error::Invalid("baseline 'koltchinskii' requires dim".into()))?;
            let n = params
                .n
                .ok_or_else(|| Error::Invalid("baseline 'koltchinskii' requires n".into()))?;
            let log_arg = n as f64 * k * k / (sigma * sigma);
            if log_arg <= 1.0 {
                return Err(Error::Range(format!(
                    "baseline 'koltchinskii' needs n K^2/sigma^2 > 1 so its log factor is positive, got {log_arg}"
                )));
            }
            let infl = log_arg.ln().powf(1.0 / alpha);
            let p = 2.0
                * d as f64
                * (-(1.0 / big_c) * t * t / (sigma * sigma + t * k * infl)).exp();
            Ok(BaselineOutput::Tail { probability: p })
        }
        BaselineKind::Minsker => {
            let sigma = need(params.sigma, "sigma", "minsker")?;
            let k = need(params.big_k, "bigK", "minsker")?;
            let t = need_t(params, "minsker")?;
            let m = params
                .mean_cov
                .as_ref()
                .ok_or_else(|| Error::Invalid("baseline 'minsker' requires mean_cov".into()))?;
            if !psd_leq(&HermitianMatrix::zeros(m.dim()), m, 1e-10 * (1.0 + m.max_abs_entry()))? {
                return Err(Error::Invalid("baseline 'minsker': mean_cov must be PSD".into()));
            }
            let threshold = (k + (k * k + 36.0 * sigma * sigma).sqrt()) / 6.0;
            if t < threshold {
                return Err(Error::Range(format!(
                    "baseline 'minsker' is valid for t >= {threshold}, got t = {t}"
                )));
            }
            let s2 = sigma * sigma;
            let scaled = m.scale(t / (k * s2));
            let capped = matrix_fn(&scaled, |l| l.min(1.0))?;
            let p = 50.0 * capped.trace() * (-0.5 * t * t / (s2 + t * k / 3.0)).exp();
            Ok(BaselineOutput::Tail { probability: p })
        }
        BaselineKind::KlochkovZhivotovskiy => {
            let sigma = need(params.sigma, "sigma", "klochkov-zhivotovskiy")?;
            let big_m = need(params.big_k, "bigK", "klochkov-zhivotovskiy")?;
            let t = need_t(params, "klochkov-zhivotovskiy")?;
            let c_rate = need(params.free_constant, "free_constant", "klochkov-zhivotovskiy")?;
            let c_pref = need(params.free_prefactor, "free_prefactor", "klochkov-zhivotovskiy")?;
            let c_valid = need(params.free_validity, "free_validity", "klochkov-zhivotovskiy")?;
            let m = params
                .mean_cov
                .as_ref()
                .ok_or_else(|| Error::Invalid("baseline 'klochkov-zhivotovskiy' requires mean_cov".into()))?;
            let r = intrinsic_dim(m)?;
            let floor = c_valid * big_m.max(sigma);
            if t <= floor {
                return Err(Error::Range(format!(
                    "baseline 'klochkov-zhivotovskiy' is valid for t > {floor}, got t = {t}"
                )));
            }
            let rate = (t * t / (sigma * sigma)).min(t / big_m);
            Ok(BaselineOutput::Tail { probability: c_pref * r * (-c_rate * rate).exp() })
        }
        BaselineKind::MaurerFunction | BaselineKind::MaurerNorm => {
            let name = if kind == BaselineKind::MaurerFunction { "maurer-function" } else { "maurer-norm" };
            let u = need(params.big_u, "bigU", name)?;
            let k = need(params.big_k, "bigK", name)?;
            let x = need(params.x, "x", name)?;
            let c = if kind == BaselineKind::MaurerFunction { 2.0 } else { 4.0 };
            Ok(BaselineOutput::Deviation(BoundResult {
                deviation: c * E * u * x.sqrt() + c * E * k * x,
                failure_budget: (-x).exp(),
                regime: Regime::NotApplicable,
                formula: name.into(),
                warnings: vec![],
            }))
        }
    }
}
