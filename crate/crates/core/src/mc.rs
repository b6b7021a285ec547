//! Monte Carlo validation harness: reproducible simulation of scalar and
//! matrix (super)martingale difference sequences with analytically declared
//! per-step parameters (sigma_i, U_i), estimation of the running-maximum
//! statistic max_k lambda_max(S_k), and empirical checks of every bound's
//! failure budget.
//!
//! Reproducibility contract: trial t draws only from `TrialRng::stream(seed, t)`,
//! trials are aggregated in index order, and reports carry no wall-clock
//! data, so report bytes are identical for any thread count.

use crate::bounds::{
    baseline, cor_empirical, cor_iid, mcdiarmid_norm_sum, thm1_bennett, thm1_bernstein,
    thm1_mixed, thm2_bounded, thm3_unbounded, BaselineKind, BaselineOutput, BoundResult, CovOrR,
    TailParams,
};
use crate::error::{Error, Result};
use crate::linalg::{lambda_max, op_norm, HermitianMatrix};
use crate::orlicz::{law_orlicz_norm, LawSpec};
use crate::rng::TrialRng;
use crate::scalar::{gamma, Tolerance};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::time::Instant;

/// Pilot trials for the bounded-differences experiment live in a disjoint
/// region of the stream index space so they never reuse evaluation streams.
const PILOT_STREAM_OFFSET: u64 = 1 << 40;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// X = scale (G + G*) / sqrt(2d), G with i.i.d. standard complex
    /// Gaussian entries; E[X^2] = scale^2 I exactly.
    GaussianWigner { d: usize, scale: f64 },
    /// X_i = eps_i A_{i mod m} for fixed Hermitian directions; the only
    /// a.s.-bounded generator (eligible for the bounded-increment bound).
    RademacherFixed { d: usize, directions: Vec<HermitianMatrix> },
    /// X = (xi - E xi) v v^T, xi ~ Weibull(scale, shape), fixed unit v.
    WeibullRankOne { d: usize, scale: f64, shape: f64 },
    /// Scalar X_i = s(F_{i-1}) g_i with past-dependent volatility s <= 1;
    /// `vol` is "constant" or "regime" (s = 1 while the running sum is
    /// nonnegative, else 1/2). The genuinely adapted, non-i.i.d. case.
    ScalarAdaptiveGaussian { vol: String },
    /// Scalar X = xi - E xi, xi ~ Weibull(scale, shape); shape < 1 exercises
    /// the heavy-tailed subunit-alpha path.
    ScalarWeibullCentered { scale: f64, shape: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub n: u64,
    pub declared_alpha: f64,
}

/// Analytic aggregates implied by a spec: everything the bound evaluators
/// need, derived once per experiment (never estimated from the draws).
#[derive(Debug, Clone)]
pub struct Declared {
    pub alpha: f64,
    /// sqrt(lambda_max) of the total predictable covariance proxy.
    pub sigma: f64,
    /// sqrt(sum_i U_i^2).
    pub big_u: f64,
    /// max_i U_i.
    pub big_k: f64,
    /// sup lambda_max(X_i) when the generator is a.s. bounded.
    pub k_inf: Option<f64>,
    /// Total predictable covariance proxy Sigma.
    pub cov: HermitianMatrix,
    pub dim: usize,
    /// Per-step sigma_1 and U_1 of i.i.d. generators.
    pub per_step_sigma: f64,
    pub per_step_k: f64,
    pub iid: bool,
}

/// psi_2 norm of the Euclidean norm of a standard Gaussian vector in R^m:
/// solve E exp(|g|^2/t^2) = (1 - 2/t^2)^{-m/2} = 2.
fn gaussian_norm_psi2(m: usize) -> f64 {
    (2.0 / (1.0 - 2.0f64.powf(-2.0 / m as f64))).sqrt()
}

fn point_mass_norm(c: f64, alpha: f64) -> f64 {
    c / LN_2.powf(1.0 / alpha)
}

fn weibull_moments(scale: f64, shape: f64) -> Result<(f64, f64)> {
    let mean = scale * gamma(1.0 + 1.0 / shape)?;
    let second = scale * scale * gamma(1.0 + 2.0 / shape)?;
    Ok((mean, second - mean * mean))
}

/// Declared psi_shape norm of a centered Weibull: scale 2^(1/shape) for the
/// variable itself plus the point-mass norm of the subtracted mean.
fn centered_weibull_norm(scale: f64, shape: f64, mean: f64) -> f64 {
    scale * 2.0f64.powf(1.0 / shape) + point_mass_norm(mean, shape)
}

fn check_declared_alpha(declared: f64, required: f64, kind: &str) -> Result<()> {
    if (declared - required).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "generator '{kind}' has psi-exponent {required}, config declared {declared}"
        )));
    }
    Ok(())
}

impl MartingaleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Precondition("n must be >= 1".into()));
        }
        if !(self.declared_alpha > 0.0 && self.declared_alpha.is_finite()) {
            return Err(Error::Precondition(format!(
                "declared_alpha must be finite and > 0, got {}",
                self.declared_alpha
            )));
        }
        match &self.kind {
            GeneratorKind::GaussianWigner { d, scale } => {
                if *d == 0 {
                    return Err(Error::Precondition("gaussian_wigner needs d >= 1".into()));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Precondition(format!("gaussian_wigner scale must be > 0, got {scale}")));
                }
                check_declared_alpha(self.declared_alpha, 2.0, "gaussian_wigner")?;
            }
            GeneratorKind::RademacherFixed { d, directions } => {
                if *d == 0 || directions.is_empty() {
                    return Err(Error::Precondition(
                        "rademacher_fixed needs d >= 1 and at least one direction".into(),
                    ));
                }
                for a in directions {
                    if a.dim() != *d {
                        return Err(Error::Precondition(format!(
                            "direction dimension {} does not match d = {d}",
                            a.dim()
                        )));
                    }
                }
                if directions.iter().all(|a| a.max_abs_entry() == 0.0) {
                    return Err(Error::Precondition("all rademacher directions are zero".into()));
                }
            }
            GeneratorKind::WeibullRankOne { d, scale, shape } => {
                if *d == 0 {
                    return Err(Error::Precondition("weibull_rank_one needs d >= 1".into()));
                }
                if !(*scale > 0.0 && scale.is_finite()) || !(*shape > 0.0 && shape.is_finite()) {
                    return Err(Error::Precondition(
                        "weibull_rank_one needs finite positive scale and shape".into(),
                    ));
                }
                check_declared_alpha(self.declared_alpha, *shape, "weibull_rank_one")?;
            }
            GeneratorKind::ScalarAdaptiveGaussian { vol } => {
                if vol != "constant" && vol != "regime" {
                    return Err(Error::Precondition(format!(
                        "unknown volatility id '{vol}' (expected 'constant' or 'regime')"
                    )));
                }
                check_declared_alpha(self.declared_alpha, 2.0, "scalar_adaptive_gaussian")?;
            }
            GeneratorKind::ScalarWeibullCentered { scale, shape } => {
                if !(*scale > 0.0 && scale.is_finite()) || !(*shape > 0.0 && shape.is_finite()) {
                    return Err(Error::Precondition(
                        "scalar_weibull_centered needs finite positive scale and shape".into(),
                    ));
                }
                check_declared_alpha(self.declared_alpha, *shape, "scalar_weibull_centered")?;
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            GeneratorKind::GaussianWigner { d, .. }
            | GeneratorKind::RademacherFixed { d, .. }
            | GeneratorKind::WeibullRankOne { d, .. } => *d,
            GeneratorKind::ScalarAdaptiveGaussian { .. }
            | GeneratorKind::ScalarWeibullCentered { .. } => 1,
        }
    }
}

pub fn declared(spec: &MartingaleSpec) -> Result<Declared> {
    spec.validate()?;
    let n = spec.n as f64;
    let alpha = spec.declared_alpha;
    match &spec.kind {
        GeneratorKind::GaussianWigner { d, scale } => {
            // lambda_max(X) <= ||X||_F = (scale/sqrt(d)) chi_{d^2}: the per-step
            // norm is the psi_2 norm of that folded Gaussian-vector norm
            let u1 = scale / (*d as f64).sqrt() * gaussian_norm_psi2(d * d);
            Ok(Declared {
                alpha,
                sigma: (n * scale * scale).sqrt(),
                big_u: n.sqrt() * u1,
                big_k: u1,
                k_inf: None,
                cov: HermitianMatrix::identity(*d).scale(n * scale * scale),
                dim: *d,
                per_step_sigma: *scale,
                per_step_k: u1,
                iid: true,
            })
        }
        GeneratorKind::RademacherFixed { d, directions } => {
            let m = directions.len();
            let mut cov = HermitianMatrix::zeros(*d);
            let mut u_sq_sum = 0.0;
            let mut big_k = 0.0f64;
            let mut k_inf = 0.0f64;
            for i in 0..spec.n as usize {
                let a = &directions[i % m];
                cov.add_scaled(&a.square(), 1.0)?;
                let op = op_norm(a)?;
                let u_i = point_mass_norm(op, alpha);
                u_sq_sum += u_i * u_i;
                big_k = big_k.max(u_i);
                k_inf = k_inf.max(op);
            }
            let sigma2 = lambda_max(&cov)?;
            if sigma2 <= 0.0 {
                return Err(Error::Precondition(
                    "rademacher_fixed covariance proxy is singular over the scheduled steps".into(),
                ));
            }
            let first_op = op_norm(&directions[0])?;
            Ok(Declared {
                alpha,
                sigma: sigma2.sqrt(),
                big_u: u_sq_sum.sqrt(),
                big_k,
                k_inf: Some(k_inf),
                cov,
                dim: *d,
                per_step_sigma: first_op,
                per_step_k: point_mass_norm(first_op, alpha),
                iid: m == 1,
            })
        }
        GeneratorKind::WeibullRankOne { d, scale, shape } => {
            let (mean, var) = weibull_moments(*scale, *shape)?;
            let u1 = centered_weibull_norm(*scale, *shape, mean);
            let v = vec![1.0 / (*d as f64).sqrt(); *d];
            Ok(Declared {
                alpha,
                sigma: (n * var).sqrt(),
                big_u: n.sqrt() * u1,
                big_k: u1,
                k_inf: None,
                cov: HermitianMatrix::rank_one(&v, n * var)?,
                dim: *d,
                per_step_sigma: var.sqrt(),
                per_step_k: u1,
                iid: true,
            })
        }
        GeneratorKind::ScalarAdaptiveGaussian { vol } => {
            // volatility cap 1 dominates both regimes predictably
            let u1 = gaussian_norm_psi2(1);
            Ok(Declared {
                alpha,
                sigma: n.sqrt(),
                big_u: n.sqrt() * u1,
                big_k: u1,
                k_inf: None,
                cov: HermitianMatrix::diag(&[n])?,
                dim: 1,
                per_step_sigma: 1.0,
                per_step_k: u1,
                iid: vol == "constant",
            })
        }
        GeneratorKind::ScalarWeibullCentered { scale, shape } => {
            let (mean, var) = weibull_moments(*scale, *shape)?;
            let u1 = centered_weibull_norm(*scale, *shape, mean);
            Ok(Declared {
                alpha,
                sigma: (n * var).sqrt(),
                big_u: n.sqrt() * u1,
                big_k: u1,
                k_inf: None,
                cov: HermitianMatrix::diag(&[n * var])?,
                dim: 1,
                per_step_sigma: var.sqrt(),
                per_step_k: u1,
                iid: true,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "thm1-ben")]
    Thm1Ben,
    #[serde(rename = "thm1-ber")]
    Thm1Ber,
    #[serde(rename = "thm1-mixed")]
    Thm1Mixed,
    #[serde(rename = "thm2")]
    Thm2,
    #[serde(rename = "thm3-ben")]
    Thm3Ben,
    #[serde(rename = "thm3-ber")]
    Thm3Ber,
    #[serde(rename = "cor-iid")]
    CorIid,
    #[serde(rename = "cor-scalar")]
    CorScalar,
}

impl BoundKind {
    pub fn token(self) -> &'static str {
        match self {
            BoundKind::Thm1Ben => "thm1-ben",
            BoundKind::Thm1Ber => "thm1-ber",
            BoundKind::Thm1Mixed => "thm1-mixed",
            BoundKind::Thm2 => "thm2",
            BoundKind::Thm3Ben => "thm3-ben",
            BoundKind::Thm3Ber => "thm3-ber",
            BoundKind::CorIid => "cor-iid",
            BoundKind::CorScalar => "cor-scalar",
        }
    }

    /// The i.i.d. corollary bounds the final mean, everything else the
    /// running maximum.
    pub fn uses_mean_statistic(self) -> bool {
        self == BoundKind::CorIid
    }
}

/// Maps a declared generator to the requested bound.
pub fn eval_bound(kind: BoundKind, decl: &Declared, x: f64, eps: f64) -> Result<BoundResult> {
    let ambient = || {
        let mut p = TailParams::new(decl.alpha, decl.sigma, decl.big_u, decl.big_k, x).with_dim(decl.dim);
        p.eps = eps;
        p
    };
    match kind {
        BoundKind::Thm1Ben => thm1_bennett(&ambient()),
        BoundKind::Thm1Ber => thm1_bernstein(&ambient()),
        BoundKind::Thm1Mixed => thm1_mixed(&ambient()),
        BoundKind::Thm2 => {
            let k_inf = decl.k_inf.ok_or_else(|| {
                Error::Precondition(
                    "the bounded-increment bound needs an a.s. bounded generator".into(),
                )
            })?;
            let out = thm2_bounded(
                decl.sigma * decl.sigma,
                k_inf,
                CovOrR::Cov(&decl.cov),
                x,
                &Tolerance::default(),
            )?;
            Ok(out.bound)
        }
        BoundKind::Thm3Ben | BoundKind::Thm3Ber => {
            let mut p = TailParams::new(decl.alpha, decl.sigma, decl.big_u, decl.big_k, x)
                .with_cov(decl.cov.clone());
            p.eps = eps;
            let out = thm3_unbounded(&p)?;
            Ok(if kind == BoundKind::Thm3Ben { out.bennett } else { out.bernstein })
        }
        BoundKind::CorIid => {
            if !decl.iid {
                return Err(Error::Precondition(
                    "the i.i.d. corollary needs an i.i.d. generator".into(),
                ));
            }
            let p = TailParams::new(decl.alpha, decl.per_step_sigma, decl.per_step_k, decl.per_step_k, x)
                .with_dim(decl.dim)
                .with_n(spec_n_from_cov(decl));
            cor_iid(&p)
        }
        BoundKind::CorScalar => {
            if decl.dim != 1 {
                return Err(Error::Precondition(
                    "the scalar corollary needs a one-dimensional generator".into(),
                ));
            }
            let mut out = thm1_bennett(&ambient())?;
            out.formula = "cor-scalar".into();
            Ok(out)
        }
    }
}

// Declared carries aggregates only; recover n from the i.i.d. structure
// sigma^2 = n sigma_1^2.
fn spec_n_from_cov(decl: &Declared) -> u64 {
    ((decl.sigma * decl.sigma) / (decl.per_step_sigma * decl.per_step_sigma)).round() as u64
}

// ---------------------------------------------------------------------------
// Sequence simulation
// ---------------------------------------------------------------------------

fn wigner_step(d: usize, scale: f64, rng: &mut TrialRng) -> HermitianMatrix {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut re = vec![0.0f64; d * d];
    let mut im = vec![0.0f64; d * d];
    for v in re.iter_mut() {
        *v = rng.gaussian() * half;
    }
    for v in im.iter_mut() {
        *v = rng.gaussian() * half;
    }
    let norm = scale / (2.0 * d as f64).sqrt();
    let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        for k in 0..d {
            entries[j * d + k] = Complex64::new(
                (re[j * d + k] + re[k * d + j]) * norm,
                (im[j * d + k] - im[k * d + j]) * norm,
            );
        }
    }
    HermitianMatrix::new(d, entries).expect("construction is Hermitian by symmetry")
}

/// One trial's statistic: max_k lambda_max(S_k), or lambda_max(S_n)/n when
/// `mean_stat` (the i.i.d.-mean reading).
fn run_trial(spec: &MartingaleSpec, mean_stat: bool, rng: &mut TrialRng) -> Result<f64> {
    let n = spec.n as usize;
    let d = spec.dim();
    // scalar fast path: every generator collapses to a real walk at d = 1
    if d == 1 {
        let mut sum = 0.0f64;
        let mut best = f64::NEG_INFINITY;
        match &spec.kind {
            GeneratorKind::GaussianWigner { scale, .. } => {
                let c = scale * 2.0f64.sqrt() * std::f64::consts::FRAC_1_SQRT_2;
                for _ in 0..n {
                    let g = rng.gaussian() * c;
                    rng.gaussian(); // unused imaginary draw keeps the stream layout uniform in d
                    sum += g;
                    best = best.max(sum);
                }
            }
            GeneratorKind::RademacherFixed { directions, .. } => {
                let vals: Vec<f64> = directions.iter().map(|a| a.get(0, 0).re).collect();
                for i in 0..n {
                    sum += rng.sign() * vals[i % vals.len()];
                    best = best.max(sum);
                }
            }
            GeneratorKind::WeibullRankOne { scale, shape, .. } => {
                let (mean, _) = weibull_moments(*scale, *shape)?;
                for _ in 0..n {
                    sum += rng.weibull(*scale, *shape) - mean;
                    best = best.max(sum);
                }
            }
            GeneratorKind::ScalarAdaptiveGaussian { vol } => {
                let regime = vol == "regime";
                for _ in 0..n {
                    let s = if regime && sum < 0.0 { 0.5 } else { 1.0 };
                    sum += s * rng.gaussian();
                    best = best.max(sum);
                }
            }
            GeneratorKind::ScalarWeibullCentered { scale, shape } => {
                let (mean, _) = weibull_moments(*scale, *shape)?;
                for _ in 0..n {
                    sum += rng.weibull(*scale, *shape) - mean;
                    best = best.max(sum);
                }
            }
        }
        return Ok(if mean_stat { sum / n as f64 } else { best });
    }

    let mut running = HermitianMatrix::zeros(d);
    let mut best = f64::NEG_INFINITY;
    match &spec.kind {
        GeneratorKind::GaussianWigner { d, scale } => {
            for _ in 0..n {
                let x = wigner_step(*d, *scale, rng);
                running.add_scaled(&x, 1.0)?;
                if !mean_stat {
                    best = best.max(lambda_max(&running)?);
                }
            }
        }
        GeneratorKind::RademacherFixed { directions, .. } => {
            let m = directions.len();
            for i in 0..n {
                running.add_scaled(&directions[i % m], rng.sign())?;
                if !mean_stat {
                    best = best.max(lambda_max(&running)?);
                }
            }
        }
        GeneratorKind::WeibullRankOne { d, scale, shape } => {
            let (mean, _) = weibull_moments(*scale, *shape)?;
            let v = vec![1.0 / (*d as f64).sqrt(); *d];
            let base = HermitianMatrix::rank_one(&v, 1.0)?;
            for _ in 0..n {
                running.add_scaled(&base, rng.weibull(*scale, *shape) - mean)?;
                if !mean_stat {
                    best = best.max(lambda_max(&running)?);
                }
            }
        }
        GeneratorKind::ScalarAdaptiveGaussian { .. } | GeneratorKind::ScalarWeibullCentered { .. } => {
            unreachable!("scalar kinds always take the d = 1 path")
        }
    }
    Ok(if mean_stat { lambda_max(&running)? / n as f64 } else { best })
}

/// Simulates `trials` independent trials and returns the per-trial statistics
/// in trial order. Bit-identical for any `threads` value.
pub fn simulate_statistics(
    spec: &MartingaleSpec,
    mean_stat: bool,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if trials == 0 {
        return Err(Error::Precondition("trials must be >= 1".into()));
    }
    if threads <= 1 {
        (0..trials)
            .map(|t| run_trial(spec, mean_stat, &mut TrialRng::stream(seed, t)))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..trials)
                .into_par_iter()
                .map(|t| run_trial(spec, mean_stat, &mut TrialRng::stream(seed, t)))
                .collect()
        })
    }
}

// ---------------------------------------------------------------------------
// Experiment driver and report
// ---------------------------------------------------------------------------

fn default_eps() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub spec: MartingaleSpec,
    pub trials: u64,
    pub x: f64,
    pub bound_kind: BoundKind,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Quantiles {
    #[serde(rename = "0.5")]
    pub q50: f64,
    #[serde(rename = "0.9")]
    pub q90: f64,
    #[serde(rename = "0.95")]
    pub q95: f64,
    #[serde(rename = "0.99")]
    pub q99: f64,
    #[serde(rename = "1-budget")]
    pub q_budget: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxDevSummary {
    pub count: u64,
    pub quantiles: Quantiles,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExceedanceSummary {
    pub count: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub bound_kind: String,
    /// Infinite when the failure budget is >= 1 (vacuous claim); JSON null.
    pub bound_value: f64,
    pub failure_budget: f64,
    pub max_dev_samples: MaxDevSummary,
    pub empirical_exceedance: ExceedanceSummary,
    pub pass: bool,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(count: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = count as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * ((p * (1.0 - p) + z2 / (4.0 * n)) / n).sqrt() / denom;
    // the endpoints are exact at the boundary counts; don't let roundoff
    // in center - half leak a spurious positive lower limit
    let lo = if count == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if count == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

fn quantile_of_sorted(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    let level = level.clamp(0.0, 1.0);
    let idx = ((level * n as f64).ceil() as usize).clamp(1, n);
    sorted[idx - 1]
}

pub fn run_experiment(cfg: &SimulationConfig) -> Result<SimulationReport> {
    if !(cfg.x > 0.0 && cfg.x.is_finite()) {
        return Err(Error::Precondition(format!("x must be finite and > 0, got {}", cfg.x)));
    }
    let seed = cfg
        .seed
        .ok_or_else(|| Error::Precondition("no seed: set it in the config, via --seed, or MTB_SEED".into()))?;
    let threads = cfg.threads.unwrap_or(1);
    if threads == 0 {
        return Err(Error::Precondition("threads must be >= 1".into()));
    }
    let start = Instant::now();
    let decl = declared(&cfg.spec)?;
    let bound = eval_bound(cfg.bound_kind, &decl, cfg.x, cfg.eps)?;
    let budget = bound.failure_budget;
    // budget >= 1 makes the claim vacuous: report an infinite bound rather
    // than pretending the finite deviation value was validated
    let bound_value = if budget >= 1.0 { f64::INFINITY } else { bound.deviation };
    let stats = simulate_statistics(
        &cfg.spec,
        cfg.bound_kind.uses_mean_statistic(),
        cfg.trials,
        seed,
        threads,
    )?;
    let mut sorted = stats.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = Quantiles {
        q50: quantile_of_sorted(&sorted, 0.5),
        q90: quantile_of_sorted(&sorted, 0.9),
        q95: quantile_of_sorted(&sorted, 0.95),
        q99: quantile_of_sorted(&sorted, 0.99),
        q_budget: quantile_of_sorted(&sorted, 1.0 - budget),
    };
    let count = stats.iter().filter(|s| **s >= bound_value).count() as u64;
    let (lo, hi) = wilson_interval(count, cfg.trials);
    let pass = count == 0 || hi <= budget;
    Ok(SimulationReport {
        bound_kind: cfg.bound_kind.token().to_string(),
        bound_value,
        failure_budget: budget,
        max_dev_samples: MaxDevSummary { count: cfg.trials, quantiles },
        empirical_exceedance: ExceedanceSummary {
            count,
            rate: count as f64 / cfg.trials as f64,
            wilson_low: lo,
            wilson_high: hi,
        },
        pass,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// Empirical-Bernstein coverage experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub trials: u64,
    pub miss_count: u64,
    pub coverage: f64,
    pub failure_budget: f64,
    pub median_radius: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub pass: bool,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

/// Draws n i.i.d. steps per trial, forms the fully data-driven confidence
/// ball (sample deviation proxy + declared per-step norm), and checks it
/// covers the true mean (zero for every built-in generator).
pub fn empirical_coverage(
    spec: &MartingaleSpec,
    x: f64,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<CoverageReport> {
    let start = Instant::now();
    let decl = declared(spec)?;
    if !decl.iid {
        return Err(Error::Precondition(
            "the empirical-Bernstein experiment needs an i.i.d. generator".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::Precondition("trials must be >= 1".into()));
    }
    let budget = 3.0 * spec.dim() as f64 * (-x).exp();
    let spec = spec.clone();
    let per_trial = move |rng: &mut TrialRng| -> Result<(bool, f64)> {
        let n = spec.n as usize;
        let d = spec.dim();
        let steps: Vec<HermitianMatrix> = match &spec.kind {
            GeneratorKind::GaussianWigner { d, scale } => {
                (0..n).map(|_| wigner_step(*d, *scale, rng)).collect()
            }
            GeneratorKind::RademacherFixed { directions, .. } => (0..n)
                .map(|i| directions[i % directions.len()].scale(rng.sign()))
                .collect(),
            GeneratorKind::WeibullRankOne { d, scale, shape } => {
                let (mean, _) = weibull_moments(*scale, *shape)?;
                let v = vec![1.0 / (*d as f64).sqrt(); *d];
                let base = HermitianMatrix::rank_one(&v, 1.0)?;
                (0..n)
                    .map(|_| base.scale(rng.weibull(*scale, *shape) - mean))
                    .collect()
            }
            GeneratorKind::ScalarAdaptiveGaussian { .. } => {
                (0..n).map(|_| HermitianMatrix::diag(&[rng.gaussian()]).unwrap()).collect()
            }
            GeneratorKind::ScalarWeibullCentered { scale, shape } => {
                let (mean, _) = weibull_moments(*scale, *shape)?;
                (0..n)
                    .map(|_| HermitianMatrix::diag(&[rng.weibull(*scale, *shape) - mean]).unwrap())
                    .collect()
            }
        };
        let mut mean = HermitianMatrix::zeros(d);
        for s in &steps {
            mean.add_scaled(s, 1.0 / n as f64)?;
        }
        let mut second = HermitianMatrix::zeros(d);
        for s in &steps {
            let centered = s.sub(&mean)?;
            second.add_scaled(&centered.square(), 1.0 / n as f64)?;
        }
        let sigma_hat = lambda_max(&second)?.max(0.0).sqrt();
        let eb = cor_empirical(sigma_hat, decl.per_step_k, decl.alpha, x, spec.n, d)?;
        let covered = op_norm(&mean)? <= eb.radius;
        Ok((covered, eb.radius))
    };
    let outcomes: Vec<(bool, f64)> = if threads <= 1 {
        (0..trials)
            .map(|t| per_trial(&mut TrialRng::stream(seed, t)))
            .collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..trials)
                .into_par_iter()
                .map(|t| per_trial(&mut TrialRng::stream(seed, t)))
                .collect::<Result<_>>()
        })?
    };
    let miss_count = outcomes.iter().filter(|(covered, _)| !covered).count() as u64;
    let mut radii: Vec<f64> = outcomes.iter().map(|(_, r)| *r).collect();
    radii.sort_by(f64::total_cmp);
    let (lo, hi) = wilson_interval(miss_count, trials);
    Ok(CoverageReport {
        trials,
        miss_count,
        coverage: 1.0 - miss_count as f64 / trials as f64,
        failure_budget: budget,
        median_radius: quantile_of_sorted(&radii, 0.5),
        wilson_low: lo,
        wilson_high: hi,
        pass: miss_count == 0 || hi <= budget,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// Bounded-differences (McDiarmid) experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McdiarmidConfig {
    /// Ambient dimension of the summed vectors.
    pub m: usize,
    pub n: u64,
    /// Law of the vector radius; directions are uniform on the sphere.
    pub radius_law: LawSpec,
    pub alpha: f64,
    pub x: f64,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_pilot")]
    pub pilot_trials: u64,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_pilot() -> u64 {
    100_000
}

#[derive(Debug, Clone, Serialize)]
pub struct McdiarmidReport {
    pub bennett_deviation: f64,
    pub bernstein_deviation: f64,
    pub bound_value: f64,
    pub maurer_norm_deviation: f64,
    pub failure_budget: f64,
    pub pilot_mean: f64,
    pub pilot_se: f64,
    pub trials: u64,
    pub exceed_count: u64,
    pub empirical_exceedance: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub pass: bool,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

fn sample_law(law: &LawSpec, rng: &mut TrialRng) -> f64 {
    match law {
        LawSpec::PointMass { c } => *c,
        LawSpec::Weibull { scale, shape } => rng.weibull(*scale, *shape),
        LawSpec::FoldedGaussian { scale } => (rng.gaussian() * scale).abs(),
        LawSpec::BoundedUniform { b } => rng.uniform() * b,
    }
}

/// Validates the bounded-differences bound on f(Y_1..Y_n) = ||sum Y_i||/2
/// for Y_i = R_i * (uniform direction), R_i ~ radius_law. The unknown E f is
/// replaced by a pilot estimate on a disjoint stream region; a trial counts
/// as exceeding only if it clears the bound minus three pilot standard
/// errors, so pilot noise cannot hide true exceedances.
pub fn mcdiarmid_experiment(cfg: &McdiarmidConfig) -> Result<McdiarmidReport> {
    let start = Instant::now();
    if cfg.m == 0 || cfg.n == 0 || cfg.trials == 0 || cfg.pilot_trials < 2 {
        return Err(Error::Precondition(
            "need m >= 1, n >= 1, trials >= 1, pilot_trials >= 2".into(),
        ));
    }
    cfg.radius_law.validate()?;
    let tol = Tolerance::default();
    let k = law_orlicz_norm(&cfg.radius_law, cfg.alpha, &tol)?;
    let er2 = cfg.radius_law.second_moment()?;
    let psi_norms = vec![k; cfg.n as usize];
    let mean_sqs = vec![er2; cfg.n as usize];
    let (bounds, agg) = mcdiarmid_norm_sum(&psi_norms, &mean_sqs, cfg.alpha, cfg.x)?;
    let bound_value = bounds.bennett.deviation.min(bounds.bernstein.deviation);
    let maurer = match baseline(
        BaselineKind::MaurerNorm,
        &crate::bounds::BaselineParams {
            big_u: Some(agg.big_u),
            big_k: Some(agg.big_k),
            x: Some(cfg.x),
            ..Default::default()
        },
    )? {
        BaselineOutput::Deviation(b) => b.deviation,
        _ => unreachable!(),
    };
    let m = cfg.m;
    let n = cfg.n as usize;
    let law = cfg.radius_law.clone();
    let f_stat = move |rng: &mut TrialRng| -> f64 {
        let mut total = vec![0.0f64; m];
        for _ in 0..n {
            let r = sample_law(&law, rng);
            let u = rng.unit_vector(m);
            for (t, ui) in total.iter_mut().zip(&u) {
                *t += r * ui;
            }
        }
        0.5 * total.iter().map(|v| v * v).sum::<f64>().sqrt()
    };
    let threads = cfg.threads.unwrap_or(1);
    let run_range = |offset: u64, count: u64| -> Result<Vec<f64>> {
        if threads <= 1 {
            Ok((0..count)
                .map(|t| f_stat(&mut TrialRng::stream(cfg.seed, offset + t)))
                .collect())
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(|| {
                (0..count)
                    .into_par_iter()
                    .map(|t| f_stat(&mut TrialRng::stream(cfg.seed, offset + t)))
                    .collect()
            }))
        }
    };
    let pilot = run_range(PILOT_STREAM_OFFSET, cfg.pilot_trials)?;
    let pn = pilot.len() as f64;
    let pilot_mean = pilot.iter().sum::<f64>() / pn;
    let pilot_var = pilot.iter().map(|v| (v - pilot_mean).powi(2)).sum::<f64>() / (pn - 1.0);
    let pilot_se = (pilot_var / pn).sqrt();
    let samples = run_range(0, cfg.trials)?;
    let threshold = bound_value - 3.0 * pilot_se;
    let exceed_count = samples.iter().filter(|f| **f - pilot_mean >= threshold).count() as u64;
    let (lo, hi) = wilson_interval(exceed_count, cfg.trials);
    let budget = bounds.bennett.failure_budget;
    Ok(McdiarmidReport {
        bennett_deviation: bounds.bennett.deviation,
        bernstein_deviation: bounds.bernstein.deviation,
        bound_value,
        maurer_norm_deviation: maurer,
        failure_budget: budget,
        pilot_mean,
        pilot_se,
        trials: cfg.trials,
        exceed_count,
        empirical_exceedance: exceed_count as f64 / cfg.trials as f64,
        wilson_low: lo,
        wilson_high: hi,
        pass: exceed_count == 0 || hi <= budget,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}
