//! Built-in verification suites exposed through the CLI: fast, deterministic
//! re-checks of the library's load-bearing identities on canonical grids.
//! These are smoke tests for installed binaries, not a replacement for the
//! full test suite.

use crate::bounds::{
    cor_covariance, cor_empirical, cor_iid, mcdiarmid_bound, regime_classify, tail_prob_bound,
    tail_threshold_tau, thm1_bernstein, thm1_mixed, thm2_bounded, CovOrR, Regime, TailParams,
};
use crate::linalg::{eig, intrinsic_dim, HermitianMatrix};
use crate::mc::{run_experiment, BoundKind, GeneratorKind, MartingaleSpec, SimulationConfig};
use crate::orlicz::{law_orlicz_norm, LawSpec, SampleSet};
use crate::scalar::{h, h_inv, phi, upsilon, z_threshold, Tolerance, ZInput};
use serde::Serialize;
use std::f64::consts::E;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check { name: name.to_string(), pass, detail }
}

pub fn suite_names() -> &'static [&'static str] {
    &["scalar", "linalg", "orlicz", "bounds", "montecarlo"]
}

pub fn run_suite(name: &str) -> Option<Vec<Check>> {
    match name {
        "scalar" => Some(scalar_suite()),
        "linalg" => Some(linalg_suite()),
        "orlicz" => Some(orlicz_suite()),
        "bounds" => Some(bounds_suite()),
        "montecarlo" => Some(montecarlo_suite()),
        _ => None,
    }
}

fn scalar_suite() -> Vec<Check> {
    let tol = Tolerance::default();
    let mut out = Vec::new();
    let p1 = phi(1.0);
    out.push(check("phi(1) = e - 2", (p1 - (E - 2.0)).abs() <= 1e-14, format!("{p1}")));
    let mut worst = 0.0f64;
    let mut u = 1e-8;
    while u <= 1e8 {
        let t = h_inv(u, &tol).unwrap();
        let back = h(t).unwrap();
        worst = worst.max((back - u).abs() / (1.0 + u));
        u *= 10.0;
    }
    out.push(check("h_inv roundtrip on log grid", worst <= 1e-10, format!("worst rel err {worst:.3e}")));
    let mut z_ok = true;
    let mut z_detail = String::new();
    for &alpha in &[0.25f64, 0.5, 1.0, 2.0, 4.0] {
        for &ratio in &[1.0f64, 10.0, 1e4] {
            let z = z_threshold(&ZInput { big_u: ratio, sigma: 1.0, alpha }).unwrap();
            let v = alpha * z.powf(alpha);
            if v < 4.0 * (1.0 - 1e-12) {
                z_ok = false;
                z_detail = format!("alpha z^alpha = {v} at alpha={alpha}, U={ratio}");
            }
        }
    }
    out.push(check("alpha z^alpha >= 4 on grid", z_ok, z_detail));
    let u0 = upsilon(0.0);
    let far = upsilon(-1e9);
    out.push(check(
        "upsilon range (2, 3]",
        (u0 - 3.0).abs() <= 1e-12 && far > 2.0 && far < 2.0001,
        format!("upsilon(0)={u0}, upsilon(-1e9)={far}"),
    ));
    out
}

fn linalg_suite() -> Vec<Check> {
    let mut out = Vec::new();
    let pauli_y = HermitianMatrix::from_rows(
        &[vec![0.0, 0.0], vec![0.0, 0.0]],
        Some(&[vec![0.0, -1.0], vec![1.0, 0.0]]),
    )
    .unwrap();
    let s = eig(&pauli_y).unwrap();
    let ok = (s.eigenvalues[0] + 1.0).abs() <= 1e-12 && (s.eigenvalues[1] - 1.0).abs() <= 1e-12;
    out.push(check("complex rotation eigenvalues are ±1", ok, format!("{:?}", s.eigenvalues)));
    // reproducible pseudo-random 6x6 via the library stream
    let mut rng = crate::rng::TrialRng::stream(99, 0);
    let d = 6;
    let mut entries = vec![num_complex::Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        for k in j..d {
            let re = rng.gaussian();
            let im = if j == k { 0.0 } else { rng.gaussian() };
            entries[j * d + k] = num_complex::Complex64::new(re, im);
            entries[k * d + j] = num_complex::Complex64::new(re, -im);
        }
    }
    let a = HermitianMatrix::new(d, entries).unwrap();
    let spec = eig(&a).unwrap();
    let mut resid = 0.0f64;
    for (j, &lam) in spec.eigenvalues.iter().enumerate() {
        let v = spec.vector(j);
        let mut err = 0.0;
        for r in 0..d {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for c in 0..d {
                acc += a.get(r, c) * v[c];
            }
            err += (acc - v[r] * lam).norm_sqr();
        }
        resid = resid.max(err.sqrt());
    }
    let budget = 1e-9 * (1.0 + a.frobenius());
    out.push(check("eigen residual on 6x6", resid <= budget, format!("residual {resid:.3e} vs {budget:.3e}")));
    let trace_match = (spec.eigenvalues.iter().sum::<f64>() - a.trace()).abs() <= 1e-9 * (1.0 + a.trace().abs());
    out.push(check("eigenvalue sum equals trace", trace_match, String::new()));
    let r = intrinsic_dim(&HermitianMatrix::identity(4)).unwrap();
    out.push(check("intrinsic dim of I_4", (r - 4.0).abs() <= 1e-12, format!("{r}")));
    out
}

fn orlicz_suite() -> Vec<Check> {
    let tol = Tolerance::default();
    let mut out = Vec::new();
    let pm = law_orlicz_norm(&LawSpec::PointMass { c: 1.0 }, 1.0, &tol).unwrap();
    out.push(check(
        "point mass norm 1/ln 2",
        (pm - 1.0 / std::f64::consts::LN_2).abs() <= 1e-8,
        format!("{pm}"),
    ));
    let w = law_orlicz_norm(&LawSpec::Weibull { scale: 1.5, shape: 1.0 }, 1.0, &tol).unwrap();
    out.push(check("exponential law norm 2 scale", (w - 3.0).abs() <= 1e-6, format!("{w}")));
    let fg = law_orlicz_norm(&LawSpec::FoldedGaussian { scale: 1.0 }, 2.0, &tol).unwrap();
    let want = (8.0f64 / 3.0).sqrt();
    out.push(check("folded Gaussian psi_2 norm sqrt(8/3)", (fg - want).abs() <= 1e-6, format!("{fg}")));
    let samples = SampleSet::new(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
    let e = crate::orlicz::empirical_orlicz_norm(&samples, 1.0, &tol).unwrap();
    out.push(check(
        "constant sample norm 1/ln 2",
        (e - 1.0 / std::f64::consts::LN_2).abs() <= 1e-8,
        format!("{e}"),
    ));
    out
}

fn bounds_suite() -> Vec<Check> {
    let tol = Tolerance::default();
    let mut out = Vec::new();
    let ber = thm1_bernstein(&TailParams::new(1.0, 1.0, 1.0, 1.0, 1.0).with_dim(1)).unwrap();
    out.push(check(
        "master Bernstein worked example",
        (ber.deviation - (std::f64::consts::SQRT_2 + 3.0)).abs() <= 1e-12,
        format!("{}", ber.deviation),
    ));
    let t2 = thm2_bounded(1.0, 1.0, CovOrR::R(1.0), 1.0, &tol).unwrap();
    out.push(check(
        "bounded-increment worked example",
        (t2.bound.deviation - (E - 1.0)).abs() <= 1e-10 && (t2.bound.failure_budget - 1.0).abs() <= 1e-12,
        format!("dev {}, budget {}", t2.bound.deviation, t2.bound.failure_budget),
    ));
    let cov = cor_covariance(&TailParams::new(2.0, 1.0, 1.0, 1.0, 1.0).with_dim(2), &tol).unwrap();
    out.push(check(
        "covariance corollary worked example",
        (cov.upper.deviation - 24.0).abs() <= 1e-12,
        format!("{}", cov.upper.deviation),
    ));
    let iid = cor_iid(&TailParams::new(1.0, 1.0, 1.0, 1.0, 1.0).with_dim(1).with_n(100)).unwrap();
    out.push(check(
        "i.i.d. corollary worked example",
        (iid.deviation - ((0.02f64).sqrt() + 0.16)).abs() <= 1e-12,
        format!("{}", iid.deviation),
    ));
    let eb = cor_empirical(1.0, 1.0, 1.0, 1.0, 100, 1).unwrap();
    out.push(check(
        "empirical radius worked example",
        (eb.radius - ((0.02f64).sqrt() + 0.6)).abs() <= 1e-12,
        format!("{}", eb.radius),
    ));
    let mcd = mcdiarmid_bound(&TailParams::new(1.0, 1.0, 1.0, 1.0, 1.0).with_dim(1).with_n(1)).unwrap();
    out.push(check(
        "bounded-differences worked example",
        (mcd.bernstein.deviation - 8.0).abs() <= 1e-12,
        format!("{}", mcd.bernstein.deviation),
    ));
    let mut tau_ok = true;
    let mut tau_detail = String::new();
    for &alpha in &[0.5f64, 1.0, 2.0] {
        for &x in &[0.0f64, 1.0, 5.0] {
            let tau = tail_threshold_tau(1.0, 2.0, alpha, x).unwrap();
            let p = tail_prob_bound(1.0, 2.0, alpha, tau).unwrap();
            if p > (-x).exp() * (1.0 + 1e-12) {
                tau_ok = false;
                tau_detail = format!("alpha={alpha} x={x}: {p}");
            }
        }
    }
    out.push(check("tail threshold composes to e^-x", tau_ok, tau_detail));
    let (reg, _) = regime_classify(&TailParams::new(1.0, 1.0, 1.0, 1.0, 1.0 / 16.0).with_dim(1)).unwrap();
    let (reg2, _) = regime_classify(&TailParams::new(1.0, 1.0, 1.0, 1.0, 1.0).with_dim(1)).unwrap();
    out.push(check(
        "regime boundary at r = 1",
        reg == Regime::SubGaussian && reg2 == Regime::SubPoisson,
        format!("{reg:?} then {reg2:?}"),
    ));
    let mixed = thm1_mixed(&TailParams::new(2.0, 1.0, 1.0, 1.0, 1.0).with_dim(2)).unwrap();
    out.push(check("mixed bound is finite and positive", mixed.deviation > 0.0, format!("{}", mixed.deviation)));
    out
}

fn montecarlo_suite() -> Vec<Check> {
    let mut out = Vec::new();
    let cfg = SimulationConfig {
        spec: MartingaleSpec {
            kind: GeneratorKind::RademacherFixed {
                d: 1,
                directions: vec![HermitianMatrix::diag(&[1.0]).unwrap()],
            },
            n: 100,
            declared_alpha: 1.0,
        },
        trials: 2000,
        x: 3.0,
        bound_kind: BoundKind::Thm1Mixed,
        eps: 1.0,
        seed: Some(42),
        threads: Some(1),
    };
    match run_experiment(&cfg) {
        Ok(report) => {
            out.push(check(
                "random-walk soundness run passes",
                report.pass,
                format!("exceedance {} vs budget {}", report.empirical_exceedance.rate, report.failure_budget),
            ));
            let again = run_experiment(&cfg).unwrap();
            let same = serde_json::to_string(&report).unwrap() == serde_json::to_string(&again).unwrap();
            out.push(check("report bytes reproduce", same, String::new()));
        }
        Err(e) => out.push(check("random-walk soundness run passes", false, format!("{e}"))),
    }
    let (lo, hi) = crate::mc::wilson_interval(0, 100);
    let z2 = 1.959_963_984_540_054f64.powi(2);
    out.push(check(
        "Wilson interval closed form at zero count",
        lo == 0.0 && (hi - z2 / (100.0 + z2)).abs() <= 1e-12,
        format!("({lo}, {hi})"),
    ));
    out
}
