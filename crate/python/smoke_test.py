#!/usr/bin/env python3
"""Smoke test for the mtb_py extension module.

Build the extension first, then run this script from anywhere:

    cargo build --release -p mtb-py
    python3 python/smoke_test.py

The script copies target/{release,debug}/libmtb_py.so into a temp dir under
the importable name mtb_py.so, imports it, and exercises one call from each
binding family against hand-checked values.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [ROOT / "target" / p / "libmtb_py.so" for p in ("release", "debug")]
    src = next((c for c in candidates if c.exists()), None)
    if src is None:
        sys.exit("libmtb_py.so not found; run `cargo build --release -p mtb-py` first")
    tmp = tempfile.mkdtemp(prefix="mtb_py_")
    shutil.copy2(src, Path(tmp) / "mtb_py.so")
    sys.path.insert(0, tmp)
    import mtb_py

    return mtb_py


def close(a, b, rel=1e-12):
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def main():
    m = load_module()
    n_checks = 0

    def ok(name, cond):
        nonlocal n_checks
        assert cond, f"FAIL: {name}"
        n_checks += 1
        print(f"ok - {name}")

    # Scalar special functions.
    ok("phi(1) = e - 2", close(m.phi(1.0), math.e - 2.0))
    ok("h_inv inverts h", close(m.h_inv(m.h(2.5)), 2.5, rel=1e-10))
    ok("upsilon(0) = 3", m.upsilon(0.0) == 3.0)
    ok("underline_log clamps to 1", m.underline_log(1.0) == 1.0)
    # alpha = 1, U = sigma: z = (4 * underline_log(e))^1 = 4.
    ok("z_threshold(1,1,1) = 4", close(m.z_threshold(1.0, 1.0, 1.0), 4.0))
    for alpha, ratio in [(0.5, 1.0), (1.0, 10.0), (2.0, 1000.0)]:
        z = m.z_threshold(ratio, 1.0, alpha)
        ok(f"alpha*z^alpha >= 4 at alpha={alpha}, U/sigma={ratio}", alpha * z**alpha >= 4.0 - 1e-12)

    # Orlicz norms. Exp(1) has psi_1 norm exactly 2; a point mass c has
    # psi_1 norm c / ln 2.
    ok(
        "law norm: Weibull(1,1) psi_1 = 2",
        close(m.law_orlicz_norm('{"law":"weibull","scale":1.0,"shape":1.0}', 1.0), 2.0, rel=1e-9),
    )
    ok(
        "empirical norm: point mass 1.5 psi_1 = 1.5/ln2",
        close(m.empirical_orlicz_norm([1.5, 1.5, 1.5, 1.5], 1.0), 1.5 / math.log(2.0), rel=1e-9),
    )

    # Hermitian matrices: Pauli sigma_x and sigma_y both have spectrum {-1, 1}.
    sx = m.HermitianMatrix([[0.0, 1.0], [1.0, 0.0]])
    ok("sigma_x eigenvalues", sx.eigenvalues() == [-1.0, 1.0] or close(sx.lambda_max(), 1.0))
    sy = m.HermitianMatrix([[0.0, 0.0], [0.0, 0.0]], [[0.0, -1.0], [1.0, 0.0]])
    evs = sy.eigenvalues()
    ok("sigma_y eigenvalues", close(evs[0], -1.0, rel=1e-12) and close(evs[1], 1.0, rel=1e-12))
    back = m.HermitianMatrix.from_json(sy.to_json())
    ok("matrix JSON round trip", back.eigenvalues() == evs and back.dim() == 2)
    ok("diag lambda_min", m.HermitianMatrix.diag([3.0, -0.5, 1.0]).lambda_min() == -0.5)

    # Named bound evaluators: the documented thm1-ber point is
    # sigma*sqrt(2x) + (3/4)*K*z*x = sqrt(2) + 3 at alpha=1, all scales 1, x=1.
    r = json.loads(m.bound("thm1-ber", 1.0, 1.0, 1.0, alpha=1.0, big_u=1.0, d=1))
    ok("thm1-ber documented point", close(r["deviation"], math.sqrt(2.0) + 3.0))
    ok("thm1-ber budget d*e^-x", close(r["failure_budget"], math.exp(-1.0)))
    r2 = json.loads(m.bound("thm2", 1.0, 0.5, 0.25, cov=m.HermitianMatrix.diag([0.25, 0.1])))
    ok("thm2 accepts a covariance matrix", r2["deviation"] > 0.0)
    try:
        m.bound("nope", 1.0, 1.0, 1.0, alpha=1.0, big_u=1.0)
        ok("unknown theorem raises", False)
    except ValueError:
        ok("unknown theorem raises", True)

    # Baselines: the function-class Maurer bound at U = K = x = 1 is 4e.
    b = json.loads(m.baseline_bound("maurer-function", big_u=1.0, big_k=1.0, x=1.0))
    ok("maurer-function = 4e", close(b["deviation"], 4.0 * math.e))
    bt = json.loads(m.baseline_bound("bernstein", sigma=1.0, big_k=1.0, t=0.0, n=10))
    ok("bernstein tail at t=0 is 1", bt["probability"] == 1.0)

    # Monte Carlo drivers: determinism and the documented pass behaviour.
    cfg = {
        "spec": {
            "kind": "rademacher_fixed",
            "d": 1,
            "directions": [{"d": 1, "re": [[1.0]], "im": None}],
            "n": 100,
            "declared_alpha": 1.0,
        },
        "trials": 2000,
        "x": 3.0,
        "bound_kind": "thm1-mixed",
        "seed": 7,
    }
    rep1 = m.run_tail_experiment(json.dumps(cfg))
    rep2 = m.run_tail_experiment(json.dumps(cfg))
    ok("tail experiment deterministic", rep1 == rep2)
    rep = json.loads(rep1)
    ok("tail experiment passes its budget", rep["pass"] is True)
    try:
        m.run_tail_experiment(json.dumps({k: v for k, v in cfg.items() if k != "seed"}))
        ok("missing seed raises", False)
    except ValueError:
        ok("missing seed raises", True)

    cov = json.loads(
        m.run_coverage_experiment(
            json.dumps({"kind": "gaussian_wigner", "d": 1, "scale": 1.0, "n": 50, "declared_alpha": 2.0}),
            2.0,
            500,
            123,
        )
    )
    ok("coverage experiment passes", cov["pass"] is True)

    mcd = json.loads(
        m.run_mcdiarmid_experiment(
            json.dumps(
                {
                    "m": 2,
                    "n": 20,
                    "radius_law": {"law": "weibull", "scale": 1.0, "shape": 1.0},
                    "alpha": 1.0,
                    "x": 2.0,
                    "trials": 500,
                    "seed": 11,
                    "pilot_trials": 2000,
                }
            )
        )
    )
    ok("mcdiarmid experiment passes", mcd["pass"] is True)
    ok("mcdiarmid bound is the -ben/-ber min", close(mcd["bound_value"], min(mcd["bennett_deviation"], mcd["bernstein_deviation"])))

    print(f"smoke test: PASS ({n_checks} checks)")


if __name__ == "__main__":
    main()
